"""Render settings and the plain-text config file that carries them."""

import math
from dataclasses import dataclass, replace

import numpy as np

MATERIALS = ("lambertian", "glossy", "metallic", "unlit")

# preset material parameters; glossy/metallic follow common PBR viewer values
MATERIAL_PRESETS = {
    "lambertian": {"glossiness": 0.0, "metalness": 0.0},
    "glossy": {"glossiness": 0.8, "metalness": 0.0},
    "metallic": {"glossiness": 0.6, "metalness": 0.8},
    "unlit": {"glossiness": 0.0, "metalness": 0.0},
}


@dataclass(frozen=True)
class Viewpoint:
    """Camera placement on the bounding sphere.

    distance is in multiples of the bounding-sphere radius.
    """

    azimuth_deg: float = 0.0
    elevation_deg: float = 0.0
    distance: float = 3.0

    def __post_init__(self):
        if self.distance <= 0:
            raise ValueError("viewpoint distance must be > 0")


@dataclass(frozen=True)
class RenderConfig:
    width: int = 650
    height: int = 550
    fov_deg: float = 40.0
    light_azimuth_deg: float = 30.0   # light comes from the top right
    light_elevation_deg: float = 35.0
    light_intensity: float = 1.0
    ambient: float = 0.15
    material: str = "lambertian"
    glossiness: float = 0.0
    metalness: float = 0.0
    background: int = 200             # light gray backdrop
    mipmap: bool = True
    uv_wrap: str = "clamp"

    def __post_init__(self):
        if not 0.0 < self.fov_deg < 180.0:
            raise ValueError("fov must be in (0, 180) degrees")
        if not 0 <= self.background <= 255:
            raise ValueError("background gray level must be in [0, 255]")
        if not 0.0 <= self.ambient <= 1.0:
            raise ValueError("ambient must be in [0, 1]")
        if self.material not in MATERIALS:
            raise ValueError(f"unknown material {self.material!r}")
        if self.uv_wrap not in ("clamp", "repeat"):
            raise ValueError(f"unknown uv wrap mode {self.uv_wrap!r}")

    def with_material(self, name):
        preset = MATERIAL_PRESETS[name]
        return replace(self, material=name, **preset)

    def light_direction(self):
        """Unit vector pointing from the scene toward the light."""
        az = math.radians(self.light_azimuth_deg)
        el = math.radians(self.light_elevation_deg)
        v = np.array(
            [math.cos(el) * math.sin(az), math.sin(el), math.cos(el) * math.cos(az)]
        )
        return v / np.linalg.norm(v)


_BOOL = {"on": True, "off": False, "true": True, "false": False, "1": True, "0": False}

_FIELDS = {
    "width": int,
    "height": int,
    "fov_deg": float,
    "light_azimuth_deg": float,
    "light_elevation_deg": float,
    "light_intensity": float,
    "ambient": float,
    "material": str,
    "glossiness": float,
    "metalness": float,
    "background": int,
    "uv_wrap": str,
}


def load_render_config(path):
    """Read 'key = value' lines; '#' starts a comment; unknown keys error."""
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{line_no}: expected 'key = value'")
            key, _, val = line.partition("=")
            key = key.strip()
            val = val.strip()
            if key == "mipmap":
                values[key] = _BOOL[val.lower()]
            elif key in _FIELDS:
                values[key] = _FIELDS[key](val)
            else:
                raise ValueError(f"{path}:{line_no}: unknown key {key!r}")
    config = RenderConfig(**values)
    if "material" in values and not {"glossiness", "metalness"} & values.keys():
        config = config.with_material(values["material"])
    return config


def save_render_config(config, path):
    lines = [
        f"width = {config.width}",
        f"height = {config.height}",
        f"fov_deg = {config.fov_deg}",
        f"light_azimuth_deg = {config.light_azimuth_deg}",
        f"light_elevation_deg = {config.light_elevation_deg}",
        f"light_intensity = {config.light_intensity}",
        f"ambient = {config.ambient}",
        f"material = {config.material}",
        f"glossiness = {config.glossiness}",
        f"metalness = {config.metalness}",
        f"background = {config.background}",
        f"mipmap = {'on' if config.mipmap else 'off'}",
        f"uv_wrap = {config.uv_wrap}",
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
