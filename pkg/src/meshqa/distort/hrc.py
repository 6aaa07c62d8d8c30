"""Distortion recipes: the 5-parameter grid, application order, size accounting.

A recipe combines simplification level, position/UV quantization bits,
texture side and JPEG quality. Application order is LoD -> qp -> qt -> T_S ->
T_Q: simplify the clean mesh, quantize the survivor, then run the two texture
operations (which are independent of geometry). The order is recorded in every
manifest row.
"""

import json
from dataclasses import dataclass, asdict
from itertools import product

from ..assets.jpeg import decode_jpeg, encode_jpeg
from .quantize import estimate_mesh_bytes, quantize_positions, quantize_uvs
from .resample import resample_texture
from .simplify import level_index, simplify_levels, simplify_qem

APPLICATION_ORDER = "lod,qp,qt,ts,tq"


@dataclass(frozen=True)
class LevelSets:
    """Enumerated levels for each distortion dimension."""

    lod: tuple = tuple(range(1, 11))
    qp: tuple = (7, 8, 9, 10, 11)
    qt: tuple = (6, 7, 8, 9, 10)
    ts: tuple = (2048, 1440, 1024, 712, 512)
    tq: tuple = (90, 75, 50, 25, 10)

    def cardinality(self):
        return len(self.lod) * len(self.qp) * len(self.qt) * len(self.ts) * len(self.tq)


PAPER_LEVELS = LevelSets()


@dataclass(frozen=True)
class DistortionSpec:
    """One point on the distortion grid."""

    lod: int
    qp: int
    qt: int
    ts: int
    tq: int

    def validate(self, levels=PAPER_LEVELS):
        for name in ("lod", "qp", "qt", "ts", "tq"):
            value = getattr(self, name)
            allowed = getattr(levels, name)
            if value not in allowed:
                raise ValueError(f"{name}={value} not in level set {allowed}")
        return self

    def label(self):
        return f"L{self.lod}_qp{self.qp}_qt{self.qt}_ts{self.ts}_tq{self.tq}"

    @staticmethod
    def parse(text):
        """Parse 'L3,9,8,1024,50' (or '3,9,8,1024,50')."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 5:
            raise ValueError(f"expected 5 comma-separated levels, got {text!r}")
        return DistortionSpec(
            level_index(parts[0]),
            int(parts[1]),
            int(parts[2]),
            int(parts[3]),
            int(parts[4]),
        )


@dataclass
class SizeReport:
    texture_bytes: int
    mesh_bytes: int

    @property
    def total_bytes(self):
        return self.texture_bytes + self.mesh_bytes


def enumerate_specs(levels=PAPER_LEVELS):
    """The full distortion grid in canonical (lod, qp, qt, ts, tq) order."""
    return [
        DistortionSpec(*combo)
        for combo in product(levels.lod, levels.qp, levels.qt, levels.ts, levels.tq)
    ]


@dataclass
class DistortedStimulus:
    mesh: object
    texture: object
    report: SizeReport
    jpeg_bytes: bytes
    spec: DistortionSpec


def distort_stimulus(mesh, texture, spec, levels=PAPER_LEVELS, simplified_cache=None):
    """Apply one distortion recipe, keeping the encoded texture bytes.

    simplified_cache maps lod level -> pre-simplified mesh; batch drivers fill
    it via simplify_levels so the expensive collapse pass runs once per model.
    """
    spec.validate(levels)
    if simplified_cache is not None and spec.lod in simplified_cache:
        simplified = simplified_cache[spec.lod]
    else:
        simplified = simplify_qem(mesh, spec.lod)
    quantized = quantize_uvs(quantize_positions(simplified, spec.qp), spec.qt)
    resampled = resample_texture(texture, spec.ts)
    jpeg_bytes = encode_jpeg(resampled, spec.tq)
    decoded = decode_jpeg(jpeg_bytes)
    report = SizeReport(
        texture_bytes=len(jpeg_bytes),
        mesh_bytes=estimate_mesh_bytes(quantized, spec.qp, spec.qt),
    )
    return DistortedStimulus(quantized, decoded, report, jpeg_bytes, spec)


def apply_hrc(mesh, texture, spec, levels=PAPER_LEVELS, simplified_cache=None):
    """Apply one recipe; returns (mesh, texture, SizeReport)."""
    result = distort_stimulus(mesh, texture, spec, levels, simplified_cache)
    return result.mesh, result.texture, result.report


def manifest_row(model_id, spec, report, mesh_path="", texture_path=""):
    return {
        "model_id": model_id,
        "lod": spec.lod,
        "qp": spec.qp,
        "qt": spec.qt,
        "ts": spec.ts,
        "tq": spec.tq,
        "texture_bytes": report.texture_bytes,
        "mesh_bytes": report.mesh_bytes,
        "total_bytes": report.total_bytes,
        "mesh_path": mesh_path,
        "texture_path": texture_path,
        "order": APPLICATION_ORDER,
        "jpeg_subsampling": "4:2:0",
        "position_grid": "longest-aabb-extent",
    }


def write_manifest(rows, path):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def read_manifest(path):
    with open(path, "r", encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
