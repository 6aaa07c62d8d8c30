from .config import RenderConfig, Viewpoint, load_render_config, save_render_config
from .camera import frame_model, ring_viewpoints, bounding_sphere
from .raster import render, build_mipchain

__all__ = [
    "RenderConfig",
    "Viewpoint",
    "load_render_config",
    "save_render_config",
    "frame_model",
    "ring_viewpoints",
    "bounding_sphere",
    "render",
    "build_mipchain",
]
