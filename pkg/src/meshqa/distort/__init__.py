from .quantize import quantize_positions, quantize_uvs, estimate_mesh_bytes
from .resample import resample_texture, lanczos_weights
from .simplify import simplify_qem, simplify_levels
from .hrc import (
    DistortionSpec,
    LevelSets,
    SizeReport,
    PAPER_LEVELS,
    enumerate_specs,
    apply_hrc,
    distort_stimulus,
    manifest_row,
    write_manifest,
    read_manifest,
)

__all__ = [
    "quantize_positions",
    "quantize_uvs",
    "estimate_mesh_bytes",
    "resample_texture",
    "lanczos_weights",
    "simplify_qem",
    "simplify_levels",
    "DistortionSpec",
    "LevelSets",
    "SizeReport",
    "PAPER_LEVELS",
    "enumerate_specs",
    "apply_hrc",
    "distort_stimulus",
    "manifest_row",
    "write_manifest",
    "read_manifest",
]
