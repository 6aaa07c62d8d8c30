from .mesh import IndexedMesh, parse_obj, write_obj, zero_area_triangles
from .image import (
    TextureImage,
    CoverageMask,
    decode_image,
    encode_ppm,
    encode_pgm,
)
from .jpeg import encode_jpeg, decode_jpeg, quantization_tables

__all__ = [
    "IndexedMesh",
    "parse_obj",
    "write_obj",
    "zero_area_triangles",
    "TextureImage",
    "CoverageMask",
    "decode_image",
    "encode_ppm",
    "encode_pgm",
    "encode_jpeg",
    "decode_jpeg",
    "quantization_tables",
]
