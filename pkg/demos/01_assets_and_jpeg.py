"""Asset round trips and the baseline JPEG codec.

Walks through the interchange layer: OBJ text in and out, lossless PPM, and
the quality-scaled JPEG encoder used as the texture distortion.
"""

import numpy as np

from meshqa.assets import (
    decode_image,
    decode_jpeg,
    encode_jpeg,
    encode_ppm,
    parse_obj,
    quantization_tables,
    write_obj,
)
from meshqa.shapes import checkerboard, gradient_texture, uv_sphere

# --- 1. OBJ text round trip ---------------------------------------------------

mesh = uv_sphere(24, 32, name="demo_sphere")
text = write_obj(mesh)
again = parse_obj(text)
print(f"sphere: {mesh.n_vertices} vertices, {mesh.n_faces} faces")
print(f"round trip identical: {np.array_equal(mesh.faces_pos, again.faces_pos)}")

# negative (relative) indices are part of the format
relative = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n")
print(f"relative-index face resolves to {relative.faces_pos[0].tolist()}")

# --- 2. lossless PPM ------------------------------------------------------------

texture = gradient_texture(128)
assert np.array_equal(decode_image(encode_ppm(texture)).data, texture.data)
print("PPM round trip: lossless")

# --- 3. JPEG quality ladder -------------------------------------------------------

print("\nquality  scaled-table[0,0]  bytes   max|err|")
photo = checkerboard(128, 16)
for quality in (90, 75, 50, 25, 10):
    luma, _ = quantization_tables(quality)
    blob = encode_jpeg(photo, quality)
    decoded = decode_jpeg(blob)
    err = np.abs(decoded.data.astype(int) - photo.data.astype(int)).max()
    print(f"{quality:>7}  {luma[0, 0]:>17}  {len(blob):>5}  {err:>8}")

print("\nlower quality -> coarser tables -> smaller files -> larger error.")
