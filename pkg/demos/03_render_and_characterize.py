"""Software rendering and the three content-complexity measures.

Renders a textured model from its framed main viewpoint plus a 4-view ring,
then scores geometric, color and attention complexity on the snapshots.
"""

import os

from meshqa.assets import encode_pgm, encode_ppm
from meshqa.characterize import characterize_model, normalize_scores
from meshqa.render import RenderConfig, frame_model, render, ring_viewpoints
from meshqa.shapes import bumpy_sphere, checkerboard, gradient_texture, uv_sphere

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

config = RenderConfig(width=320, height=272)
mesh = bumpy_sphere(48, 48, amplitude=0.06, seed=2, name="bumpy")
texture = checkerboard(256, 32)

# --- 1. framed main view plus a ring --------------------------------------------

main = frame_model(mesh, config)
image, mask = render(mesh, texture, config, main)
with open(os.path.join(OUT, "main.ppm"), "wb") as fh:
    fh.write(encode_ppm(image))
with open(os.path.join(OUT, "main_mask.pgm"), "wb") as fh:
    fh.write(encode_pgm(mask.to_image()))
print(f"main view: {mask.count()} covered pixels "
      f"({100 * mask.count() / (config.width * config.height):.1f}% of frame)")

for i, viewpoint in enumerate(ring_viewpoints(4, main.distance)):
    image, _ = render(mesh, texture, config, viewpoint)
    with open(os.path.join(OUT, f"ring_{i}.ppm"), "wb") as fh:
        fh.write(encode_ppm(image))
print(f"wrote main + 4 ring renders to {OUT}")

# --- 2. complexity measures over a tiny corpus --------------------------------------

corpus = [
    ("smooth_plain", uv_sphere(32, 32), gradient_texture(128)),
    ("smooth_busy", uv_sphere(32, 32), checkerboard(256, 16)),
    ("bumpy_plain", bumpy_sphere(32, 32, seed=3), gradient_texture(128)),
    ("bumpy_busy", bumpy_sphere(32, 32, seed=3), checkerboard(256, 16)),
]
scores = [characterize_model(name, m, t, config) for name, m, t in corpus]
normalize_scores(scores)

print("\nmodel         si_geo  si_col   vac    (normalized)")
for s in scores:
    print(f"{s.model_id:<13}{s.si_geo:>7.2f}{s.si_col:>8.2f}{s.vac:>7.3f}"
          f"   ({s.si_geo_norm:.2f}, {s.si_col_norm:.2f}, {s.vac_norm:.2f})")
print("\nbumpy geometry raises si_geo; busy textures raise si_col.")
