import numpy as np
import pytest

from meshqa.assets import TextureImage


def synthetic_photo(side=192, seed=0):
    """Pseudo-natural test image: smooth gradients, blobs and mild noise."""
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:side, 0:side].astype(np.float64) / side
    base = np.stack(
        [
            120 + 90 * np.sin(2 * np.pi * (x * 1.3 + 0.1)) * np.cos(2 * np.pi * y),
            100 + 80 * x + 40 * np.sin(6 * np.pi * y),
            90 + 110 * y * (1 - x),
        ],
        axis=2,
    )
    for _ in range(6):
        cx, cy, r = rng.random(3) * np.array([1, 1, 0.25]) + np.array([0, 0, 0.05])
        blob = np.exp(-(((x - cx) ** 2 + (y - cy) ** 2) / (2 * r**2)))
        base += blob[:, :, None] * rng.uniform(-70, 70, size=3)
    base += rng.normal(0, 4, size=base.shape)
    return TextureImage(np.clip(base, 0, 255).astype(np.uint8))


@pytest.fixture
def photo():
    return synthetic_photo()
