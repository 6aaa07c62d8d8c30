"""Separable Lanczos-3 image resampling."""

import numpy as np

from ..assets.image import TextureImage

_RADIUS = 3


def _lanczos(x):
    x = np.asarray(x, dtype=np.float64)
    out = np.sinc(x) * np.sinc(x / _RADIUS)
    out[np.abs(x) >= _RADIUS] = 0.0
    return out


def lanczos_weights(n_in, n_out):
    """Row-normalized (n_out, n_in) Lanczos-3 weight matrix.

    Downscaling widens the kernel by the inverse scale (low-pass); edge taps
    are clamped into the image. Rows sum to 1, so constants are preserved.
    """
    scale = n_out / n_in
    support = _RADIUS / min(scale, 1.0)
    kernel_scale = min(scale, 1.0)
    w = np.zeros((n_out, n_in), dtype=np.float64)
    for i in range(n_out):
        center = (i + 0.5) / scale - 0.5
        j0 = int(np.ceil(center - support))
        j1 = int(np.floor(center + support))
        taps = np.arange(j0, j1 + 1)
        vals = _lanczos((taps - center) * kernel_scale)
        np.add.at(w[i], np.clip(taps, 0, n_in - 1), vals)
        w[i] /= w[i].sum()
    return w


def resample_texture(image, target_side):
    """Resample to target_side x target_side with a separable Lanczos-3 filter."""
    if target_side < 1:
        raise ValueError("target_side must be >= 1")
    if image.height == target_side and image.width == target_side:
        return TextureImage(image.data.copy(), image.colorspace)
    wy = lanczos_weights(image.height, target_side)
    wx = lanczos_weights(image.width, target_side)
    src = image.data.astype(np.float64)
    tmp = np.einsum("oh,hwc->owc", wy, src)
    out = np.einsum("pw,owc->opc", wx, tmp)
    return TextureImage(np.clip(np.rint(out), 0, 255).astype(np.uint8), image.colorspace)
