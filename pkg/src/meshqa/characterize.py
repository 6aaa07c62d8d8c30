"""Content complexity measures computed on rendered snapshots.

Three scalars characterize a textured model: edge energy of a shading-only
render (geometric complexity), edge energy of an unlit render with the
silhouette removed (color complexity), and the normalized entropy of a
saliency map over the covered pixels (attention dispersion, in [0,1]).
"""

import csv
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import binary_erosion, gaussian_filter

from .assets.image import TextureImage
from .distort.resample import lanczos_weights
from .errors import ImageTooSmall
from .render.raster import render

SILHOUETTE_PX = 2


def sobel_magnitude(luma):
    """Gradient magnitude with 3x3 Sobel kernels; valid on interior pixels."""
    g = np.asarray(luma, dtype=np.float64)
    if min(g.shape) < 3:
        raise ImageTooSmall(f"need at least 3x3 pixels, got {g.shape}")
    gx = (
        (g[:-2, 2:] + 2 * g[1:-1, 2:] + g[2:, 2:])
        - (g[:-2, :-2] + 2 * g[1:-1, :-2] + g[2:, :-2])
    )
    gy = (
        (g[2:, :-2] + 2 * g[2:, 1:-1] + g[2:, 2:])
        - (g[:-2, :-2] + 2 * g[:-2, 1:-1] + g[:-2, 2:])
    )
    mag = np.zeros_like(g)
    mag[1:-1, 1:-1] = np.hypot(gx, gy)
    return mag


def spatial_information(image, pixel_mask=None):
    """Population std of the Sobel magnitude; 1-px frame excluded.

    pixel_mask optionally restricts the statistic to a subset of pixels.
    """
    mag = sobel_magnitude(image.luma())
    valid = np.zeros(mag.shape, dtype=bool)
    valid[1:-1, 1:-1] = True
    if pixel_mask is not None:
        valid &= np.asarray(pixel_mask, dtype=bool)
    values = mag[valid]
    if values.size == 0:
        return 0.0
    return float(values.std())


def _interior(mask_data, erode_px):
    if erode_px <= 0:
        return mask_data
    return binary_erosion(mask_data, np.ones((3, 3), dtype=bool), iterations=erode_px)


def si_geo(mesh, config, viewpoint=None, exclude_silhouette_px=0):
    """Edge energy of the shading-only render (white albedo, texture ignored)."""
    white = TextureImage.constant(1, 1, 255)
    shaded = config.with_material("lambertian")
    image, mask = render(mesh, white, shaded, viewpoint)
    return spatial_information(image, _interior(mask.data, exclude_silhouette_px))


def si_col(mesh, texture, config, viewpoint=None):
    """Edge energy of the unlit render, ignoring 2 px around the silhouette."""
    unlit = config.with_material("unlit")
    image, mask = render(mesh, texture, unlit, viewpoint)
    return spatial_information(image, _interior(mask.data, SILHOUETTE_PX))


def spectral_residual_saliency(image, internal_side=64, sigma=2.5):
    """Classic spectral-residual saliency; nonnegative map at image size."""
    gray = image.luma()
    wy = lanczos_weights(gray.shape[0], internal_side)
    wx = lanczos_weights(gray.shape[1], internal_side)
    small = wy @ gray @ wx.T
    spectrum = np.fft.fft2(small)
    log_amp = np.log(np.abs(spectrum) + 1e-9)
    phase = np.angle(spectrum)
    box = np.ones((3, 3)) / 9.0
    smooth = np.real(
        np.fft.ifft2(np.fft.fft2(log_amp) * np.fft.fft2(box, s=log_amp.shape))
    )
    residual = log_amp - smooth
    sal = np.abs(np.fft.ifft2(np.exp(residual + 1j * phase))) ** 2
    sal = gaussian_filter(sal, sigma)
    up_y = lanczos_weights(internal_side, gray.shape[0])
    up_x = lanczos_weights(internal_side, gray.shape[1])
    sal = up_y @ sal @ up_x.T
    return np.maximum(sal, 0.0)


def vac(mesh, texture, config, saliency=None, viewpoint=None):
    """Normalized entropy of the saliency distribution over covered pixels.

    1.0 means attention is spread uniformly, 0.0 means it collapses onto a
    single pixel. An all-zero saliency map falls back to uniform (with a
    warning), which by definition scores 1.0.
    """
    image, mask = render(mesh, texture, config, viewpoint)
    if saliency is None:
        saliency = spectral_residual_saliency
    sal_map = saliency(image) if callable(saliency) else np.asarray(saliency, dtype=np.float64)
    if sal_map.shape != mask.data.shape:
        raise ValueError(
            f"saliency shape {sal_map.shape} does not match render {mask.data.shape}"
        )
    values = np.asarray(sal_map, dtype=np.float64)[mask.data]
    n = values.size
    if n == 0:
        raise ImageTooSmall("empty coverage mask")
    if n == 1:
        return 1.0
    total = values.sum()
    if not np.isfinite(total) or total <= 0.0:
        warnings.warn("all-zero saliency map: falling back to a uniform map")
        return 1.0
    p = values / total
    nz = p[p > 0]
    entropy = float(-(nz * np.log(nz)).sum())
    return entropy / np.log(n)


@dataclass
class CharacterizationScores:
    model_id: str
    si_geo: float
    si_col: float
    vac: float
    si_geo_norm: float = float("nan")
    si_col_norm: float = float("nan")
    vac_norm: float = float("nan")


def characterize_model(
    model_id, mesh, texture, config, saliency=None, viewpoint=None, view_mode="main"
):
    """Scores from the main viewpoint, or max-pooled over a 4-view ring."""
    if view_mode == "main":
        viewpoints = [viewpoint]
    elif view_mode == "ring4":
        from .render.camera import frame_model, ring_viewpoints

        distance = frame_model(mesh, config).distance
        main_az = viewpoint.azimuth_deg if viewpoint is not None else 0.0
        viewpoints = ring_viewpoints(4, distance, main_az)
    else:
        raise ValueError(f"unknown view mode {view_mode!r}")
    return CharacterizationScores(
        model_id=model_id,
        si_geo=max(si_geo(mesh, config, v) for v in viewpoints),
        si_col=max(si_col(mesh, texture, config, v) for v in viewpoints),
        vac=max(vac(mesh, texture, config, saliency, v) for v in viewpoints),
    )


def normalize_scores(scores):
    """Min-max normalize each measure over the corpus, in place."""

    def rescale(values):
        lo, hi = min(values), max(values)
        if hi <= lo:
            return [0.0 for _ in values]
        return [(v - lo) / (hi - lo) for v in values]

    for attr in ("si_geo", "si_col", "vac"):
        normed = rescale([getattr(s, attr) for s in scores])
        for s, v in zip(scores, normed):
            setattr(s, attr + "_norm", v)
    return scores


CSV_FIELDS = ["model_id", "si_geo_raw", "si_col_raw", "vac", "si_geo_norm", "si_col_norm", "vac_norm"]


def write_scores_csv(scores, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_FIELDS)
        for s in scores:
            writer.writerow(
                [s.model_id, s.si_geo, s.si_col, s.vac, s.si_geo_norm, s.si_col_norm, s.vac_norm]
            )


def load_saliency_pgm(path):
    """Externally computed saliency imported as PGM (one byte per pixel)."""
    from .assets.image import decode_image

    with open(path, "rb") as fh:
        img = decode_image(fh.read())
    return img.data[:, :, 0].astype(np.float64)
