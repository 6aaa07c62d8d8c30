"""Overlapping patch grids over rendered stimuli."""

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyPatchSet, ImageTooSmall

PATCH_SIZE = 64
PATCH_STRIDE = 32
MIN_COVERAGE = 0.65


@dataclass
class PatchSet:
    positions: np.ndarray  # (P, 2) int64 top-left (x, y)
    coverages: np.ndarray  # (P,) float64
    patch_size: int = PATCH_SIZE
    stride: int = PATCH_STRIDE

    def __len__(self):
        return len(self.positions)


def patchify(image, mask, patch_size=PATCH_SIZE, stride=PATCH_STRIDE, min_coverage=MIN_COVERAGE):
    """Grid positions x,y in {0, stride, ...} fully inside the image, keeping
    patches whose mask coverage is at least min_coverage."""
    h, w = image.height, image.width
    if h < patch_size or w < patch_size:
        raise ImageTooSmall(f"{w}x{h} image cannot hold a {patch_size}px patch")
    if (mask.height, mask.width) != (h, w):
        raise ValueError("mask dimensions must match the image")
    xs = np.arange(0, w - patch_size + 1, stride)
    ys = np.arange(0, h - patch_size + 1, stride)
    # summed-area table makes per-patch coverage O(1)
    sat = np.zeros((h + 1, w + 1), dtype=np.int64)
    sat[1:, 1:] = np.cumsum(np.cumsum(mask.data.astype(np.int64), axis=0), axis=1)
    positions = []
    coverages = []
    area = patch_size * patch_size
    for y in ys:
        for x in xs:
            covered = (
                sat[y + patch_size, x + patch_size]
                - sat[y, x + patch_size]
                - sat[y + patch_size, x]
                + sat[y, x]
            )
            frac = covered / area
            if frac >= min_coverage:
                positions.append((x, y))
                coverages.append(frac)
    if not positions:
        raise EmptyPatchSet("no patch reaches the coverage threshold")
    return PatchSet(
        np.array(positions, dtype=np.int64),
        np.array(coverages, dtype=np.float64),
        patch_size,
        stride,
    )


def extract_patch_array(image, patch_set):
    """(P, 3, S, S) float32 batch in [-1, 1] for the extractor."""
    rgb = image.to_rgb().data
    size = patch_set.patch_size
    out = np.empty((len(patch_set), 3, size, size), dtype=np.float32)
    for i, (x, y) in enumerate(patch_set.positions):
        patch = rgb[y : y + size, x : x + size].astype(np.float32)
        out[i] = (patch / 127.5 - 1.0).transpose(2, 0, 1)
    return out
