"""Learned patch-similarity quality model: distance head and persistence.

A distance between two patches is computed from frozen deep features: at each
layer the feature vectors are unit-normalized along channels (an epsilon of
1e-10 guards the norm), channel-wise squared differences are weighted by a
nonnegative per-channel vector, summed, spatially averaged and scaled by a
nonnegative per-layer scalar; layer terms add up. Identical patches score 0
exactly, and nothing here has a bias term, so scores stay nonnegative.
"""

import hashlib
import json
import struct

import numpy as np

from ..errors import DigestMismatch, ManifestMismatch, ShapeMismatch
from .extractor import ConvStackExtractor
from .patches import extract_patch_array, patchify

NORM_EPS = 1e-10
MODEL_MAGIC = b"MQAQM1\n"
TARGET_MAPPING = "mos = clamp(5 - 4*q, 1, 5)"
INPUT_SCALE = "[-1,1]"


class QualityModel:
    """Extractor plus the trained head (per-layer channel weights + scale)."""

    def __init__(self, extractor, weights, scales):
        self.extractor = extractor
        # weights are held at float32 precision (the storage format) so a
        # save/load round trip reproduces bit-identical predictions
        self.weights = [np.asarray(w, dtype=np.float32).astype(np.float64) for w in weights]
        self.scales = np.asarray(scales, dtype=np.float32).astype(np.float64)
        if len(self.weights) != len(extractor.channels) or len(self.scales) != len(
            extractor.channels
        ):
            raise ShapeMismatch("head must carry one weight vector and scale per layer")
        for w, c in zip(self.weights, extractor.channels):
            if w.shape != (c,):
                raise ShapeMismatch(f"weight vector {w.shape} vs {c} channels")
        if any(w.min() < 0 for w in self.weights) or self.scales.min() < 0:
            raise ValueError("head weights must be nonnegative")

    @classmethod
    def zero_init(cls, extractor):
        """Channel weights zero, layer scales = channel count.

        d(x, y) = 0 for every pair at this point, and once the channel
        weights reach a uniform 1/C the layer term equals the plain
        unweighted normalized-feature distance.
        """
        return cls(
            extractor,
            [np.zeros(c) for c in extractor.channels],
            np.array([float(c) for c in extractor.channels]),
        )

    def copy(self):
        return QualityModel(self.extractor, [w.copy() for w in self.weights], self.scales.copy())


def _normalize_channels(features):
    norm = np.sqrt(np.sum(features.astype(np.float64) ** 2, axis=1, keepdims=True))
    return features / (norm + NORM_EPS)


def mean_squared_feature_diffs(extractor, ref_batch, dist_batch, chunk=64):
    """Per-layer (P, C_l) spatial means of squared normalized feature diffs.

    This is the sufficient statistic for the head: every distance, loss and
    gradient is linear in these vectors.
    """
    if ref_batch.shape != dist_batch.shape:
        raise ShapeMismatch(f"{ref_batch.shape} vs {dist_batch.shape}")
    n = ref_batch.shape[0]
    out = None
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        ref_taps = extractor.extract(ref_batch[start:stop])
        dist_taps = extractor.extract(dist_batch[start:stop])
        if out is None:
            out = [np.empty((n, t.shape[1])) for t in ref_taps]
        for li, (fr, fd) in enumerate(zip(ref_taps, dist_taps)):
            diff = _normalize_channels(fr) - _normalize_channels(fd)
            out[li][start:stop] = (diff**2).mean(axis=(2, 3))
    return out


def distances_from_diffs(diffs, model):
    """(P,) patch distances given cached per-layer mean diffs."""
    total = np.zeros(diffs[0].shape[0])
    for e_mean, w, w0 in zip(diffs, model.weights, model.scales):
        total += w0 * (e_mean @ w)
    return total


def _as_batch(patch):
    arr = np.asarray(patch.data if hasattr(patch, "data") else patch)
    if arr.ndim != 3 or arr.shape[2] not in (1, 3):
        raise ShapeMismatch(f"expected (H, W, C) patch, got {arr.shape}")
    if arr.shape[2] == 1:
        arr = np.repeat(arr, 3, axis=2)
    scaled = arr.astype(np.float32) / 127.5 - 1.0
    return scaled.transpose(2, 0, 1)[None]


def patch_distance(ref_patch, dist_patch, model):
    """Nonnegative perceptual distance between two same-shape patches."""
    ref = _as_batch(ref_patch)
    dist = _as_batch(dist_patch)
    if ref.shape != dist.shape:
        raise ShapeMismatch(f"{ref.shape} vs {dist.shape}")
    diffs = mean_squared_feature_diffs(model.extractor, ref, dist)
    return float(distances_from_diffs(diffs, model)[0])


def image_quality(ref_image, dist_image, mask, model):
    """Mean patch distance over every retained patch of the pair."""
    if (ref_image.height, ref_image.width) != (dist_image.height, dist_image.width):
        raise ShapeMismatch("reference and distorted images differ in size")
    patch_set = patchify(ref_image, mask)
    ref_batch = extract_patch_array(ref_image, patch_set)
    dist_batch = extract_patch_array(dist_image, patch_set)
    diffs = mean_squared_feature_diffs(model.extractor, ref_batch, dist_batch)
    return float(distances_from_diffs(diffs, model).mean())


def image_quality_multiview(ref_images, dist_images, masks, model):
    """Mean patch distance pooled over several viewpoints of one stimulus."""
    distances = []
    for ref, dist, mask in zip(ref_images, dist_images, masks):
        patch_set = patchify(ref, mask)
        ref_batch = extract_patch_array(ref, patch_set)
        dist_batch = extract_patch_array(dist, patch_set)
        diffs = mean_squared_feature_diffs(model.extractor, ref_batch, dist_batch)
        distances.append(distances_from_diffs(diffs, model))
    return float(np.concatenate(distances).mean())


def quality_to_mos(q):
    return float(np.clip(5.0 - 4.0 * q, 1.0, 5.0))


def predict_mos(ref_image, dist_image, mask, model):
    """Map the pooled distance onto the 1..5 opinion scale."""
    return quality_to_mos(image_quality(ref_image, dist_image, mask, model))


# --- persistence ---------------------------------------------------------------


def save_model(model, bundle_extractor=None):
    """Serialize to bytes: magic, JSON manifest, float32 LE weight blobs.

    bundle_extractor: None bundles ConvStack weights only when the extractor
    is not seeded; True/False force the choice.
    """
    extractor = model.extractor
    seed = None
    if extractor.descriptor.startswith("convstack5-seeded:"):
        seed = int(extractor.descriptor.split(":", 1)[1])
    if bundle_extractor is None:
        bundle_extractor = seed is None
    ext_blob = extractor.to_blob() if bundle_extractor else b""

    head_blob = b"".join(w.astype("<f4").tobytes() for w in model.weights)
    head_blob += model.scales.astype("<f4").tobytes()

    manifest = {
        "architecture": extractor.descriptor,
        "channels": list(extractor.channels),
        "input_scale": INPUT_SCALE,
        "target_mapping": TARGET_MAPPING,
        "head": {"w_lengths": [int(c) for c in extractor.channels], "w0_count": len(model.scales)},
        "extractor": {
            "bundled": bool(bundle_extractor),
            "seed": seed,
            "blob_digest": hashlib.sha256(ext_blob).hexdigest() if bundle_extractor else None,
        },
    }
    manifest_bytes = json.dumps(manifest, sort_keys=True).encode("utf-8")
    return (
        MODEL_MAGIC
        + struct.pack("<II", len(manifest_bytes), len(head_blob))
        + manifest_bytes
        + head_blob
        + ext_blob
    )


def load_model(data, extractor=None):
    """Rebuild a QualityModel; load(save(m)) predicts bit-identically."""
    if data[: len(MODEL_MAGIC)] != MODEL_MAGIC:
        raise ManifestMismatch("bad model magic")
    offset = len(MODEL_MAGIC)
    manifest_len, head_len = struct.unpack_from("<II", data, offset)
    offset += 8
    try:
        manifest = json.loads(data[offset : offset + manifest_len].decode("utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError):
        raise ManifestMismatch("manifest is not valid JSON") from None
    offset += manifest_len
    head_blob = data[offset : offset + head_len]
    offset += head_len
    ext_blob = data[offset:]

    channels = manifest["channels"]
    w_lengths = manifest["head"]["w_lengths"]
    if w_lengths != channels:
        raise ManifestMismatch("head lengths disagree with layer channels")
    expected = 4 * (sum(w_lengths) + manifest["head"]["w0_count"])
    if len(head_blob) != expected:
        raise ManifestMismatch(f"head blob is {len(head_blob)} bytes, expected {expected}")

    info = manifest["extractor"]
    if extractor is None:
        if info["bundled"]:
            digest = hashlib.sha256(ext_blob).hexdigest()
            if digest != info["blob_digest"]:
                raise DigestMismatch("bundled extractor digest mismatch")
            extractor = ConvStackExtractor.from_blob(ext_blob, manifest["architecture"])
        elif info["seed"] is not None:
            extractor = ConvStackExtractor.seeded(info["seed"])
        else:
            raise ManifestMismatch("model carries no extractor and none was supplied")
    if list(extractor.channels) != channels:
        raise ManifestMismatch("supplied extractor channels disagree with manifest")

    weights = []
    pos = 0
    for c in w_lengths:
        weights.append(np.frombuffer(head_blob, dtype="<f4", count=c, offset=pos).astype(np.float64))
        pos += 4 * c
    scales = np.frombuffer(
        head_blob, dtype="<f4", count=manifest["head"]["w0_count"], offset=pos
    ).astype(np.float64)
    return QualityModel(extractor, weights, scales)
