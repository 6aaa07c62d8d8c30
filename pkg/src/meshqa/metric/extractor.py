"""Frozen convolutional feature extractor.

The shipped shape is a 5-convolution stack with channel widths 64, 192, 384,
256, 256 and features tapped after each rectification. Two weight sources
exist: "seeded" (He-scaled normal draws from a fixed seed; what the test
suite uses) and "pretrained" (weights loaded from the blob format written by
to_blob). Extraction is pure and deterministic; nothing here ever trains.
"""

import numpy as np

# (out_channels, kernel, stride, pad, maxpool 3x2 afterwards)
LAYER_SHAPES = (
    (64, 11, 4, 2, True),
    (192, 5, 1, 2, True),
    (384, 3, 1, 1, False),
    (256, 3, 1, 1, False),
    (256, 3, 1, 1, False),
)
INPUT_CHANNELS = 3


def _conv2d(x, w, b, stride, pad):
    n, c, h, width = x.shape
    k = w.shape[0]
    kh, kw = w.shape[2], w.shape[3]
    if pad:
        x = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    hp = (x.shape[2] - kh) // stride + 1
    wp = (x.shape[3] - kw) // stride + 1
    s = x.strides
    cols = np.lib.stride_tricks.as_strided(
        x,
        (n, c, hp, wp, kh, kw),
        (s[0], s[1], s[2] * stride, s[3] * stride, s[2], s[3]),
    )
    cols = cols.transpose(0, 2, 3, 1, 4, 5).reshape(n * hp * wp, c * kh * kw)
    out = cols @ w.reshape(k, -1).T.astype(x.dtype) + b.astype(x.dtype)
    return out.reshape(n, hp, wp, k).transpose(0, 3, 1, 2)


def _maxpool(x, k=3, stride=2):
    n, c, h, w = x.shape
    hp = (h - k) // stride + 1
    wp = (w - k) // stride + 1
    s = x.strides
    view = np.lib.stride_tricks.as_strided(
        x,
        (n, c, hp, wp, k, k),
        (s[0], s[1], s[2] * stride, s[3] * stride, s[2], s[3]),
    )
    return view.max(axis=(4, 5))


class ConvStackExtractor:
    """5-conv feature stack; extract() maps (N,3,H,W) in [-1,1] to 5 taps."""

    channels = tuple(shape[0] for shape in LAYER_SHAPES)

    def __init__(self, weights, biases, descriptor):
        self.weights = [np.asarray(w, dtype=np.float32) for w in weights]
        self.biases = [np.asarray(b, dtype=np.float32) for b in biases]
        self.descriptor = descriptor
        expected_in = INPUT_CHANNELS
        for (out_ch, kernel, _, _, _), w, b in zip(LAYER_SHAPES, self.weights, self.biases):
            if w.shape != (out_ch, expected_in, kernel, kernel) or b.shape != (out_ch,):
                raise ValueError(f"weight shape {w.shape} does not fit the layer plan")
            expected_in = out_ch

    @classmethod
    def seeded(cls, seed=0):
        rng = np.random.default_rng(seed)
        weights = []
        biases = []
        in_ch = INPUT_CHANNELS
        for out_ch, kernel, _, _, _ in LAYER_SHAPES:
            fan_in = in_ch * kernel * kernel
            weights.append(
                rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(out_ch, in_ch, kernel, kernel))
            )
            biases.append(np.zeros(out_ch))
            in_ch = out_ch
        return cls(weights, biases, f"convstack5-seeded:{seed}")

    def extract(self, batch):
        x = np.ascontiguousarray(batch, dtype=np.float32)
        taps = []
        for (out_ch, kernel, stride, pad, pool), w, b in zip(
            LAYER_SHAPES, self.weights, self.biases
        ):
            x = _conv2d(x, w, b, stride, pad)
            np.maximum(x, 0.0, out=x)
            taps.append(x)
            if pool:
                x = _maxpool(x)
        return taps

    def to_blob(self):
        parts = []
        for w, b in zip(self.weights, self.biases):
            parts.append(w.astype("<f4").tobytes())
            parts.append(b.astype("<f4").tobytes())
        return b"".join(parts)

    @classmethod
    def from_blob(cls, blob, descriptor="convstack5-pretrained"):
        weights = []
        biases = []
        in_ch = INPUT_CHANNELS
        offset = 0
        for out_ch, kernel, _, _, _ in LAYER_SHAPES:
            n_w = out_ch * in_ch * kernel * kernel
            w = np.frombuffer(blob, dtype="<f4", count=n_w, offset=offset)
            offset += 4 * n_w
            b = np.frombuffer(blob, dtype="<f4", count=out_ch, offset=offset)
            offset += 4 * out_ch
            weights.append(w.reshape(out_ch, in_ch, kernel, kernel))
            biases.append(b)
            in_ch = out_ch
        if offset != len(blob):
            raise ValueError(f"extractor blob has {len(blob)} bytes, expected {offset}")
        return cls(weights, biases, descriptor)
