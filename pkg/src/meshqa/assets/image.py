"""8-bit raster images, coverage masks, and binary PPM/PGM interchange."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import TruncatedStream, UnsupportedFormat


@dataclass
class TextureImage:
    """Row-major 8-bit image; 1 (gray) or 3 (sRGB) channels."""

    data: np.ndarray  # (H, W, C) uint8
    colorspace: str = "srgb"

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.uint8)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise UnsupportedFormat(f"bad image shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise UnsupportedFormat("empty image")
        self.data = arr

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def channels(self):
        return self.data.shape[2]

    def to_rgb(self):
        if self.channels == 3:
            return self
        return TextureImage(np.repeat(self.data, 3, axis=2), self.colorspace)

    def luma(self):
        """Rec.601 luma as float64 (H, W)."""
        if self.channels == 1:
            return self.data[:, :, 0].astype(np.float64)
        rgb = self.data.astype(np.float64)
        return 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]

    @staticmethod
    def constant(width, height, value, channels=3):
        value = np.broadcast_to(np.asarray(value, dtype=np.uint8), (channels,))
        data = np.tile(value, (height, width, 1))
        return TextureImage(data)


@dataclass
class CoverageMask:
    """Per-pixel stimulus/background flag matching an image's dimensions."""

    data: np.ndarray  # (H, W) bool

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=bool)
        if self.data.ndim != 2:
            raise UnsupportedFormat(f"bad mask shape {self.data.shape}")

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    def count(self):
        return int(self.data.sum())

    def to_image(self):
        return TextureImage((self.data.astype(np.uint8) * 255)[:, :, None])

    @staticmethod
    def from_image(image, threshold=128):
        return CoverageMask(image.luma() >= threshold)


def _read_pnm_header(buf):
    # Header tokens may be separated by arbitrary whitespace and '#' comments.
    tokens = []
    pos = 2  # past magic
    while len(tokens) < 3:
        while pos < len(buf) and buf[pos : pos + 1].isspace():
            pos += 1
        if pos >= len(buf):
            raise TruncatedStream("PNM header ended early")
        if buf[pos : pos + 1] == b"#":
            while pos < len(buf) and buf[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(buf) and not buf[pos : pos + 1].isspace():
            pos += 1
        tokens.append(buf[start:pos])
    pos += 1  # single whitespace after maxval
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise UnsupportedFormat("non-integer PNM header field") from None
    return width, height, maxval, pos


def decode_image(data):
    """Decode PPM (P6) or PGM (P5) bytes; JPEG streams go to decode_jpeg."""
    if len(data) < 2:
        raise TruncatedStream("stream shorter than a magic number")
    magic = data[:2]
    if magic == b"\xff\xd8":
        from .jpeg import decode_jpeg

        return decode_jpeg(data)
    if magic not in (b"P5", b"P6"):
        raise UnsupportedFormat(f"unrecognized magic {magic!r}")
    width, height, maxval, offset = _read_pnm_header(data)
    if maxval != 255:
        raise UnsupportedFormat(f"only maxval 255 supported, got {maxval}")
    channels = 3 if magic == b"P6" else 1
    need = width * height * channels
    payload = data[offset : offset + need]
    if len(payload) < need:
        raise TruncatedStream(f"expected {need} sample bytes, got {len(payload)}")
    arr = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, channels)
    return TextureImage(arr.copy())


def encode_ppm(image):
    """Binary PPM (P6) bytes; grayscale input is expanded to RGB."""
    rgb = image.to_rgb()
    header = f"P6\n{rgb.width} {rgb.height}\n255\n".encode("ascii")
    return header + rgb.data.tobytes()


def encode_pgm(image):
    """Binary PGM (P5) bytes from a 1-channel image or a mask image."""
    if image.channels == 3:
        data = np.rint(image.luma()).clip(0, 255).astype(np.uint8)
    else:
        data = image.data[:, :, 0]
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    return header + data.tobytes()
