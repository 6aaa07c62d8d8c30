"""Baseline sequential JFIF JPEG codec (8x8 DCT, 4:2:0, standard tables).

Encoding uses the classic quality scaling of the base quantization tables:
scale = 5000/q for q < 50 else 200 - 2q, entries floor((t*scale + 50)/100)
clamped to [1, 255]. The decoder accepts baseline Huffman streams (including
restart markers); progressive and arithmetic-coded streams are rejected.
"""

import struct

import numpy as np
from scipy.fft import dctn, idctn

from .image import TextureImage
from ..errors import InvalidQuality, TruncatedStream, UnsupportedFormat, UnsupportedJpegFeature

BASE_LUMA_TABLE = np.array(
    [
        [16, 11, 10, 16, 24, 40, 51, 61],
        [12, 12, 14, 19, 26, 58, 60, 55],
        [14, 13, 16, 24, 40, 57, 69, 56],
        [14, 17, 22, 29, 51, 87, 80, 62],
        [18, 22, 37, 56, 68, 109, 103, 77],
        [24, 35, 55, 64, 81, 104, 113, 92],
        [49, 64, 78, 87, 103, 121, 120, 101],
        [72, 92, 95, 98, 112, 100, 103, 99],
    ],
    dtype=np.int64,
)

BASE_CHROMA_TABLE = np.array(
    [
        [17, 18, 24, 47, 99, 99, 99, 99],
        [18, 21, 26, 66, 99, 99, 99, 99],
        [24, 26, 56, 99, 99, 99, 99, 99],
        [47, 66, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
    ],
    dtype=np.int64,
)

# Zig-zag scan order as (row, col) index arrays.
_ZZ = np.array(
    [
        0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5,
        12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6, 7, 14, 21, 28,
        35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
        58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
    ]
)
_ZZ_ROWS = _ZZ // 8
_ZZ_COLS = _ZZ % 8
_UNZZ = np.argsort(_ZZ)

# Standard Huffman table definitions: (bits per code length 1..16, symbols).
_DC_LUMA_BITS = [0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0]
_DC_LUMA_VALS = list(range(12))
_DC_CHROMA_BITS = [0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0]
_DC_CHROMA_VALS = list(range(12))
_AC_LUMA_BITS = [0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7D]
_AC_LUMA_VALS = [
    0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12,
    0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61, 0x07,
    0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xA1, 0x08,
    0x23, 0x42, 0xB1, 0xC1, 0x15, 0x52, 0xD1, 0xF0,
    0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0A, 0x16,
    0x17, 0x18, 0x19, 0x1A, 0x25, 0x26, 0x27, 0x28,
    0x29, 0x2A, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39,
    0x3A, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49,
    0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59,
    0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69,
    0x6A, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79,
    0x7A, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
    0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98,
    0x99, 0x9A, 0xA2, 0xA3, 0xA4, 0xA5, 0xA6, 0xA7,
    0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4, 0xB5, 0xB6,
    0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5,
    0xC6, 0xC7, 0xC8, 0xC9, 0xCA, 0xD2, 0xD3, 0xD4,
    0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA, 0xE1, 0xE2,
    0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA,
    0xF1, 0xF2, 0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8,
    0xF9, 0xFA,
]
_AC_CHROMA_BITS = [0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 0x77]
_AC_CHROMA_VALS = [
    0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21,
    0x31, 0x06, 0x12, 0x41, 0x51, 0x07, 0x61, 0x71,
    0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91,
    0xA1, 0xB1, 0xC1, 0x09, 0x23, 0x33, 0x52, 0xF0,
    0x15, 0x62, 0x72, 0xD1, 0x0A, 0x16, 0x24, 0x34,
    0xE1, 0x25, 0xF1, 0x17, 0x18, 0x19, 0x1A, 0x26,
    0x27, 0x28, 0x29, 0x2A, 0x35, 0x36, 0x37, 0x38,
    0x39, 0x3A, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48,
    0x49, 0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58,
    0x59, 0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68,
    0x69, 0x6A, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78,
    0x79, 0x7A, 0x82, 0x83, 0x84, 0x85, 0x86, 0x87,
    0x88, 0x89, 0x8A, 0x92, 0x93, 0x94, 0x95, 0x96,
    0x97, 0x98, 0x99, 0x9A, 0xA2, 0xA3, 0xA4, 0xA5,
    0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4,
    0xB5, 0xB6, 0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3,
    0xC4, 0xC5, 0xC6, 0xC7, 0xC8, 0xC9, 0xCA, 0xD2,
    0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA,
    0xE2, 0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9,
    0xEA, 0xF2, 0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8,
    0xF9, 0xFA,
]


def quantization_tables(quality):
    """Scaled (luma, chroma) quantization tables for a quality in [1, 100]."""
    if not isinstance(quality, (int, np.integer)) or not 1 <= quality <= 100:
        raise InvalidQuality(f"quality must be an integer in [1,100], got {quality!r}")
    scale = 5000 // quality if quality < 50 else 200 - 2 * quality
    luma = np.clip((BASE_LUMA_TABLE * scale + 50) // 100, 1, 255)
    chroma = np.clip((BASE_CHROMA_TABLE * scale + 50) // 100, 1, 255)
    return luma.astype(np.int64), chroma.astype(np.int64)


def _build_codes(bits, values):
    """Canonical Huffman: symbol -> (code, length)."""
    codes = {}
    code = 0
    k = 0
    for length in range(1, 17):
        for _ in range(bits[length - 1]):
            codes[values[k]] = (code, length)
            code += 1
            k += 1
        code <<= 1
    return codes


_ENC_DC = (_build_codes(_DC_LUMA_BITS, _DC_LUMA_VALS), _build_codes(_DC_CHROMA_BITS, _DC_CHROMA_VALS))
_ENC_AC = (_build_codes(_AC_LUMA_BITS, _AC_LUMA_VALS), _build_codes(_AC_CHROMA_BITS, _AC_CHROMA_VALS))


class _BitWriter:
    def __init__(self):
        self.out = bytearray()
        self.acc = 0
        self.nbits = 0

    def write(self, code, length):
        self.acc = (self.acc << length) | (code & ((1 << length) - 1))
        self.nbits += length
        while self.nbits >= 8:
            self.nbits -= 8
            byte = (self.acc >> self.nbits) & 0xFF
            self.out.append(byte)
            if byte == 0xFF:
                self.out.append(0x00)
        self.acc &= (1 << self.nbits) - 1

    def flush(self):
        if self.nbits:
            pad = 8 - self.nbits
            self.write((1 << pad) - 1, pad)


def _magnitude(value):
    # (size, amplitude bits) per the baseline coding of signed coefficients
    if value == 0:
        return 0, 0
    size = int(value if value > 0 else -value).bit_length()
    bits = value if value > 0 else value + (1 << size) - 1
    return size, bits


def _rgb_to_ycbcr(rgb):
    rgb = rgb.astype(np.float64)
    r, g, b = rgb[:, :, 0], rgb[:, :, 1], rgb[:, :, 2]
    y = 0.299 * r + 0.587 * g + 0.114 * b
    cb = -0.168736 * r - 0.331264 * g + 0.5 * b + 128.0
    cr = 0.5 * r - 0.418688 * g - 0.081312 * b + 128.0
    return y, cb, cr


def _ycbcr_to_rgb(y, cb, cr):
    cb = cb - 128.0
    cr = cr - 128.0
    r = y + 1.402 * cr
    g = y - 0.344136 * cb - 0.714136 * cr
    b = y + 1.772 * cb
    return np.clip(np.stack([r, g, b], axis=2), 0, 255).astype(np.uint8)


def _pad_to(plane, multiple):
    h, w = plane.shape
    ph = (-h) % multiple
    pw = (-w) % multiple
    if ph or pw:
        plane = np.pad(plane, ((0, ph), (0, pw)), mode="edge")
    return plane


def _plane_to_quantized_blocks(plane, table):
    """(H, W) float plane -> (n_by, n_bx, 64) int32 zig-zag quantized blocks."""
    h, w = plane.shape
    blocks = plane.reshape(h // 8, 8, w // 8, 8).transpose(0, 2, 1, 3) - 128.0
    coeffs = dctn(blocks, axes=(2, 3), norm="ortho")
    q = np.rint(coeffs / table).astype(np.int32)
    return q[:, :, _ZZ_ROWS, _ZZ_COLS]


def _encode_block(writer, zz, prev_dc, dc_codes, ac_codes):
    diff = int(zz[0]) - prev_dc
    size, bits = _magnitude(diff)
    code, length = dc_codes[size]
    writer.write(code, length)
    if size:
        writer.write(bits, size)
    run = 0
    last_nz = 0
    nz = np.nonzero(zz[1:])[0]
    last_nz = nz[-1] + 1 if len(nz) else 0
    for k in range(1, last_nz + 1):
        v = int(zz[k])
        if v == 0:
            run += 1
            continue
        while run > 15:
            code, length = ac_codes[0xF0]  # ZRL
            writer.write(code, length)
            run -= 16
        size, bits = _magnitude(v)
        code, length = ac_codes[(run << 4) | size]
        writer.write(code, length)
        writer.write(bits, size)
        run = 0
    if last_nz < 63:
        code, length = ac_codes[0x00]  # EOB
        writer.write(code, length)
    return int(zz[0])


def _segment(marker, payload):
    return struct.pack(">BBH", 0xFF, marker, 2 + len(payload)) + payload


def encode_jpeg(image, quality):
    """Encode a 3-channel image as baseline JFIF JPEG with 4:2:0 chroma."""
    luma_t, chroma_t = quantization_tables(quality)
    if image.channels != 3:
        raise UnsupportedFormat("encode_jpeg expects a 3-channel sRGB image")
    h, w = image.height, image.width

    y, cb, cr = _rgb_to_ycbcr(image.data)
    y = _pad_to(y, 16)
    cb = _pad_to(cb, 16)
    cr = _pad_to(cr, 16)
    # 4:2:0 chroma: 2x2 box average on the padded planes
    cb = cb.reshape(cb.shape[0] // 2, 2, cb.shape[1] // 2, 2).mean(axis=(1, 3))
    cr = cr.reshape(cr.shape[0] // 2, 2, cr.shape[1] // 2, 2).mean(axis=(1, 3))

    yb = _plane_to_quantized_blocks(y, luma_t)
    cbb = _plane_to_quantized_blocks(cb, chroma_t)
    crb = _plane_to_quantized_blocks(cr, chroma_t)

    writer = _BitWriter()
    dc = [0, 0, 0]
    mcus_y, mcus_x = cbb.shape[0], cbb.shape[1]
    for my in range(mcus_y):
        for mx in range(mcus_x):
            for by in (0, 1):
                for bx in (0, 1):
                    dc[0] = _encode_block(
                        writer, yb[2 * my + by, 2 * mx + bx], dc[0], _ENC_DC[0], _ENC_AC[0]
                    )
            dc[1] = _encode_block(writer, cbb[my, mx], dc[1], _ENC_DC[1], _ENC_AC[1])
            dc[2] = _encode_block(writer, crb[my, mx], dc[2], _ENC_DC[1], _ENC_AC[1])
    writer.flush()

    out = bytearray(b"\xff\xd8")  # SOI
    out += _segment(0xE0, b"JFIF\x00\x01\x01\x00\x00\x01\x00\x01\x00\x00")
    dqt = b"\x00" + bytes(int(v) for v in luma_t.flatten()[_ZZ])
    dqt += b"\x01" + bytes(int(v) for v in chroma_t.flatten()[_ZZ])
    out += _segment(0xDB, dqt)
    sof = struct.pack(">BHHB", 8, h, w, 3)
    sof += bytes([1, 0x22, 0]) + bytes([2, 0x11, 1]) + bytes([3, 0x11, 1])
    out += _segment(0xC0, sof)
    dht = b""
    for cls, dest, bits, vals in (
        (0, 0, _DC_LUMA_BITS, _DC_LUMA_VALS),
        (1, 0, _AC_LUMA_BITS, _AC_LUMA_VALS),
        (0, 1, _DC_CHROMA_BITS, _DC_CHROMA_VALS),
        (1, 1, _AC_CHROMA_BITS, _AC_CHROMA_VALS),
    ):
        dht += bytes([(cls << 4) | dest]) + bytes(bits) + bytes(vals)
    out += _segment(0xC4, dht)
    sos = bytes([3, 1, 0x00, 2, 0x11, 3, 0x11, 0, 63, 0])
    out += _segment(0xDA, sos)
    out += writer.out
    out += b"\xff\xd9"  # EOI
    return bytes(out)


# --- decoder -----------------------------------------------------------------


class _BitReader:
    def __init__(self, data, pos):
        self.data = data
        self.pos = pos
        self.acc = 0
        self.nbits = 0
        self.marker = None  # set when a non-stuffing marker interrupts the scan

    def _fill(self):
        if self.pos >= len(self.data):
            raise TruncatedStream("entropy stream ended early")
        byte = self.data[self.pos]
        self.pos += 1
        if byte == 0xFF:
            if self.pos >= len(self.data):
                raise TruncatedStream("dangling 0xFF at end of stream")
            nxt = self.data[self.pos]
            if nxt == 0x00:
                self.pos += 1
            else:
                self.marker = nxt
                raise _ScanInterrupt()
        self.acc = (self.acc << 8) | byte
        self.nbits += 8

    def read_bit(self):
        if self.nbits == 0:
            self._fill()
        self.nbits -= 1
        return (self.acc >> self.nbits) & 1

    def read_bits(self, n):
        v = 0
        for _ in range(n):
            v = (v << 1) | self.read_bit()
        return v

    def align_and_sync(self):
        # drop residual bits and consume an RST marker
        self.nbits = 0
        self.acc = 0
        while self.pos + 1 < len(self.data):
            if self.data[self.pos] == 0xFF and self.data[self.pos + 1] != 0x00:
                marker = self.data[self.pos + 1]
                self.pos += 2
                return marker
            self.pos += 1
        raise TruncatedStream("expected restart marker")


class _ScanInterrupt(Exception):
    pass


def _build_decode_map(bits, values):
    table = {}
    code = 0
    k = 0
    for length in range(1, 17):
        for _ in range(bits[length - 1]):
            table[(length, code)] = values[k]
            code += 1
            k += 1
        code <<= 1
    return table


def _read_symbol(reader, table):
    code = 0
    for length in range(1, 17):
        code = (code << 1) | reader.read_bit()
        sym = table.get((length, code))
        if sym is not None:
            return sym
    raise UnsupportedFormat("invalid Huffman code in stream")


def _extend(bits, size):
    if size == 0:
        return 0
    if bits < (1 << (size - 1)):
        return bits - (1 << size) + 1
    return bits


def _decode_block(reader, dc_table, ac_table, prev_dc):
    zz = np.zeros(64, dtype=np.int32)
    size = _read_symbol(reader, dc_table)
    diff = _extend(reader.read_bits(size), size) if size else 0
    dc = prev_dc + diff
    zz[0] = dc
    k = 1
    while k < 64:
        sym = _read_symbol(reader, ac_table)
        if sym == 0x00:  # EOB
            break
        run = sym >> 4
        size = sym & 0x0F
        if size == 0:
            if run != 15:
                raise UnsupportedFormat(f"bad AC symbol {sym:#x}")
            k += 16  # ZRL
            continue
        k += run
        if k > 63:
            raise UnsupportedFormat("AC run overflows block")
        zz[k] = _extend(reader.read_bits(size), size)
        k += 1
    return zz, dc


def decode_jpeg(data):
    """Decode baseline JFIF JPEG bytes into a TextureImage."""
    if len(data) < 4 or data[0:2] != b"\xff\xd8":
        raise UnsupportedFormat("missing SOI marker")
    pos = 2
    qtables = {}
    dc_maps = {}
    ac_maps = {}
    frame = None
    restart_interval = 0

    while True:
        if pos + 4 > len(data):
            raise TruncatedStream("marker stream ended early")
        if data[pos] != 0xFF:
            raise UnsupportedFormat(f"expected marker at byte {pos}")
        marker = data[pos + 1]
        pos += 2
        if marker == 0xD9:  # EOI with no scan
            raise TruncatedStream("no scan data before EOI")
        if marker in (0xC1,):  # extended sequential, still baseline Huffman
            marker = 0xC0
        if marker in (0xC2, 0xC6, 0xCA, 0xCE):
            raise UnsupportedJpegFeature("progressive JPEG is not supported")
        if marker in (0xC3, 0xC5, 0xC7, 0xCB, 0xCF):
            raise UnsupportedJpegFeature("non-sequential JPEG is not supported")
        if marker in (0xC9, 0xCD):
            raise UnsupportedJpegFeature("arithmetic coding is not supported")
        (length,) = struct.unpack(">H", data[pos : pos + 2])
        payload = data[pos + 2 : pos + length]
        if len(payload) != length - 2:
            raise TruncatedStream("segment payload ended early")
        body_start = pos + length
        if marker == 0xDB:  # DQT
            p = 0
            while p < len(payload):
                pq = payload[p] >> 4
                tq = payload[p] & 0x0F
                p += 1
                if pq == 0:
                    vals = np.frombuffer(payload[p : p + 64], dtype=np.uint8).astype(np.int64)
                    p += 64
                else:
                    vals = np.frombuffer(payload[p : p + 128], dtype=">u2").astype(np.int64)
                    p += 128
                qtables[tq] = vals[_UNZZ].reshape(8, 8)
        elif marker == 0xC4:  # DHT
            p = 0
            while p < len(payload):
                cls = payload[p] >> 4
                dest = payload[p] & 0x0F
                bits = list(payload[p + 1 : p + 17])
                n = sum(bits)
                vals = list(payload[p + 17 : p + 17 + n])
                p += 17 + n
                if cls == 0:
                    dc_maps[dest] = _build_decode_map(bits, vals)
                else:
                    ac_maps[dest] = _build_decode_map(bits, vals)
        elif marker == 0xC0:  # SOF0 baseline
            precision, height, width, ncomp = struct.unpack(">BHHB", payload[:6])
            if precision != 8:
                raise UnsupportedJpegFeature(f"{precision}-bit samples not supported")
            comps = []
            for i in range(ncomp):
                cid, sampling, tq = payload[6 + 3 * i : 9 + 3 * i]
                comps.append({"id": cid, "h": sampling >> 4, "v": sampling & 0x0F, "tq": tq})
            frame = {"w": width, "h": height, "comps": comps}
        elif marker == 0xDD:  # DRI
            (restart_interval,) = struct.unpack(">H", payload[:2])
        elif marker == 0xDA:  # SOS
            if frame is None:
                raise UnsupportedFormat("SOS before SOF")
            ns = payload[0]
            scan = []
            for i in range(ns):
                cs, tables = payload[1 + 2 * i : 3 + 2 * i]
                comp = next(c for c in frame["comps"] if c["id"] == cs)
                scan.append((comp, tables >> 4, tables & 0x0F))
            return _decode_scan(data, body_start, frame, scan, qtables, dc_maps, ac_maps, restart_interval)
        pos = body_start


def _decode_scan(data, pos, frame, scan, qtables, dc_maps, ac_maps, restart_interval):
    max_h = max(c["h"] for c, _, _ in scan)
    max_v = max(c["v"] for c, _, _ in scan)
    w, h = frame["w"], frame["h"]
    mcus_x = -(-w // (8 * max_h))
    mcus_y = -(-h // (8 * max_v))

    planes = []
    for comp, _, _ in scan:
        pw = mcus_x * comp["h"] * 8
        ph = mcus_y * comp["v"] * 8
        planes.append(np.zeros((ph // 8, pw // 8, 64), dtype=np.int32))

    reader = _BitReader(data, pos)
    dc = [0] * len(scan)
    mcu_count = 0
    try:
        for my in range(mcus_y):
            for mx in range(mcus_x):
                if restart_interval and mcu_count and mcu_count % restart_interval == 0:
                    marker = reader.align_and_sync()
                    if not 0xD0 <= marker <= 0xD7:
                        raise UnsupportedFormat(f"expected RST marker, got {marker:#x}")
                    dc = [0] * len(scan)
                for ci, (comp, dct, act) in enumerate(scan):
                    for by in range(comp["v"]):
                        for bx in range(comp["h"]):
                            zz, dc[ci] = _decode_block(reader, dc_maps[dct], ac_maps[act], dc[ci])
                            planes[ci][my * comp["v"] + by, mx * comp["h"] + bx] = zz
                mcu_count += 1
    except _ScanInterrupt:
        raise TruncatedStream("scan interrupted by marker before last MCU") from None

    out_planes = []
    for ci, (comp, _, _) in enumerate(scan):
        q = qtables[comp["tq"]]
        blocks = planes[ci][:, :, _UNZZ].reshape(planes[ci].shape[0], planes[ci].shape[1], 8, 8)
        pix = idctn(blocks * q, axes=(2, 3), norm="ortho") + 128.0
        nby, nbx = pix.shape[0], pix.shape[1]
        plane = pix.transpose(0, 2, 1, 3).reshape(nby * 8, nbx * 8)
        # upsample to full frame resolution by sample replication
        ry, rx = max_v // comp["v"], max_h // comp["h"]
        if ry > 1 or rx > 1:
            plane = np.repeat(np.repeat(plane, ry, axis=0), rx, axis=1)
        out_planes.append(plane[:h, :w])

    if len(out_planes) == 1:
        gray = np.clip(out_planes[0], 0, 255).astype(np.uint8)
        return TextureImage(gray[:, :, None])
    if len(out_planes) != 3:
        raise UnsupportedJpegFeature(f"{len(out_planes)}-component scans not supported")
    return TextureImage(_ycbcr_to_rgb(out_planes[0], out_planes[1], out_planes[2]))
