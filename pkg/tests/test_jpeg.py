import io

import numpy as np
import pytest

from meshqa.assets import TextureImage, decode_jpeg, encode_jpeg, quantization_tables
from meshqa.assets.jpeg import BASE_CHROMA_TABLE, BASE_LUMA_TABLE
from meshqa.errors import InvalidQuality, TruncatedStream, UnsupportedJpegFeature

from conftest import synthetic_photo

PIL = pytest.importorskip("PIL.Image")


def pil_decode(data):
    img = PIL.open(io.BytesIO(data)).convert("RGB")
    return np.asarray(img)


def pil_encode(arr, quality):
    buf = io.BytesIO()
    PIL.fromarray(arr).save(buf, format="JPEG", quality=quality)
    return buf.getvalue()


def test_quality_50_tables_equal_base():
    luma, chroma = quantization_tables(50)
    assert np.array_equal(luma, BASE_LUMA_TABLE)
    assert np.array_equal(chroma, BASE_CHROMA_TABLE)


def test_quality_scaling_endpoints():
    luma, _ = quantization_tables(100)
    assert luma.min() == 1 and luma.max() == 1  # scale 0 clamps to 1
    luma10, _ = quantization_tables(10)
    assert np.all(luma10 >= BASE_LUMA_TABLE)


def test_invalid_quality():
    img = TextureImage.constant(16, 16, 128)
    for q in (0, 101, 2.5):
        with pytest.raises(InvalidQuality):
            encode_jpeg(img, q)


def test_markers_and_dimensions():
    img = synthetic_photo(64, seed=1)
    data = encode_jpeg(img, 75)
    assert data[:2] == b"\xff\xd8"
    assert data[-2:] == b"\xff\xd9"
    out = decode_jpeg(data)
    assert (out.width, out.height) == (img.width, img.height)


def test_odd_dimensions_preserved():
    rng = np.random.default_rng(5)
    img = TextureImage(rng.integers(0, 256, size=(37, 51, 3), dtype=np.uint8))
    out = decode_jpeg(encode_jpeg(img, 75))
    assert (out.width, out.height) == (51, 37)


def test_uniform_midgray_q90_max_error_vs_reference():
    img = TextureImage.constant(64, 64, 119)
    data = encode_jpeg(img, 90)
    ours = decode_jpeg(data).data.astype(np.int64)
    ref = pil_decode(data).astype(np.int64)
    assert np.abs(ours - img.data.astype(np.int64)).max() <= 2
    assert np.abs(ours - ref).max() <= 2


def test_reference_decoder_agrees_on_natural_image():
    img = synthetic_photo(96, seed=2)
    data = encode_jpeg(img, 90)
    ours = decode_jpeg(data).data.astype(np.int64)
    ref = pil_decode(data).astype(np.int64)
    # identical entropy stream; differences come from IDCT/upsampling rounding
    assert np.abs(ours - ref).mean() < 2.0
    assert np.abs(ours - ref).max() <= 32


def test_decode_reference_encoder_stream():
    img = synthetic_photo(80, seed=3)
    data = pil_encode(img.data, 85)
    ours = decode_jpeg(data).data.astype(np.int64)
    ref = pil_decode(data).astype(np.int64)
    assert np.abs(ours - ref).mean() < 2.0


def test_size_monotone_in_quality_on_natural_images():
    for seed in range(3):
        img = synthetic_photo(128, seed=seed)
        sizes = [len(encode_jpeg(img, q)) for q in (90, 75, 50, 25, 10)]
        assert sizes == sorted(sizes, reverse=True)
        assert sizes[-1] < sizes[0]


def test_truncated_stream():
    img = TextureImage.constant(32, 32, 90)
    data = encode_jpeg(img, 60)
    with pytest.raises(TruncatedStream):
        decode_jpeg(data[: len(data) // 2])


def test_progressive_rejected():
    img = synthetic_photo(48, seed=4)
    buf = io.BytesIO()
    PIL.fromarray(img.data).save(buf, format="JPEG", quality=80, progressive=True)
    with pytest.raises(UnsupportedJpegFeature):
        decode_jpeg(buf.getvalue())


def test_deterministic_bytes():
    img = synthetic_photo(64, seed=6)
    assert encode_jpeg(img, 42) == encode_jpeg(img, 42)


def test_roundtrip_psnr_q90():
    img = synthetic_photo(128, seed=7)
    out = decode_jpeg(encode_jpeg(img, 90))
    mse = np.mean((out.data.astype(np.float64) - img.data.astype(np.float64)) ** 2)
    psnr = 10 * np.log10(255.0**2 / mse)
    assert psnr >= 35.0
