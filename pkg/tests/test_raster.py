import io
import struct
import zlib

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from PIL import Image

from copymove.errors import DimensionMismatch, MalformedImage, UnsupportedFormat
from copymove.raster import (
    DUPLICATED_RGB,
    ORIGINAL_RGB,
    BinaryMask,
    GrayImage,
    RgbImage,
    decode_image,
    decode_mask,
    encode_image,
    encode_mask,
    encode_overlay,
    to_grayscale,
)


def pgm(w, h, payload, maxval=255):
    return f"P5 {w} {h} {maxval}\n".encode() + bytes(payload)


def test_decode_minimal_pgm():
    img = decode_image(pgm(2, 2, [0, 64, 128, 255]))
    assert isinstance(img, GrayImage)
    assert img.pixels.tolist() == [[0, 64], [128, 255]]


def test_decode_ppm_is_rgb():
    data = b"P6 1 1 255\n" + bytes([10, 20, 30])
    img = decode_image(data)
    assert isinstance(img, RgbImage)
    assert img.pixels[0, 0].tolist() == [10, 20, 30]


def _chunk(kind, body):
    return struct.pack(">I", len(body)) + kind + body + struct.pack(">I", zlib.crc32(kind + body))


def test_truncated_png_is_malformed():
    ihdr = _chunk(b"IHDR", struct.pack(">IIBBBBB", 4, 4, 8, 0, 0, 0, 0))
    with pytest.raises(MalformedImage):
        decode_image(b"\x89PNG\r\n\x1a\n" + ihdr)


def test_bad_crc_is_malformed():
    good = encode_image(GrayImage(np.arange(16, dtype=np.uint8).reshape(4, 4)))
    # flip a byte inside the IDAT payload
    i = good.index(b"IDAT") + 6
    bad = good[:i] + bytes([good[i] ^ 0xFF]) + good[i + 1:]
    with pytest.raises(MalformedImage):
        decode_image(bad)


def test_sixteen_bit_rejected():
    buf = io.BytesIO()
    Image.fromarray(np.full((3, 3), 1000, dtype=np.uint16)).save(buf, format="PNG")
    with pytest.raises(UnsupportedFormat):
        decode_image(buf.getvalue())
    with pytest.raises(UnsupportedFormat):
        decode_image(pgm(1, 1, [0, 1], maxval=65535))


def test_other_formats_rejected():
    buf = io.BytesIO()
    Image.fromarray(np.zeros((4, 4), np.uint8)).save(buf, format="JPEG")
    with pytest.raises(UnsupportedFormat):
        decode_image(buf.getvalue())
    with pytest.raises(UnsupportedFormat):
        decode_image(b"P2 1 1 255\n0\n")


@pytest.mark.parametrize("rgb, expected", [((255, 255, 255), 255), ((0, 0, 0), 0), ((255, 0, 0), 76)])
def test_grayscale_examples(rgb, expected):
    assert round(0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2]) == expected
    img = RgbImage(np.array([[rgb]], dtype=np.uint8))
    assert to_grayscale(img).pixels[0, 0] == expected


def test_grayscale_matches_float_formula_everywhere():
    rng = np.random.default_rng(3)
    px = rng.integers(0, 256, size=(64, 64, 3), dtype=np.uint8)
    got = to_grayscale(RgbImage(px)).pixels
    f = px.astype(float) @ [0.299, 0.587, 0.114]
    # float formula agrees except at exact .5 ties, where ours rounds up
    assert np.all(np.abs(got - np.floor(f + 0.5)) <= 1)
    assert np.mean(got == np.floor(f + 0.5)) > 0.99


@given(st.integers(0, 255))
def test_grayscale_idempotent_on_gray_rgb(x):
    assert to_grayscale(RgbImage(np.full((2, 2, 3), x, np.uint8))).pixels.tolist() == [[x, x], [x, x]]


def test_decode_mask_threshold():
    m = decode_mask(pgm(4, 1, [0, 127, 128, 255]))
    assert m.bits.tolist() == [[False, False, True, True]]
    assert decode_mask(pgm(2, 2, [255] * 4)).bits.all()
    assert not decode_mask(pgm(2, 2, [0] * 4)).bits.any()


def test_decode_mask_rejects_colour():
    with pytest.raises(UnsupportedFormat):
        decode_mask(b"P6 1 1 255\n" + bytes([1, 2, 3]))


def test_mask_roundtrip_random():
    rng = np.random.default_rng(11)
    for _ in range(20):
        h, w = rng.integers(1, 65, size=2)
        m = BinaryMask(rng.random((h, w)) < 0.4)
        data = encode_mask(m)
        assert set(np.unique(np.asarray(Image.open(io.BytesIO(data))))) <= {0, 255}
        assert decode_mask(data) == m
        assert decode_mask(encode_mask(m, "pgm")) == m


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 64), st.integers(1, 64), st.integers(0, 2**31 - 1))
def test_gray_roundtrip(h, w, seed):
    px = np.random.default_rng(seed).integers(0, 256, size=(h, w), dtype=np.uint8)
    img = GrayImage(px)
    assert decode_image(encode_image(img)) == img
    assert decode_image(encode_image(img, "pgm")) == img


def test_containers_are_immutable():
    img = GrayImage(np.zeros((2, 2), np.uint8))
    with pytest.raises(ValueError):
        img.pixels[0, 0] = 1
    with pytest.raises(ValueError):
        GrayImage(np.full((2, 2), 300))


def test_overlay_empty_is_plain_reencode():
    img = GrayImage(np.arange(20, dtype=np.uint8).reshape(4, 5))
    out = encode_overlay(img)
    assert out == encode_image(img)
    assert decode_image(out) == img


def test_overlay_deterministic_and_counts():
    rng = np.random.default_rng(5)
    img = GrayImage(rng.integers(0, 256, size=(40, 50), dtype=np.uint8))
    orig = np.zeros(img.shape, bool)
    orig[3:10, 4:12] = True
    dup = np.zeros(img.shape, bool)
    dup[20:31, 30:33] = True
    a = encode_overlay(img, orig, dup)
    assert a == encode_overlay(img, orig, dup)
    rgb = decode_image(a).pixels
    assert np.all(rgb == ORIGINAL_RGB, axis=2).sum() == orig.sum() == 56
    assert np.all(rgb == DUPLICATED_RGB, axis=2).sum() == dup.sum() == 33


def test_overlay_dimension_mismatch():
    img = GrayImage(np.zeros((4, 4), np.uint8))
    with pytest.raises(DimensionMismatch):
        encode_overlay(img, np.ones((3, 4), bool))
