"""Raster containers plus PNG / binary PGM / PPM codecs.

Pixel coordinates are ``(u, v)`` = (column, row); arrays are indexed
``[v, u]``. Every container freezes its backing array on construction.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import DimensionMismatch, MalformedImage, UnsupportedFormat

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"

# Overlay colours. Gray input pixels always have R == G == B, so these two
# saturated colours can never collide with background pixels.
ORIGINAL_RGB = (0, 255, 0)
DUPLICATED_RGB = (255, 0, 0)

MASK_THRESHOLD = 127


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit single-channel raster."""

    pixels: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.pixels)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError(f"GrayImage needs a non-empty 2-D array, got shape {a.shape}")
        if a.dtype != np.uint8:
            if a.size and (a.min() < 0 or a.max() > 255):
                raise ValueError("intensities must lie in [0, 255]")
            a = a.astype(np.uint8)
        object.__setattr__(self, "pixels", _frozen(a))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)


@dataclass(frozen=True, eq=False)
class RgbImage:
    """8-bit interleaved RGB raster, shape ``(height, width, 3)``."""

    pixels: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.pixels)
        if a.ndim != 3 or a.shape[2] != 3 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError(f"RgbImage needs an (H, W, 3) array, got shape {a.shape}")
        if a.dtype != np.uint8:
            if a.size and (a.min() < 0 or a.max() > 255):
                raise ValueError("intensities must lie in [0, 255]")
            a = a.astype(np.uint8)
        object.__setattr__(self, "pixels", _frozen(a))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape[:2]

    def __eq__(self, other):
        if not isinstance(other, RgbImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Boolean raster; ``True`` marks a copy-move pixel."""

    bits: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.bits)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError(f"BinaryMask needs a non-empty 2-D array, got shape {a.shape}")
        object.__setattr__(self, "bits", _frozen(a.astype(bool)))

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.bits.shape

    def __eq__(self, other):
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)


def _sniff(data: bytes) -> str:
    if data[:8] == PNG_SIGNATURE:
        return "png"
    if data[:2] in (b"P5", b"P6"):
        return "pnm"
    raise UnsupportedFormat("only PNG and binary PGM/PPM streams are supported")


def _open(data: bytes) -> Image.Image:
    kind = _sniff(data)
    if kind == "png":
        # IHDR: 8-byte signature, 4-byte length, b"IHDR", width, height, bit depth.
        if len(data) < 33 or data[12:16] != b"IHDR":
            raise MalformedImage("PNG stream lacks a complete IHDR chunk")
        if data[24] == 16:
            raise UnsupportedFormat("16-bit PNG rasters are not supported")
    try:
        im = Image.open(io.BytesIO(data))
        im.load()
    except (OSError, SyntaxError, ValueError, EOFError) as exc:
        raise MalformedImage(str(exc)) from exc
    if im.mode in ("I", "I;16", "I;16B", "I;16L", "I;16N", "F"):
        raise UnsupportedFormat(f"{im.mode} rasters (16-bit or float) are not supported")
    return im


def decode_image(data: bytes) -> GrayImage | RgbImage:
    """Decode PNG, PGM (P5) or PPM (P6) bytes.

    Grayscale inputs come back as :class:`GrayImage`, colour inputs as
    :class:`RgbImage`. Alpha channels are dropped.
    """
    im = _open(data)
    if im.mode in ("L", "LA", "1"):
        return GrayImage(np.asarray(im.convert("L")))
    if im.mode in ("RGB", "RGBA", "P", "PA"):
        return RgbImage(np.asarray(im.convert("RGB")))
    raise UnsupportedFormat(f"unsupported pixel mode {im.mode}")


def decode_gray(data: bytes) -> GrayImage:
    """Decode any supported stream and reduce it to grayscale."""
    img = decode_image(data)
    return img if isinstance(img, GrayImage) else to_grayscale(img)


def decode_mask(data: bytes) -> BinaryMask:
    """Decode a single-channel PNG/PGM mask; values above 127 are set."""
    im = _open(data)
    if im.mode not in ("L", "1", "LA"):
        raise UnsupportedFormat(f"masks must be single-channel, got mode {im.mode}")
    return BinaryMask(np.asarray(im.convert("L")) > MASK_THRESHOLD)


def to_grayscale(img: RgbImage) -> GrayImage:
    """Luma conversion ``round(0.299 R + 0.587 G + 0.114 B)``, half rounded up.

    Integer arithmetic keeps the result bit-exact.
    """
    rgb = img.pixels.astype(np.int64)
    luma = (299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2] + 500) // 1000
    return GrayImage(np.clip(luma, 0, 255).astype(np.uint8))


def _encode(array: np.ndarray, fmt: str) -> bytes:
    buf = io.BytesIO()
    if fmt == "png":
        Image.fromarray(array).save(buf, format="PNG", compress_level=6)
    elif fmt in ("pgm", "ppm", "pnm"):
        Image.fromarray(array).save(buf, format="PPM")
    else:
        raise UnsupportedFormat(f"cannot encode format {fmt!r}")
    return buf.getvalue()


def encode_image(img: GrayImage | RgbImage, fmt: str = "png") -> bytes:
    return _encode(np.asarray(img.pixels), fmt)


def encode_mask(mask: BinaryMask, fmt: str = "png") -> bytes:
    """Masks are written as 8-bit grayscale with values exactly 0 and 255."""
    return _encode(np.where(mask.bits, 255, 0).astype(np.uint8), fmt)


def encode_overlay(img: GrayImage, original=None, duplicated=None) -> bytes:
    """Render the verdict over ``img`` as PNG bytes.

    ``original`` and ``duplicated`` are boolean pixel masks (or objects with a
    ``mask`` attribute, such as regions). Original pixels are painted
    ``ORIGINAL_RGB`` (green), duplicated pixels ``DUPLICATED_RGB`` (red). With
    no regions the grayscale input is re-encoded unchanged.
    """
    layers = [(m, c) for m, c in ((original, ORIGINAL_RGB), (duplicated, DUPLICATED_RGB)) if m is not None]
    if not layers:
        return encode_image(img)
    rgb = np.repeat(img.pixels[..., None], 3, axis=2)
    for m, colour in layers:
        bits = np.asarray(getattr(m, "mask", m), dtype=bool)
        if bits.shape != img.shape:
            raise DimensionMismatch(f"region shape {bits.shape} does not match image {img.shape}")
        rgb[bits] = colour
    return _encode(rgb, "png")
