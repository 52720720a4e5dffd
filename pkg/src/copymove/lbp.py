"""Circular local binary patterns with bilinear neighbour sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ImageTooSmall, OffsetWouldClip
from .raster import GrayImage

# Interpolated differences are weighted sums of integer differences; a
# non-zero true value is many orders of magnitude above this, so anything
# smaller is float noise around an exact tie and counts as >= 0.
TIE_EPS = 1e-9

# Neighbour offsets this close to an integer are exact pixel hits.
_SNAP_EPS = 1e-10


@dataclass(frozen=True)
class LbpConfig:
    neighbors: int = 8
    radius: float = 1.0

    def __post_init__(self):
        if not 1 <= self.neighbors <= 16:
            raise ValueError(f"neighbors must be in [1, 16], got {self.neighbors}")
        if not self.radius >= 1:
            raise ValueError(f"radius must be >= 1, got {self.radius}")

    @property
    def margin(self) -> int:
        return math.ceil(self.radius)

    @property
    def n_codes(self) -> int:
        return 1 << self.neighbors


@dataclass(frozen=True, eq=False)
class LbpMap:
    """Per-pixel codes; pixels within ``margin`` of a border are invalid and hold 0."""

    codes: np.ndarray
    config: LbpConfig

    @property
    def margin(self) -> int:
        return self.config.margin

    @property
    def width(self) -> int:
        return self.codes.shape[1]

    @property
    def height(self) -> int:
        return self.codes.shape[0]

    @property
    def valid(self) -> np.ndarray:
        m = self.margin
        v = np.zeros(self.codes.shape, dtype=bool)
        v[m:self.height - m, m:self.width - m] = True
        return v

    def is_valid(self, u: int, v: int) -> bool:
        m = self.margin
        return m <= u < self.width - m and m <= v < self.height - m


def _snap(x: float) -> float:
    r = round(x)
    return float(r) if abs(x - r) < _SNAP_EPS else x


def neighbor_offsets(cfg: LbpConfig) -> list[tuple[float, float]]:
    """``(du, dv)`` of each sample point.

    Neighbour ``p`` sits at angle ``2 pi p / P`` measured counter-clockwise
    from the +x axis as displayed, so ``dv`` is negated (rows grow downwards).
    """
    out = []
    for p in range(cfg.neighbors):
        theta = 2.0 * math.pi * p / cfg.neighbors
        out.append((_snap(cfg.radius * math.cos(theta)), _snap(-cfg.radius * math.sin(theta))))
    return out


def compute_lbp(img: GrayImage, cfg: LbpConfig) -> LbpMap:
    m = cfg.margin
    h, w = img.shape
    if h <= 2 * m or w <= 2 * m:
        raise ImageTooSmall(f"{w}x{h} image has no valid pixel at radius {cfg.radius}")

    g = img.pixels.astype(np.float64)
    center = g[m:h - m, m:w - m]
    codes = np.zeros(center.shape, dtype=np.int64)

    def shifted(dv: int, du: int) -> np.ndarray:
        return g[m + dv:h - m + dv, m + du:w - m + du]

    for p, (du, dv) in enumerate(neighbor_offsets(cfg)):
        u0, v0 = math.floor(du), math.floor(dv)
        fu, fv = du - u0, dv - v0
        # diff = sum_k weight_k * (corner_k - center); zero-weight corners are
        # skipped so exact hits never read past the valid window.
        diff = (1.0 - fu) * (1.0 - fv) * (shifted(v0, u0) - center)
        if fu > 0:
            diff = diff + fu * (1.0 - fv) * (shifted(v0, u0 + 1) - center)
        if fv > 0:
            diff = diff + (1.0 - fu) * fv * (shifted(v0 + 1, u0) - center)
        if fu > 0 and fv > 0:
            diff = diff + fu * fv * (shifted(v0 + 1, u0 + 1) - center)
        codes |= (diff >= -TIE_EPS).astype(np.int64) << p

    dtype = np.uint8 if cfg.neighbors <= 8 else np.uint16
    full = np.zeros((h, w), dtype=dtype)
    full[m:h - m, m:w - m] = codes
    full.setflags(write=False)
    return LbpMap(full, cfg)


def lbp_shift_check(img: GrayImage, offset: int, cfg: LbpConfig | None = None) -> bool:
    """True when adding ``offset`` to every pixel leaves the code map unchanged."""
    cfg = cfg or LbpConfig(8, 1.0)
    lo, hi = int(img.pixels.min()), int(img.pixels.max())
    if hi + offset > 255 or lo + offset < 0:
        raise OffsetWouldClip(f"offset {offset} would clip intensities in [{lo}, {hi}]")
    shifted = GrayImage(img.pixels.astype(np.int16) + offset)
    return np.array_equal(compute_lbp(img, cfg).codes, compute_lbp(shifted, cfg).codes)


def lbp_to_gray(lbp: LbpMap) -> GrayImage:
    """Debug rendering: codes as intensities (rescaled when P > 8), margin = 0."""
    codes = lbp.codes.astype(np.int64)
    if lbp.config.neighbors > 8:
        codes = codes * 255 // (lbp.config.n_codes - 1)
    return GrayImage(codes.astype(np.uint8))
