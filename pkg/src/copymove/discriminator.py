"""Decide which region of a copy-move pair is the pasted one.

Each radius compares the spread of the boundary-band LBP histograms of the two
regions: feathering the pasted contour flattens its histogram, so the region
with the smaller standard deviation gets the vote. Two concurring radii out of
three settle the verdict.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyBand, ImageTooSmall
from .lbp import LbpConfig, LbpMap, compute_lbp
from .raster import BinaryMask, GrayImage
from .regions import MIN_AREA, BoundaryBand, RegionPair, boundary_band, connected_components, select_pair

A_FORGED = "A_forged"
B_FORGED = "B_forged"
ABSTAIN = "abstain"
UNDECIDED = "undecided"

VOTES = (A_FORGED, B_FORGED, ABSTAIN)


@dataclass(frozen=True)
class DiscriminatorConfig:
    radii: tuple[float, ...] = (2.0, 3.0, 4.0)
    neighbors: int = 8
    band_width: int = 4
    tie_tolerance: float = 1e-9
    min_area: int = MIN_AREA
    quorum: int = 2

    def __post_init__(self):
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        if not self.radii:
            raise ValueError("at least one radius is required")


@dataclass(frozen=True, eq=False)
class LbpHistogram:
    bins: np.ndarray
    total: int

    @classmethod
    def from_counts(cls, counts) -> LbpHistogram:
        bins = np.asarray(counts, dtype=np.int64)
        total = int(bins.sum())
        if total < 1:
            raise EmptyBand("histogram has no samples")
        return cls(bins, total)

    @property
    def normalized(self) -> np.ndarray:
        return self.bins / self.total


@dataclass(frozen=True)
class RadiusDecision:
    radius: float
    std_a: float | None
    std_b: float | None
    vote: str
    reason: str | None = None

    def to_dict(self) -> dict:
        d = {"R": self.radius, "std_a": self.std_a, "std_b": self.std_b, "vote": self.vote}
        if self.reason is not None:
            d["reason"] = self.reason
        return d


@dataclass(frozen=True)
class Verdict:
    decisions: tuple[RadiusDecision, ...]
    final: str
    margin: float
    band_width: int
    neighbors: int
    regions: dict | None = field(default=None, compare=False)

    def to_dict(self) -> dict:
        d = {
            "final": self.final,
            "per_radius": [x.to_dict() for x in self.decisions],
            "margin": self.margin,
            "band_width": self.band_width,
            "P": self.neighbors,
        }
        if self.regions is not None:
            d["regions"] = self.regions
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def band_histogram(lbp: LbpMap, band: BoundaryBand) -> LbpHistogram:
    """Occurrence count of every LBP code over the band pixels."""
    if not band.mask.any():
        raise EmptyBand(f"band of region {band.owner} is empty")
    if (band.mask & ~lbp.valid).any():
        raise ValueError("band reaches into the LBP border margin; clip it with ceil(R)")
    codes = lbp.codes[band.mask].astype(np.int64)
    return LbpHistogram.from_counts(np.bincount(codes, minlength=lbp.config.n_codes))


def hist_std(h: LbpHistogram) -> float:
    """Sample standard deviation (n - 1 denominator) of the bin frequencies.

    Frequencies sum to one, so their mean is exactly ``1 / n``. ``fsum`` makes
    the result independent of bin order.
    """
    q = h.normalized
    n = q.size
    dev = q - 1.0 / n
    return math.sqrt(math.fsum((dev * dev).tolist()) / (n - 1))


def vote_for(std_a: float, std_b: float, tau: float) -> str:
    if std_a < std_b - tau:
        return A_FORGED
    if std_b < std_a - tau:
        return B_FORGED
    return ABSTAIN


def combine_votes(votes: Sequence[str], quorum: int = 2) -> str:
    """Majority rule: ``quorum`` concurring votes name the forged region."""
    a = sum(v == A_FORGED for v in votes)
    b = sum(v == B_FORGED for v in votes)
    if a >= quorum and a > b:
        return A_FORGED
    if b >= quorum and b > a:
        return B_FORGED
    return UNDECIDED


def decide_radius(img: GrayImage, pair: RegionPair, mask, radius: float,
                  neighbors: int = 8, w: int = 4, tau: float = 1e-9,
                  lbp: LbpMap | None = None) -> RadiusDecision:
    cfg = LbpConfig(neighbors, radius)
    if lbp is None:
        lbp = compute_lbp(img, cfg)
    stds, reasons = [], []
    for own, other in ((pair.a, pair.b), (pair.b, pair.a)):
        try:
            band = boundary_band(own, mask, w, clip_margin=cfg.margin, other=other)
        except EmptyBand as exc:
            stds.append(None)
            reasons.append(f"EmptyBand: {exc}")
            continue
        stds.append(hist_std(band_histogram(lbp, band)))
    std_a, std_b = stds
    if std_a is None or std_b is None:
        return RadiusDecision(float(radius), std_a, std_b, ABSTAIN, "; ".join(reasons))
    return RadiusDecision(float(radius), std_a, std_b, vote_for(std_a, std_b, tau))


def discriminate_pair(img: GrayImage, pair: RegionPair, mask,
                      cfg: DiscriminatorConfig = DiscriminatorConfig(),
                      workers: int = 1) -> Verdict:
    def run(r):
        return decide_radius(img, pair, mask, r, cfg.neighbors, cfg.band_width, cfg.tie_tolerance)

    if workers > 1 and len(cfg.radii) > 1:
        with ThreadPoolExecutor(workers) as pool:
            decisions = tuple(pool.map(run, cfg.radii))
    else:
        decisions = tuple(run(r) for r in cfg.radii)

    final = combine_votes([d.vote for d in decisions], cfg.quorum)
    margin = 0.0
    for d in decisions:
        if d.vote == A_FORGED:
            margin += d.std_b - d.std_a
        elif d.vote == B_FORGED:
            margin += d.std_a - d.std_b
    regions = {"A": pair.a.summary(), "B": pair.b.summary()}
    return Verdict(decisions, final, margin, cfg.band_width, cfg.neighbors, regions)


def discriminate(img: GrayImage, mask: BinaryMask,
                 cfg: DiscriminatorConfig = DiscriminatorConfig(),
                 workers: int = 1) -> Verdict:
    """Full pipeline: mask -> region pair -> per-radius votes -> verdict."""
    if mask.shape != img.shape:
        raise DimensionMismatch(f"mask {mask.shape} does not match image {img.shape}")
    margin = max(math.ceil(r) for r in cfg.radii)
    h, w = img.shape
    if h <= 2 * margin or w <= 2 * margin:
        raise ImageTooSmall(f"{w}x{h} image is too small for radius {max(cfg.radii)}")
    pair = select_pair(connected_components(mask, cfg.min_area))
    return discriminate_pair(img, pair, mask, cfg, workers)


def flip(label: str) -> str:
    return {A_FORGED: B_FORGED, B_FORGED: A_FORGED}.get(label, label)


def pair_histograms(img: GrayImage, pair: RegionPair, mask, radius: float,
                    neighbors: int = 8, w: int = 4) -> tuple[LbpHistogram, LbpHistogram]:
    """Boundary-band histograms of both regions at one radius (raises EmptyBand)."""
    cfg = LbpConfig(neighbors, radius)
    lbp = compute_lbp(img, cfg)
    return tuple(
        band_histogram(lbp, boundary_band(own, mask, w, clip_margin=cfg.margin, other=other))
        for own, other in ((pair.a, pair.b), (pair.b, pair.a))
    )
