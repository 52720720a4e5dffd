"""Mask components, 3x3 binary morphology and contour bands."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage as ndi

from .errors import EmptyBand, NotEnoughRegions
from .raster import BinaryMask

SQUARE = np.ones((3, 3), dtype=bool)
MIN_AREA = 64


@dataclass(frozen=True, eq=False)
class Region:
    """One 8-connected mask component, stored as a full-size boolean raster."""

    label: int
    mask: np.ndarray

    def __post_init__(self):
        m = np.ascontiguousarray(self.mask, dtype=bool)
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)

    @property
    def area(self) -> int:
        return int(self.mask.sum())

    @property
    def bbox(self) -> tuple[int, int, int, int]:
        """``(u_min, v_min, u_max, v_max)``, inclusive."""
        vs, us = np.nonzero(self.mask)
        return int(us.min()), int(vs.min()), int(us.max()), int(vs.max())

    @property
    def centroid(self) -> tuple[float, float]:
        vs, us = np.nonzero(self.mask)
        return float(us.mean()), float(vs.mean())

    @property
    def first_pixel(self) -> tuple[int, int]:
        """First pixel in raster order, as ``(v, u)``."""
        flat = int(np.argmax(self.mask.ravel()))
        return divmod(flat, self.mask.shape[1])

    def pixels(self) -> set[tuple[int, int]]:
        vs, us = np.nonzero(self.mask)
        return set(zip(us.tolist(), vs.tolist()))

    def relabeled(self, label: int) -> Region:
        return Region(label, self.mask)

    def summary(self) -> dict:
        cu, cv = self.centroid
        return {"label": self.label, "area": self.area, "bbox": list(self.bbox),
                "centroid": [round(cu, 3), round(cv, 3)]}


@dataclass(frozen=True)
class RegionPair:
    a: Region
    b: Region

    def __post_init__(self):
        if self.a.label == self.b.label:
            raise ValueError("paired regions need distinct labels")
        if (self.a.mask & self.b.mask).any():
            raise ValueError("paired regions overlap")

    def swapped(self) -> RegionPair:
        return RegionPair(self.b, self.a)


@dataclass(frozen=True, eq=False)
class BoundaryBand:
    owner: int
    mask: np.ndarray
    width: int

    @property
    def area(self) -> int:
        return int(self.mask.sum())

    def pixels(self) -> set[tuple[int, int]]:
        vs, us = np.nonzero(self.mask)
        return set(zip(us.tolist(), vs.tolist()))


def _bits(x) -> np.ndarray:
    if isinstance(x, BinaryMask):
        return x.bits
    return np.asarray(getattr(x, "mask", x), dtype=bool)


def connected_components(mask: BinaryMask, min_area: int = MIN_AREA) -> list[Region]:
    """8-connected components, largest first.

    Equal areas are ordered by the raster position of each component's first
    pixel. Components below ``min_area`` pixels are dropped; survivors are
    labelled 1, 2, ... in that order.
    """
    bits = _bits(mask)
    labels, n = ndi.label(bits, structure=SQUARE)
    if n == 0:
        return []
    areas = np.bincount(labels.ravel(), minlength=n + 1)
    _, first = np.unique(labels.ravel(), return_index=True)
    # np.unique sorts labels, so first[k] belongs to label k (0 = background).
    order = sorted(range(1, n + 1), key=lambda k: (-areas[k], first[k]))
    out = []
    for k in order:
        if areas[k] < min_area:
            continue
        out.append(Region(len(out) + 1, labels == k))
    return out


def select_pair(regions: list[Region]) -> RegionPair:
    """The two largest regions, larger one first (list order is already ranked)."""
    if len(regions) < 2:
        raise NotEnoughRegions(f"need two mask components, found {len(regions)}")
    return RegionPair(regions[0], regions[1])


def morphology(x, op: str, iterations: int = 1) -> np.ndarray:
    """Iterated dilation/erosion with the 3x3 square; outside the image is background."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    bits = _bits(x)
    if op == "dilate":
        return ndi.binary_dilation(bits, SQUARE, iterations=iterations, border_value=0)
    if op == "erode":
        return ndi.binary_erosion(bits, SQUARE, iterations=iterations, border_value=0)
    raise ValueError(f"unknown morphology op {op!r}")


def closing(x, iterations: int = 1) -> np.ndarray:
    return morphology(morphology(x, "dilate", iterations), "erode", iterations)


def border_clip(shape: tuple[int, int], margin: int) -> np.ndarray:
    """True where a pixel is at least ``margin`` away from every image edge."""
    keep = np.zeros(shape, dtype=bool)
    h, w = shape
    if h > 2 * margin and w > 2 * margin:
        keep[margin:h - margin, margin:w - margin] = True
    return keep


def boundary_band(region: Region, mask, w: int, clip_margin: int = 0,
                  other: Region | None = None) -> BoundaryBand:
    """Band straddling the contour: ``dilate(region, w) - erode(region, w)``.

    Pixels of ``other`` and pixels within ``clip_margin`` of the image border
    are removed. ``mask`` only fixes the raster shape.
    """
    if w < 1:
        raise ValueError("band width must be >= 1")
    shape = _bits(mask).shape
    if region.mask.shape != shape:
        raise ValueError("region does not belong to this mask")
    band = morphology(region, "dilate", w) & ~morphology(region, "erode", w)
    if other is not None:
        band &= ~other.mask
    if clip_margin > 0:
        band &= border_clip(shape, clip_margin)
    if not band.any():
        raise EmptyBand(f"band of region {region.label} is empty at width {w}, margin {clip_margin}")
    band.setflags(write=False)
    return BoundaryBand(region.label, band, w)
