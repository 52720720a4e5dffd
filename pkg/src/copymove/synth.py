"""Ground-truthed copy-move forgeries with optional boundary feathering.

A forgery copies a rectangular or elliptical footprint to another location.
With ``gaussian_feather`` the pasted contour is alpha-ramped into the
background and low-pass filtered inside its boundary band; the source contour
is never touched.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage as ndi

from .errors import GeometryViolation, SampleExhausted
from .raster import BinaryMask, GrayImage, encode_image, encode_mask
from .regions import Region, boundary_band, connected_components, morphology

MAX_RETRIES = 100


@dataclass(frozen=True)
class Blend:
    kind: str = "none"  # "none" | "gaussian_feather"
    sigma: float = 2.0
    band: int = 4

    def __post_init__(self):
        if self.kind not in ("none", "gaussian_feather"):
            raise ValueError(f"unknown blend {self.kind!r}")
        if self.kind == "gaussian_feather" and (self.sigma <= 0 or self.band < 1):
            raise ValueError("feathering needs sigma > 0 and band >= 1")


@dataclass(frozen=True)
class ForgerySpec:
    """Source footprint at ``position`` (top-left ``(u, v)``), pasted at ``position + offset``."""

    shape: str  # "rect" | "ellipse"
    size: tuple[int, int]  # (width, height) of the footprint's bounding box
    position: tuple[int, int]
    offset: tuple[int, int]
    blend: Blend = Blend()
    seed: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["size"] = list(self.size)
        d["position"] = list(self.position)
        d["offset"] = list(self.offset)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> ForgerySpec:
        return cls(d["shape"], tuple(d["size"]), tuple(d["position"]), tuple(d["offset"]),
                   Blend(**d.get("blend", {})), d.get("seed", 0))


@dataclass(frozen=True, eq=False)
class GroundTruth:
    mask: BinaryMask
    source_label: int
    pasted_label: int
    source_centroid: tuple[float, float]
    pasted_centroid: tuple[float, float]
    spec: ForgerySpec

    def to_dict(self) -> dict:
        return {
            "source_label": self.source_label,
            "pasted_label": self.pasted_label,
            "source_centroid": [round(c, 6) for c in self.source_centroid],
            "pasted_centroid": [round(c, 6) for c in self.pasted_centroid],
            "spec": self.spec.to_dict(),
        }


@dataclass(frozen=True)
class SpecDistribution:
    """Sampling ranges for :func:`corpus`."""

    shapes: tuple[str, ...] = ("rect", "ellipse")
    area: tuple[int, int] = (2000, 6000)
    aspect: tuple[float, float] = (0.6, 1.6)
    sigmas: tuple[float, ...] = (2.0,)
    band: int = 4
    blend: str = "gaussian_feather"


def footprint(shape: str, size: tuple[int, int]) -> np.ndarray:
    w, h = size
    if shape == "rect":
        return np.ones((h, w), dtype=bool)
    if shape == "ellipse":
        yy, xx = np.mgrid[0:h, 0:w]
        return ((xx - (w - 1) / 2) / (w / 2)) ** 2 + ((yy - (h - 1) / 2) / (h / 2)) ** 2 <= 1.0
    raise ValueError(f"unknown shape {shape!r}")


def _place(fp: np.ndarray, image_shape, at: tuple[int, int]) -> np.ndarray:
    u, v = at
    h, w = fp.shape
    H, W = image_shape
    if u < 0 or v < 0 or u + w > W or v + h > H:
        raise GeometryViolation(f"footprint at {at} with size {w}x{h} leaves the {W}x{H} image")
    out = np.zeros(image_shape, dtype=bool)
    out[v:v + h, u:u + w] = fp
    return out


def footprints(spec: ForgerySpec, image_shape) -> tuple[np.ndarray, np.ndarray]:
    """Source and pasted masks; raises when they leave the image or interact.

    The two footprints must stay more than twice the blend band apart, so
    neither the paste nor its feathering reaches the source's boundary band.
    The rule is the same for unblended specs, which keeps geometry identical
    between a feathered corpus and its unblended control.
    """
    fp = footprint(spec.shape, spec.size)
    src = _place(fp, image_shape, spec.position)
    dst = _place(fp, image_shape, (spec.position[0] + spec.offset[0], spec.position[1] + spec.offset[1]))
    gap = 2 * spec.blend.band + 1
    if (morphology(src, "dilate", gap) & dst).any():
        raise GeometryViolation("pasted footprint overlaps or touches the source region")
    return src, dst


def gaussian_smooth(values: np.ndarray, sigma: float) -> np.ndarray:
    """Separable discrete Gaussian, radius ceil(3 sigma), renormalised at borders."""
    radius = math.ceil(3 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    k /= k.sum()
    num = ndi.correlate1d(ndi.correlate1d(values, k, axis=0, mode="constant"), k, axis=1, mode="constant")
    den = ndi.correlate1d(ndi.correlate1d(np.ones_like(values), k, axis=0, mode="constant"), k, axis=1, mode="constant")
    return num / den


def feather_footprint(pasted: np.ndarray, band: int) -> np.ndarray:
    """Pixels rewritten by feathering: the pasted region's symmetric band."""
    region = Region(0, pasted)
    return boundary_band(region, pasted, band).mask


def _round_u8(x: np.ndarray) -> np.ndarray:
    return np.clip(np.floor(x + 0.5), 0, 255).astype(np.uint8)


def synthesize(img: GrayImage, spec: ForgerySpec) -> tuple[GrayImage, GroundTruth]:
    src, dst = footprints(spec, img.shape)
    base = img.pixels
    du, dv = spec.offset

    naive = base.copy()
    vs, us = np.nonzero(src)
    naive[vs + dv, us + du] = base[vs, us]

    out = naive
    if spec.blend.kind == "gaussian_feather":
        bw = spec.blend.band
        # Chessboard depth inside the pasted region: 1 on its contour.
        depth = ndi.distance_transform_cdt(np.pad(dst, 1), metric="chessboard")[1:-1, 1:-1]
        alpha = np.where(dst, np.clip((depth - 1) / bw, 0.0, 1.0), 0.0)
        composite = alpha * naive + (1.0 - alpha) * base
        smooth = gaussian_smooth(composite, spec.blend.sigma)
        band = feather_footprint(dst, bw)
        out = naive.copy()
        out[band] = _round_u8(smooth[band])

    truth_bits = src | dst
    mask = BinaryMask(truth_bits)
    regions = connected_components(mask, min_area=1)
    src_region = next(r for r in regions if (r.mask & src).any())
    dst_region = next(r for r in regions if (r.mask & dst).any())
    truth = GroundTruth(mask, src_region.label, dst_region.label,
                        src_region.centroid, dst_region.centroid, spec)
    return GrayImage(out), truth


# -- procedural bases -------------------------------------------------------

DEFAULT_BETAS = (0.0, 0.5, 1.0, 1.25, 1.5)


def fractal_texture(shape: tuple[int, int] = (384, 384), beta: float = 1.0, seed: int = 0) -> GrayImage:
    """Isotropic noise with power spectrum ~ 1/f**beta, stretched to [10, 245].

    ``beta = 0`` is white noise; larger values give cloudier textures.
    """
    rng = np.random.default_rng(seed)
    h, w = shape
    fy = np.fft.fftfreq(h)[:, None]
    fx = np.fft.fftfreq(w)[None, :]
    f = np.hypot(fy, fx)
    f[0, 0] = 1.0
    spectrum = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / f ** (beta / 2)
    spectrum[0, 0] = 0.0
    field_ = np.real(np.fft.ifft2(spectrum))
    field_ = (field_ - field_.min()) / (field_.max() - field_.min())
    return GrayImage(_round_u8(10.0 + 235.0 * field_))


def default_bases(n: int = 5, shape: tuple[int, int] = (384, 384), seed: int = 0) -> list[GrayImage]:
    betas = [DEFAULT_BETAS[i % len(DEFAULT_BETAS)] for i in range(n)]
    return [fractal_texture(shape, b, seed * 1000 + i) for i, b in enumerate(betas)]


# -- corpus -------------------------------------------------------------------

def sample_spec(rng: np.random.Generator, image_shape, dist: SpecDistribution, seed: int) -> ForgerySpec:
    H, W = image_shape
    shape = dist.shapes[int(rng.integers(len(dist.shapes)))]
    target = rng.uniform(*dist.area)
    aspect = rng.uniform(*dist.aspect)
    fill = 1.0 if shape == "rect" else math.pi / 4
    w = max(1, int(round(math.sqrt(target / fill * aspect))))
    h = max(1, int(round(target / fill / w)))
    if w >= W or h >= H:
        raise GeometryViolation("footprint larger than the image")
    sigma = float(dist.sigmas[int(rng.integers(len(dist.sigmas)))])
    blend = Blend(dist.blend, sigma, dist.band) if dist.blend != "none" else Blend("none", sigma, dist.band)
    u = int(rng.integers(0, W - w + 1))
    v = int(rng.integers(0, H - h + 1))
    u2 = int(rng.integers(0, W - w + 1))
    v2 = int(rng.integers(0, H - h + 1))
    spec = ForgerySpec(shape, (w, h), (u, v), (u2 - u, v2 - v), blend, seed)
    area = int(footprint(shape, spec.size).sum())
    if not dist.area[0] <= area <= dist.area[1]:
        raise GeometryViolation(f"footprint area {area} outside {dist.area}")
    return spec


def corpus_sample(bases: list[GrayImage], index: int, dist: SpecDistribution, seed: int):
    base = bases[index % len(bases)]
    # Independent stream per sample: parallel generation cannot change outputs.
    rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
    for _ in range(MAX_RETRIES):
        try:
            spec = sample_spec(rng, base.shape, dist, seed)
            footprints(spec, base.shape)
        except GeometryViolation:
            continue
        return synthesize(base, spec)
    raise SampleExhausted(f"sample {index}: no valid geometry after {MAX_RETRIES} attempts")


def corpus(bases: list[GrayImage], n: int, dist: SpecDistribution = SpecDistribution(),
           seed: int = 0, workers: int = 1) -> list[tuple[GrayImage, GroundTruth]]:
    if n < 1 or not bases:
        raise ValueError("need n >= 1 and at least one base image")
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda i: corpus_sample(bases, i, dist, seed), range(n)))
    return [corpus_sample(bases, i, dist, seed) for i in range(n)]


def write_corpus(samples, out_dir: str | Path) -> list[str]:
    """Write ``images/NNN.png``, ``masks/NNN.png`` and ``truth/NNN.json``."""
    out = Path(out_dir)
    for sub in ("images", "masks", "truth"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    ids = []
    width = max(3, len(str(len(samples) - 1)))
    for i, (forged, truth) in enumerate(samples):
        name = f"{i:0{width}d}"
        (out / "images" / f"{name}.png").write_bytes(encode_image(forged))
        (out / "masks" / f"{name}.png").write_bytes(encode_mask(truth.mask))
        (out / "truth" / f"{name}.json").write_text(json.dumps(truth.to_dict(), indent=2) + "\n")
        ids.append(name)
    return ids
