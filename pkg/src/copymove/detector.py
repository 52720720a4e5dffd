"""Block-based copy-move detector: DCT descriptors, lexicographic matching,
shift-vector voting.

Produces the binary "detected mask" that the discriminator can consume when
no ground-truth mask is available.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import asdict, dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.fft import dct

from .errors import ImageTooSmall
from .raster import BinaryMask, GrayImage
from .regions import closing


@dataclass(frozen=True)
class DetectorParams:
    block_size: int = 16
    zigzag_count: int = 16
    quant: float = 16.0
    neighbor_window: int = 4
    min_offset: float | None = None  # defaults to block_size + 1
    min_support: int = 50
    var_min: float = 5.0

    def __post_init__(self):
        if self.block_size < 8:
            raise ValueError("block_size must be >= 8")
        if not 1 <= self.zigzag_count <= self.block_size ** 2:
            raise ValueError("zigzag_count out of range")

    @property
    def offset_threshold(self) -> float:
        return float(self.block_size + 1) if self.min_offset is None else float(self.min_offset)


@dataclass(frozen=True, eq=False)
class BlockFeatures:
    """Surviving block origins ``(u, v)`` and their quantised descriptors (row-aligned)."""

    origins: np.ndarray
    descriptors: np.ndarray

    def __len__(self):
        return len(self.origins)


@dataclass(frozen=True)
class DetectionResult:
    mask: BinaryMask
    dominant_shifts: list = field(default_factory=list)  # [((du, dv), support), ...]
    params: DetectorParams = DetectorParams()

    def sidecar(self) -> dict:
        return {
            "dominant_shifts": [{"shift": [int(du), int(dv)], "support": int(n)}
                                for (du, dv), n in self.dominant_shifts],
            "params": asdict(self.params),
        }

    def sidecar_json(self) -> str:
        return json.dumps(self.sidecar(), indent=2) + "\n"


def zigzag_indices(n: int, count: int) -> list[tuple[int, int]]:
    """First ``count`` (row, col) positions of the JPEG zigzag scan of an n x n block."""
    cells = sorted(((r, c) for r in range(n) for c in range(n)),
                   key=lambda rc: (rc[0] + rc[1], rc[1] if (rc[0] + rc[1]) % 2 == 0 else rc[0]))
    return cells[:count]


def dct_matrix(n: int) -> np.ndarray:
    """Orthonormal type-II DCT basis: ``coeffs = C @ block @ C.T``."""
    return dct(np.eye(n), type=2, norm="ortho", axis=0)


def block_dct(block: np.ndarray) -> np.ndarray:
    c = dct_matrix(block.shape[0])
    return c @ np.asarray(block, dtype=np.float64) @ c.T


def _block_variance(g: np.ndarray, b: int) -> np.ndarray:
    # Integral images in int64 keep sums exact.
    ii = np.pad(g.astype(np.int64), ((1, 0), (1, 0))).cumsum(0).cumsum(1)
    sq = np.pad(g.astype(np.int64) ** 2, ((1, 0), (1, 0))).cumsum(0).cumsum(1)

    def box(t):
        return t[b:, b:] - t[:-b, b:] - t[b:, :-b] + t[:-b, :-b]

    n = b * b
    s, s2 = box(ii), box(sq)
    return (s2 * n - s * s) / (n * n)


def extract_block_features(img: GrayImage, params: DetectorParams = DetectorParams()) -> BlockFeatures:
    """Descriptors of every overlapping block (stride 1) with enough variance.

    Only the zigzag-leading coefficients are computed, separably: rows first,
    then columns, over sliding windows.
    """
    b = params.block_size
    h, w = img.shape
    if h < b or w < b:
        raise ImageTooSmall(f"{w}x{h} image is smaller than a {b}x{b} block")
    g = img.pixels.astype(np.float64)
    c = dct_matrix(b)
    zz = zigzag_indices(b, params.zigzag_count)

    keep = _block_variance(img.pixels, b) >= params.var_min
    vs, us = np.nonzero(keep)
    if len(vs) == 0:
        return BlockFeatures(np.zeros((0, 2), np.int64), np.zeros((0, len(zz)), np.int64))

    # Horizontal pass: for each needed column frequency l, correlate rows with C[l].
    win_u = sliding_window_view(g, b, axis=1)  # (h, w-b+1, b)
    horiz = {l: win_u @ c[l] for l in sorted({l for _, l in zz})}
    desc = np.empty((len(vs), len(zz)), dtype=np.float64)
    for j, (k, l) in enumerate(zz):
        win_v = sliding_window_view(horiz[l], b, axis=0)  # (h-b+1, w-b+1, b)
        coeff = win_v[vs, us] @ c[k]
        desc[:, j] = coeff
    quantised = np.floor(desc / params.quant + 0.5).astype(np.int64)
    origins = np.stack([us, vs], axis=1).astype(np.int64)
    return BlockFeatures(origins, quantised)


def canonical_shift(du: int, dv: int) -> tuple[int, int]:
    """Sign-normalise a shift so that dv > 0, or dv == 0 and du > 0."""
    if dv < 0 or (dv == 0 and du < 0):
        return -du, -dv
    return du, dv


def _canonical(p: np.ndarray, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Order each (p, q) so the raster-earlier origin comes first."""
    swap = (q[:, 1] < p[:, 1]) | ((q[:, 1] == p[:, 1]) & (q[:, 0] < p[:, 0]))
    src = np.where(swap[:, None], q, p)
    dst = np.where(swap[:, None], p, q)
    return src, dst


def match_blocks(features: BlockFeatures, params: DetectorParams = DetectorParams()) -> np.ndarray:
    """Candidate pairs as an ``(n, 2, 2)`` array of ``[source (u, v), target (u, v)]``.

    Features are sorted lexicographically by descriptor (origin raster order
    breaks ties); each is compared with its next ``neighbor_window`` successors.
    """
    n = len(features)
    if n < 2:
        return np.zeros((0, 2, 2), dtype=np.int64)
    d, o = features.descriptors, features.origins
    keys = [o[:, 0], o[:, 1]] + [d[:, j] for j in range(d.shape[1] - 1, -1, -1)]
    order = np.lexsort(keys)
    d, o = d[order], o[order]
    thr2 = params.offset_threshold ** 2
    found = []
    for lag in range(1, min(params.neighbor_window, n - 1) + 1):
        same = np.all(d[:-lag] == d[lag:], axis=1)
        delta = o[lag:] - o[:-lag]
        far = (delta ** 2).sum(axis=1) >= thr2
        idx = np.nonzero(same & far)[0]
        if len(idx):
            src, dst = _canonical(o[idx], o[idx + lag])
            found.append(np.stack([src, dst], axis=1))
    if not found:
        return np.zeros((0, 2, 2), dtype=np.int64)
    pairs = np.concatenate(found)
    # Sort for a stable, schedule-independent output order; drop duplicates.
    flat = pairs.reshape(len(pairs), 4)
    flat = np.unique(flat, axis=0)
    return flat.reshape(-1, 2, 2)


def filter_by_shift(pairs: np.ndarray, min_support: int = 50):
    """Keep pairs whose shift vector is shared by at least ``min_support`` pairs.

    Returns ``(surviving_pairs, [((du, dv), support), ...])`` with shifts ranked
    by support, then by shift.
    """
    if len(pairs) == 0:
        return pairs, []
    shifts = pairs[:, 1] - pairs[:, 0]
    counts = Counter(map(tuple, shifts.tolist()))
    dominant = sorted(((s, n) for s, n in counts.items() if n >= min_support),
                      key=lambda sn: (-sn[1], sn[0]))
    if not dominant:
        return pairs[:0], []
    keep_set = {s for s, _ in dominant}
    keep = np.array([tuple(s) in keep_set for s in shifts.tolist()])
    return pairs[keep], [(tuple(int(x) for x in s), int(n)) for s, n in dominant]


def footprint_mask(pairs: np.ndarray, shape: tuple[int, int], block_size: int) -> np.ndarray:
    """Union of the block x block squares at every origin in ``pairs``."""
    acc = np.zeros((shape[0] + 1, shape[1] + 1), dtype=np.int64)
    o = pairs.reshape(-1, 2)
    u, v, b = o[:, 0], o[:, 1], block_size
    np.add.at(acc, (v, u), 1)
    np.add.at(acc, (v, u + b), -1)
    np.add.at(acc, (v + b, u), -1)
    np.add.at(acc, (v + b, u + b), 1)
    return acc.cumsum(0).cumsum(1)[:shape[0], :shape[1]] > 0


def detect(img: GrayImage, params: DetectorParams = DetectorParams()) -> DetectionResult:
    feats = extract_block_features(img, params)
    pairs = match_blocks(feats, params)
    kept, dominant = filter_by_shift(pairs, params.min_support)
    bits = footprint_mask(kept, img.shape, params.block_size)
    if bits.any():
        bits = closing(bits, 1)
    return DetectionResult(BinaryMask(bits), dominant, params)
