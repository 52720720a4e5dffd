"""Dataset ingestion and accuracy reporting in the per-radius / final-vote layout."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from PIL import Image

from .detector import DetectorParams, detect
from .discriminator import A_FORGED, B_FORGED, UNDECIDED, DiscriminatorConfig, discriminate
from .errors import CopyMoveError, LayoutError
from .raster import decode_gray, decode_mask

IMAGE_SUFFIXES = (".png", ".pgm", ".ppm")
MASK_STEM_SUFFIXES = {"synth": ("",), "grip": ("", "_gt", "_mask")}
MODES = ("ground_truth_mask", "detected_mask")


@dataclass(frozen=True)
class DatasetEntry:
    id: str
    image_path: Path
    mask_path: Path | None
    truth: dict | None = None
    skip_reason: str | None = None


@dataclass(frozen=True)
class EvalConfig:
    discriminator: DiscriminatorConfig = DiscriminatorConfig()
    detector: DetectorParams = DetectorParams()

    def to_dict(self, mode: str) -> dict:
        d = {"discriminator": asdict(self.discriminator)}
        d["discriminator"]["radii"] = list(self.discriminator.radii)
        if mode == "detected_mask":
            d["detector"] = asdict(self.detector)
        return d


@dataclass
class EvalReport:
    mode: str
    radii: tuple[float, ...]
    records: list[dict]
    config: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.records)

    @property
    def counts(self) -> dict:
        c = {"correct": 0, "incorrect": 0, "undecided": 0, "skipped": 0}
        for r in self.records:
            c[r["status"]] += 1
        return c

    @property
    def scored(self) -> int:
        return self.size - self.counts["skipped"]

    def _acc(self, hits: int) -> float | None:
        return hits / self.scored if self.scored else None

    @property
    def final_accuracy(self) -> float | None:
        return self._acc(self.counts["correct"])

    @property
    def radius_accuracy(self) -> list[float | None]:
        hits = [0] * len(self.radii)
        for r in self.records:
            if r["status"] == "skipped":
                continue
            for i, ok in enumerate(r["radius_correct"]):
                hits[i] += bool(ok)
        return [self._acc(h) for h in hits]

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "config": self.config,
            "counts": {"total": self.size, **self.counts},
            "accuracy": {
                "per_radius": [{"R": r, "accuracy": a} for r, a in zip(self.radii, self.radius_accuracy)],
                "final": self.final_accuracy,
            },
            "entries": self.records,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def table(self) -> str:
        def pct(x):
            return "   n/a" if x is None else f"{100 * x:5.1f}%"

        head = "".join(f"{'R=' + format(r, 'g'):>8}" for r in self.radii) + f"{'Final':>8}"
        row = "".join(f"{pct(a):>8}" for a in self.radius_accuracy) + f"{pct(self.final_accuracy):>8}"
        c = self.counts
        return "\n".join([
            f"{'':<18}{head}",
            f"{self.mode:<18}{row}",
            f"correct {c['correct']}  incorrect {c['incorrect']}  undecided {c['undecided']}"
            f"  skipped {c['skipped']}  (accuracy over {self.scored} of {self.size})",
        ]) + "\n"


def _image_size(path: Path) -> tuple[int, int]:
    with Image.open(path) as im:
        return im.size


def _find_mask(masks: Path, stem: str, layout: str) -> Path | None:
    for suffix in MASK_STEM_SUFFIXES[layout]:
        for ext in IMAGE_SUFFIXES:
            p = masks / f"{stem}{suffix}{ext}"
            if p.is_file():
                return p
    return None


def ingest(root: str | Path, layout: str = "synth") -> list[DatasetEntry]:
    """Scan ``root/images``, ``root/masks`` and ``root/truth``; entries sorted by id."""
    if layout not in MASK_STEM_SUFFIXES:
        raise LayoutError(f"unknown layout {layout!r}")
    root = Path(root)
    images = root / "images"
    if not images.is_dir():
        raise LayoutError(f"{root} has no images/ directory")
    files = sorted(p for p in images.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not files:
        raise LayoutError(f"no images found under {images}")

    entries = []
    for img_path in files:
        stem = img_path.stem
        mask_path = _find_mask(root / "masks", stem, layout)
        truth_path = root / "truth" / f"{stem}.json"
        truth = json.loads(truth_path.read_text()) if truth_path.is_file() else None
        reason = None
        if mask_path is None:
            reason = "MissingMask"
        else:
            try:
                if _image_size(img_path) != _image_size(mask_path):
                    reason = "DimensionMismatch"
            except OSError:
                reason = "MalformedImage"
        if reason is None and truth is None and layout == "synth":
            reason = "MissingTruth"
        entries.append(DatasetEntry(stem, img_path, mask_path, truth, reason))
    return entries


def forged_side(regions: dict, truth: dict) -> str:
    """Which of regions A/B is the pasted one, matched by centroid distance."""
    ca, cb = regions["A"]["centroid"], regions["B"]["centroid"]
    pasted = truth["pasted_centroid"]
    source = truth.get("source_centroid")
    if source is None:
        return A_FORGED if math.dist(ca, pasted) <= math.dist(cb, pasted) else B_FORGED
    straight = math.dist(ca, pasted) + math.dist(cb, source)
    crossed = math.dist(ca, source) + math.dist(cb, pasted)
    return A_FORGED if straight <= crossed else B_FORGED


def _skipped(entry: DatasetEntry, reason: str, n_radii: int) -> dict:
    return {"id": entry.id, "status": "skipped", "reason": reason,
            "radius_correct": [False] * n_radii}


def evaluate_entry(entry: DatasetEntry, mode: str, cfg: EvalConfig) -> dict:
    n = len(cfg.discriminator.radii)
    if entry.skip_reason:
        return _skipped(entry, entry.skip_reason, n)
    if not entry.truth or "pasted_centroid" not in entry.truth:
        return _skipped(entry, "MissingTruth", n)
    try:
        img = decode_gray(entry.image_path.read_bytes())
        if mode == "ground_truth_mask":
            mask = decode_mask(entry.mask_path.read_bytes())
        else:
            mask = detect(img, cfg.detector).mask
        verdict = discriminate(img, mask, cfg.discriminator)
    except CopyMoveError as exc:
        return _skipped(entry, f"{type(exc).__name__}: {exc}", n)

    pasted = forged_side(verdict.regions, entry.truth)
    if verdict.final == UNDECIDED:
        status = "undecided"
    else:
        status = "correct" if verdict.final == pasted else "incorrect"
    return {
        "id": entry.id,
        "status": status,
        "pasted": pasted,
        "radius_correct": [d.vote == pasted for d in verdict.decisions],
        "verdict": verdict.to_dict(),
    }


def evaluate(entries: list[DatasetEntry], mode: str = "ground_truth_mask",
             cfg: EvalConfig = EvalConfig(), workers: int = 1) -> EvalReport:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if not entries:
        raise LayoutError("no dataset entries to evaluate")
    ordered = sorted(entries, key=lambda e: e.id)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            records = list(pool.map(lambda e: evaluate_entry(e, mode, cfg), ordered))
    else:
        records = [evaluate_entry(e, mode, cfg) for e in ordered]
    return EvalReport(mode, cfg.discriminator.radii, records, cfg.to_dict(mode))
