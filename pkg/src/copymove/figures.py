"""Matplotlib renderings written next to the JSON reports.

All figures go through :func:`save`, which pins DPI and strips the
``Software`` metadata so identical inputs give byte-identical PNGs.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.titlesize": 10,
    "legend.frameon": False,
    "svg.hashsalt": "copymove",
}

COLOURS = {"A": "#1f77b4", "B": "#d62728", "final": "#444444"}


def save(fig, path: str | Path, dpi: int = 100) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="png", dpi=dpi, metadata={"Software": None})
    plt.close(fig)
    return path


def band_histograms(hist_a, hist_b, radius: float, path: str | Path,
                    std_a: float | None = None, std_b: float | None = None) -> Path:
    """Side-by-side normalised boundary LBP histograms of regions A and B."""
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, 2, figsize=(8, 2.8), sharey=True)
        for ax, h, name, s in ((axes[0], hist_a, "A", std_a), (axes[1], hist_b, "B", std_b)):
            q = h.normalized
            ax.bar(np.arange(q.size), q, width=1.0, color=COLOURS[name])
            title = f"region {name} boundary, R={radius:g}"
            if s is not None:
                title += f"  (s={s:.5f})"
            ax.set_title(title)
            ax.set_xlim(-0.5, q.size - 0.5)
            ax.set_xlabel("LBP code")
        axes[0].set_ylabel("frequency")
        fig.tight_layout()
        return save(fig, path)


def radius_stds(verdict, path: str | Path) -> Path:
    """Histogram standard deviation of both bands at every radius."""
    decisions = [d for d in verdict.decisions]
    x = np.arange(len(decisions))
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 3))
        for off, key, name in ((-0.2, "std_a", "A"), (0.2, "std_b", "B")):
            vals = [getattr(d, key) if getattr(d, key) is not None else 0.0 for d in decisions]
            ax.bar(x + off, vals, width=0.4, color=COLOURS[name], label=f"region {name}")
        ax.set_xticks(x)
        ax.set_xticklabels([f"R={d.radius:g}\n{d.vote}" for d in decisions])
        ax.set_ylabel("histogram std")
        ax.set_title(f"verdict: {verdict.final}")
        ax.legend()
        fig.tight_layout()
        return save(fig, path)


def accuracy(report, path: str | Path) -> Path:
    """Per-radius and final-vote accuracy bars of an evaluation report."""
    labels = [f"R={r:g}" for r in report.radii] + ["Final"]
    values = [a if a is not None else 0.0 for a in report.radius_accuracy]
    values.append(report.final_accuracy or 0.0)
    colours = [COLOURS["A"]] * len(report.radii) + [COLOURS["final"]]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 3))
        bars = ax.bar(labels, [100 * v for v in values], color=colours)
        for bar, v in zip(bars, values):
            ax.annotate(f"{100 * v:.1f}%", (bar.get_x() + bar.get_width() / 2, 100 * v),
                        ha="center", va="bottom", fontsize=8)
        ax.axhline(50, color="0.6", lw=0.8, ls="--")
        ax.set_ylim(0, 110)
        ax.set_ylabel("accuracy (%)")
        c = report.counts
        ax.set_title(f"{report.mode}  (n={report.scored}, skipped={c['skipped']})")
        fig.tight_layout()
        return save(fig, path)
