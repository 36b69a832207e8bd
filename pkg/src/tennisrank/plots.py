"""Static SVG figures: binned hit rates with the fitted curve, and ROC curves."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .probability import DiffBin, LogisticModel, RocResult  # noqa: E402


def plot_fit(bins: Sequence[DiffBin], model: LogisticModel, path: str | Path, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    diffs = np.array([b.diff for b in bins])
    rates = np.array([b.rate for b in bins])
    sizes = np.array([b.total for b in bins], dtype=float)
    ax.scatter(diffs, rates, s=4 + 40 * sizes / max(sizes.max(), 1), alpha=0.5, label="hit rate per gap")
    xs = np.linspace(0, max(diffs.max(), 1), 400)
    ax.plot(xs, model.p(xs), color="C3", label=f"logistic, a = {model.a:.3f}")
    ax.set_xlabel("rank difference")
    ax.set_ylabel("P(better-ranked wins)")
    ax.set_ylim(0, 1)
    ax.set_title(title)
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_roc(curves: Mapping[str, RocResult], path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(5, 5))
    for label, roc in curves.items():
        ax.plot(roc.fpr, roc.tpr, label=f"{label} (AUROC {roc.auroc:.4f})")
    ax.plot([0, 1], [0, 1], color="grey", linestyle=":")
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
