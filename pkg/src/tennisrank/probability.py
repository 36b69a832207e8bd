"""Victory probability from rank difference, and ROC/AUROC scoring.

The better-ranked player's win probability is modelled as
``1 / (1 + exp((r1 - r2) / a))`` with a single scale ``a`` fitted by
count-weighted least squares on per-difference hit rates.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import rankdata

from .dataset import Category, Surface
from .errors import CrossCheckError, InsufficientDataError
from .evaluation import LabeledPrediction

A_BOUNDS = (1.0, 1000.0)
MIN_BIN_TOTAL = 5
LEAF_THRESHOLD = 200
AUC_AGREEMENT = 1e-9


@dataclass(frozen=True)
class DiffBin:
    diff: int
    hits: int
    total: int

    @property
    def rate(self) -> float:
        return self.hits / self.total


@dataclass(frozen=True)
class LogisticModel:
    a: float
    fit_residual: float
    n_points: int
    degenerate: bool = False

    def p(self, diff: float) -> float:
        """Win probability of the better-ranked player at rank gap ``diff``."""
        return _logistic(diff, self.a)


def _logistic(diff, a):
    return 1.0 / (1.0 + np.exp(-np.asarray(diff, dtype=float) / a))


def p_victory(r1: float, r2: float, model: LogisticModel) -> float:
    """Probability that the player ranked ``r1`` beats the player ranked ``r2``."""
    if math.isinf(r1) and math.isinf(r2):
        return 0.5
    if math.isinf(r1):
        return 0.0
    if math.isinf(r2):
        return 1.0
    z = (r1 - r2) / model.a
    if z > 0:
        e = math.exp(-z)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(z))


def bin_hit_rates(predictions: Iterable) -> list[DiffBin]:
    """One bin per observed finite rank gap; a hit is a win by the better-ranked player."""
    hits: dict[int, int] = defaultdict(int)
    totals: dict[int, int] = defaultdict(int)
    for item in predictions:
        p = getattr(item, "prediction", item)
        if math.isinf(p.rank_winner) or math.isinf(p.rank_loser) or p.rank_winner == p.rank_loser:
            continue
        diff = int(abs(p.rank_winner - p.rank_loser))
        totals[diff] += 1
        hits[diff] += p.rank_winner < p.rank_loser
    return [DiffBin(d, hits[d], totals[d]) for d in sorted(totals)]


def _weighted_sse(a: float, diffs: np.ndarray, rates: np.ndarray, weights: np.ndarray) -> float:
    return float(np.sum(weights * (rates - _logistic(diffs, a)) ** 2))


def _golden_section(f, lo: float, hi: float, tol: float) -> float:
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = hi - inv_phi * (hi - lo), lo + inv_phi * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - inv_phi * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + inv_phi * (hi - lo)
            fd = f(d)
    return (lo + hi) / 2.0


def fit_logistic(bins: Sequence[DiffBin], min_total: int = MIN_BIN_TOTAL,
                 bounds: tuple[float, float] = A_BOUNDS, tol: float = 1e-7) -> LogisticModel:
    """Fit ``a`` by a log-spaced scan over ``bounds`` refined with golden-section search."""
    used = [b for b in bins if b.total >= min_total]
    if len(used) < 3 or len({b.diff for b in used}) < 2:
        raise InsufficientDataError(f"need >= 3 bins with total >= {min_total}, got {len(used)}")
    diffs = np.array([b.diff for b in used], dtype=float)
    rates = np.array([b.rate for b in used])
    weights = np.array([b.total for b in used], dtype=float)
    sse = lambda a: _weighted_sse(a, diffs, rates, weights)  # noqa: E731

    lo, hi = bounds
    scan = np.geomspace(lo, hi, 2001)
    values = np.array([sse(a) for a in scan])
    i = int(np.argmin(values))
    a = _golden_section(sse, scan[max(i - 1, 0)], scan[min(i + 1, len(scan) - 1)], tol)
    degenerate = bool(a >= hi * (1 - 1e-6) or values.max() - values.min() <= 1e-12 * max(1.0, values.max()))
    return LogisticModel(float(a), sse(a), len(used), degenerate)


LEAVES = tuple((s, c) for s in Surface for c in Category)


@dataclass
class ProbTree:
    global_model: LogisticModel
    leaves: dict[tuple[Surface, Category], LogisticModel | None]
    threshold: int
    leaf_counts: dict[tuple[Surface, Category], int] = field(default_factory=dict)

    def resolve(self, surface: Surface, category: Category) -> LogisticModel:
        return self.leaves.get((surface, category)) or self.global_model

    def is_fallback(self, surface: Surface, category: Category) -> bool:
        return self.leaves.get((surface, category)) is None

    def to_dict(self) -> dict:
        def model_dict(m):
            return {"a": m.a, "fit_residual": m.fit_residual, "n_points": m.n_points, "degenerate": m.degenerate}

        return {
            "global": model_dict(self.global_model),
            "threshold": self.threshold,
            "leaves": {
                f"{s.value}/{c.value}": (
                    {"fallback": True, "matches": self.leaf_counts.get((s, c), 0)}
                    if self.leaves.get((s, c)) is None
                    else {**model_dict(self.leaves[(s, c)]), "fallback": False,
                          "matches": self.leaf_counts.get((s, c), 0)}
                )
                for s, c in LEAVES
            },
        }


def build_tree(predictions: Sequence[LabeledPrediction], threshold: int = LEAF_THRESHOLD,
               global_model: LogisticModel | None = None, min_total: int = MIN_BIN_TOTAL) -> ProbTree:
    if global_model is None:
        global_model = fit_logistic(bin_hit_rates(predictions), min_total)
    by_leaf: dict[tuple[Surface, Category], list[LabeledPrediction]] = defaultdict(list)
    for lp in predictions:
        by_leaf[(lp.surface, lp.category)].append(lp)
    leaves: dict[tuple[Surface, Category], LogisticModel | None] = {}
    counts = {}
    for leaf in LEAVES:
        members = by_leaf.get(leaf, [])
        counts[leaf] = len(members)
        model = None
        if len(members) >= threshold:
            try:
                model = fit_logistic(bin_hit_rates(members), min_total)
            except InsufficientDataError:
                model = None
        leaves[leaf] = model
    return ProbTree(global_model, leaves, threshold, counts)


@dataclass(frozen=True)
class RocResult:
    thresholds: tuple[float, ...]
    fpr: tuple[float, ...]
    tpr: tuple[float, ...]
    auroc: float

    def to_tsv(self) -> str:
        lines = ["threshold\tfpr\ttpr"]
        for t, x, y in zip(self.thresholds, self.fpr, self.tpr):
            lines.append(f"{t:.10g}\t{x:.10g}\t{y:.10g}")
        lines.append(f"auroc\t{self.auroc:.10g}")
        return "\n".join(lines) + "\n"


def pairwise_auc(labels: Sequence[bool], scores: Sequence[float]) -> float:
    """Probability a random positive outscores a random negative (ties count half), via ranks."""
    labels = np.asarray(labels, dtype=bool)
    ranks = rankdata(np.asarray(scores, dtype=float))
    n_pos, n_neg = int(labels.sum()), int((~labels).sum())
    u = ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def roc_curve(scored: Iterable[tuple[bool, float]]) -> RocResult:
    """Threshold sweep over distinct scores, highest first; curve runs (0,0) -> (1,1)."""
    pairs = [(bool(label), float(score)) for label, score in scored]
    labels = np.array([p[0] for p in pairs], dtype=bool)
    scores = np.array([p[1] for p in pairs], dtype=float)
    n_pos, n_neg = int(labels.sum()), int((~labels).sum())
    if n_pos == 0 or n_neg == 0:
        raise InsufficientDataError("ROC needs at least one positive and one negative label")
    order = np.argsort(-scores, kind="stable")
    s, y = scores[order], labels[order]
    last_of_run = np.r_[np.nonzero(np.diff(s))[0], len(s) - 1]
    tp = np.cumsum(y)[last_of_run]
    fp = np.cumsum(~y)[last_of_run]
    tpr = np.r_[0.0, tp / n_pos]
    fpr = np.r_[0.0, fp / n_neg]
    thresholds = np.r_[np.inf, s[last_of_run]]
    auroc = float(np.sum((fpr[1:] - fpr[:-1]) * (tpr[1:] + tpr[:-1]) / 2.0))
    check = pairwise_auc(labels, scores)
    if abs(auroc - check) > AUC_AGREEMENT:
        raise CrossCheckError(f"trapezoidal AUROC {auroc!r} disagrees with pairwise {check!r}")
    return RocResult(tuple(thresholds.tolist()), tuple(fpr.tolist()), tuple(tpr.tolist()), auroc)


def scored_matches(predictions: Iterable[LabeledPrediction],
                   model: LogisticModel | ProbTree, mirrored: bool = False) -> list[tuple[bool, float]]:
    """(better-ranked won, P(better-ranked wins)) per match with a defined favourite.

    Matches where both players are unranked or share a position have no
    favourite and are left out.  ``mirrored`` adds each match once more from
    the underdog's side.
    """
    out = []
    for lp in predictions:
        p = lp.prediction
        if p.rank_winner == p.rank_loser:
            continue
        leaf = model.resolve(lp.surface, lp.category) if isinstance(model, ProbTree) else model
        better, worse = sorted((p.rank_winner, p.rank_loser))
        score = p_victory(better, worse, leaf)
        label = p.rank_winner < p.rank_loser
        out.append((label, score))
        if mirrored:
            out.append((not label, 1.0 - score))
    return out


def score_predictor(predictions: Sequence[LabeledPrediction], model: LogisticModel | ProbTree,
                    mirrored: bool = False) -> RocResult:
    return roc_curve(scored_matches(predictions, model, mirrored))


def model_json(tree: ProbTree, bins: Sequence[DiffBin], predictor: str) -> str:
    doc = tree.to_dict()
    doc["predictor"] = predictor
    doc["bins"] = [{"diff": b.diff, "hits": b.hits, "total": b.total} for b in bins]
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def tree_from_json(text: str) -> ProbTree:
    doc = json.loads(text)

    def model(d):
        return LogisticModel(d["a"], d["fit_residual"], d["n_points"], d.get("degenerate", False))

    leaves = {}
    counts = {}
    for s, c in LEAVES:
        entry = doc["leaves"][f"{s.value}/{c.value}"]
        leaves[(s, c)] = None if entry["fallback"] else model(entry)
        counts[(s, c)] = entry.get("matches", 0)
    return ProbTree(model(doc["global"]), leaves, doc["threshold"], counts)

