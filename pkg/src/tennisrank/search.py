"""Greedy coordinate ascent over the four weight parameters.

Each sweep varies one coordinate across its grid while the other three stay
at the incumbent; the best grid value is adopted only if it strictly beats
the incumbent score.  Sweeps run in the fixed order age, decay, surface,
round base, and the search stops after a full round with no adoption, which
makes the result a coordinate-wise local optimum on the grid.

The published pseudo-code toggles its ``*Done`` flags on equality in a way
that cannot terminate as written; this module implements the stated intent
(stop once a whole round leaves the vector unchanged) instead.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dataset import MatchStore
from .errors import EvaluatorError
from .evaluation import Predictor, evaluate_tournament
from .ranking import PageRankConfig
from .weights import WeightParams

logger = logging.getLogger(__name__)

COORDINATES = ("age_years", "decay_lambda", "surface_factor", "round_base")
SHORT_NAMES = {"age_years": "age", "decay_lambda": "decay", "surface_factor": "surface", "round_base": "round"}
MAX_ROUNDS = 50

Evaluator = Callable[[WeightParams], float]


def _steps(lo: float, hi: float, step: float) -> tuple[float, ...]:
    n = int(round((hi - lo) / step))
    return tuple(round(lo + i * step, 10) for i in range(n + 1))


@dataclass(frozen=True)
class SearchGrid:
    age_years: tuple[int, ...] = (1, 2, 3, 4, 5, 6)
    decay_lambda: tuple[float, ...] = (0.1, 0.2, 5.0, 10.0, 25.0)
    surface_factor: tuple[float, ...] = _steps(0.0, 1.0, 0.1)
    round_base: tuple[float, ...] = _steps(1.0, 2.0, 0.1)

    def __post_init__(self):
        for name in COORDINATES:
            values = tuple(getattr(self, name))
            if not values:
                raise ValueError(f"grid for {name} is empty")
            if list(values) != sorted(values):
                raise ValueError(f"grid for {name} must be sorted")
            for v in values:
                WeightParams().with_value(name, v)  # bounds check
            object.__setattr__(self, name, values)

    def values(self, coordinate: str) -> tuple:
        return getattr(self, coordinate)


@dataclass(frozen=True)
class TraceEntry:
    round: int
    coordinate: str
    params: WeightParams
    score: float

    @property
    def value(self):
        return getattr(self.params, self.coordinate) if self.coordinate in COORDINATES else None


@dataclass
class SearchState:
    best: WeightParams
    best_score: float
    trace: list[TraceEntry] = field(default_factory=list)
    rounds: int = 0
    converged: bool = False

    def trace_tsv(self) -> str:
        lines = ["round\tcoordinate\tvalue\tscore"]
        for e in self.trace:
            value = "" if e.value is None else f"{e.value:g}"
            lines.append(f"{e.round}\t{SHORT_NAMES.get(e.coordinate, e.coordinate)}\t{value}\t{e.score:.6f}")
        return "\n".join(lines) + "\n"


def _evaluate(evaluator: Evaluator, params: WeightParams) -> float:
    try:
        return float(evaluator(params))
    except Exception as exc:
        raise EvaluatorError(params, exc) from exc


def sweep_parameter(state: SearchState, which: str, grid: SearchGrid, evaluator: Evaluator,
                    round_index: int = 0) -> bool:
    """Sweep one coordinate in place; return True if a new value was adopted."""
    if which not in COORDINATES:
        raise ValueError(f"unknown coordinate {which!r}")
    candidates = [state.best.with_value(which, v) for v in grid.values(which)]
    scores = [_evaluate(evaluator, p) for p in candidates]
    for p, s in zip(candidates, scores):
        state.trace.append(TraceEntry(round_index, which, p, s))
    i = int(np.argmax(scores))
    if scores[i] > state.best_score:
        logger.info("round %d: %s -> %s (%.6f > %.6f)", round_index, which,
                    getattr(candidates[i], which), scores[i], state.best_score)
        state.best, state.best_score = candidates[i], scores[i]
        return True
    return False


def coordinate_search(grid: SearchGrid, evaluator: Evaluator,
                      init: WeightParams = WeightParams(5, 5.0, 0.5, 1.3),
                      max_rounds: int = MAX_ROUNDS) -> SearchState:
    state = SearchState(init, _evaluate(evaluator, init))
    state.trace.append(TraceEntry(0, "init", init, state.best_score))
    for r in range(1, max_rounds + 1):
        adopted = False
        for which in COORDINATES:
            adopted |= sweep_parameter(state, which, grid, evaluator, r)
        state.rounds = r
        if not adopted:
            state.converged = True
            return state
    logger.warning("search stopped after %d rounds without a stable round", max_rounds)
    return state


def sample_test_set(store: MatchStore, years: Sequence[int], per_year: int = 10,
                    seed: int = 0) -> list[int]:
    """``per_year`` tournaments drawn uniformly without replacement from each year."""
    rng = np.random.default_rng(seed)
    chosen = []
    for year in sorted(set(years)):
        ids = [t.tournament_id for t in store.tournaments_in_years([year])]
        if len(ids) <= per_year:
            chosen.extend(ids)
        else:
            chosen.extend(int(i) for i in rng.choice(ids, size=per_year, replace=False))
    return sorted(chosen)


class HitRateEvaluator:
    """Pooled hit rate of the parametric ranking on a fixed tournament set, cached per vector."""

    def __init__(self, store: MatchStore, test_set: Sequence[int],
                 config: PageRankConfig = PageRankConfig()):
        self.store = store
        self.test_set = list(test_set)
        self.config = config
        self.cache: dict[tuple, float] = {}

    def __call__(self, params: WeightParams) -> float:
        key = params.as_tuple()
        if key not in self.cache:
            predictor = Predictor.parametric(params, self.config)
            hits = total = 0
            for tid in self.test_set:
                result = evaluate_tournament(self.store, tid, predictor)
                hits += result.hits
                total += result.hits + result.misses
            self.cache[key] = hits / total if total else 0.0
        return self.cache[key]


def separable_objective(optimum=(4, 5.0, 0.3, 1.7)) -> Evaluator:
    """Synthetic objective peaked at ``optimum`` with no coordinate interaction."""
    spans = (5.0, 25.0, 1.0, 1.0)

    def objective(p: WeightParams) -> float:
        return -sum(((x - o) / s) ** 2 for x, o, s in zip(p.as_tuple(), optimum, spans))

    return objective
