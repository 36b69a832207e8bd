"""Chronological backtest of a ranking used as a match predictor.

For every tournament the ranking is built from strictly earlier matches, the
better-placed player is predicted to win each completed match, and hits and
misses are tallied per year and per slice (surface, category, rank band).
"""

from __future__ import annotations

import enum
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Iterable, Mapping, Sequence

from .dataset import Category, MatchRecord, MatchStore, Surface
from .ranking import PageRankConfig, RatingTable, rank_players, window_graph
from .weights import WeightParams

INF = math.inf
SLICES = ("year", "surface", "category", "rank_band")
RANK_BANDS = ("1-10", "11-50", "51+")


class PredictorKind(str, enum.Enum):
    OFFICIAL = "official"
    UNIFORM = "uniform"
    PARAMETRIC = "parametric"


class Outcome(str, enum.Enum):
    HIT = "hit"
    MISS = "miss"


@dataclass(frozen=True)
class Predictor:
    kind: PredictorKind
    params: WeightParams = field(default_factory=WeightParams)
    config: PageRankConfig = field(default_factory=PageRankConfig)

    @classmethod
    def official(cls) -> "Predictor":
        return cls(PredictorKind.OFFICIAL)

    @classmethod
    def uniform(cls, age_years: int = 1, config: PageRankConfig = PageRankConfig()) -> "Predictor":
        return cls(PredictorKind.UNIFORM, WeightParams.identity(age_years), config)

    @classmethod
    def parametric(cls, params: WeightParams, config: PageRankConfig = PageRankConfig()) -> "Predictor":
        return cls(PredictorKind.PARAMETRIC, params, config)

    def ranking(self, store: MatchStore, tournament_id: int) -> RatingTable | None:
        if self.kind is PredictorKind.OFFICIAL:
            return None
        params = None if self.kind is PredictorKind.UNIFORM else self.params
        graph = window_graph(store, tournament_id, params, age_years=self.params.age_years)
        return rank_players(graph, self.config, tournament_id)

    def label(self) -> str:
        if self.kind is PredictorKind.PARAMETRIC:
            return f"parametric({self.params})"
        if self.kind is PredictorKind.UNIFORM:
            return f"uniform(age={self.params.age_years})"
        return "official"


@dataclass(frozen=True)
class Prediction:
    match_id: int
    predicted_winner: int | None  # None when undecided
    outcome: Outcome
    rank_winner: float
    rank_loser: float


@dataclass(frozen=True)
class LabeledPrediction:
    prediction: Prediction
    year: int
    surface: Surface
    category: Category


def predict_match(match: MatchRecord, positions: Mapping[int, int] | None) -> Prediction:
    """Lower position wins; unranked players sit at +inf; equal positions miss.

    ``positions=None`` uses the official ranks recorded on the match.
    """
    if positions is None:
        rw = match.official_rank_winner or INF
        rl = match.official_rank_loser or INF
    else:
        rw = positions.get(match.winner_id, INF)
        rl = positions.get(match.loser_id, INF)
    if rw < rl:
        predicted = match.winner_id
    elif rl < rw:
        predicted = match.loser_id
    else:
        predicted = None
    outcome = Outcome.HIT if predicted == match.winner_id else Outcome.MISS
    return Prediction(match.match_id, predicted, outcome, rw, rl)


@dataclass
class TournamentEval:
    tournament_id: int
    hits: int
    misses: int
    predictions: list[Prediction]
    skipped: int = 0

    def __iter__(self):
        return iter((self.hits, self.misses, self.predictions))


def evaluate_tournament(store: MatchStore, tournament_id: int, predictor: Predictor) -> TournamentEval:
    completed = [m for m in store.tournament_matches(tournament_id) if m.completed]
    if not completed:
        return TournamentEval(tournament_id, 0, 0, [])
    table = predictor.ranking(store, tournament_id)
    positions = None if table is None else table.positions()
    predictions = []
    skipped = 0
    for m in completed:
        if positions is None and m.official_rank_winner is None and m.official_rank_loser is None:
            skipped += 1
            continue
        predictions.append(predict_match(m, positions))
    hits = sum(p.outcome is Outcome.HIT for p in predictions)
    return TournamentEval(tournament_id, hits, len(predictions) - hits, predictions, skipped)


def rank_band(position: float) -> str:
    if position <= 10:
        return "1-10"
    if position <= 50:
        return "11-50"
    return "51+"


def match_band(prediction: Prediction) -> str:
    """Band shared by both players, or "mixed" when they fall in different bands."""
    a, b = rank_band(prediction.rank_winner), rank_band(prediction.rank_loser)
    return a if a == b else "mixed"


@dataclass
class Cell:
    hits: int = 0
    misses: int = 0

    @property
    def total(self) -> int:
        return self.hits + self.misses

    @property
    def rate(self) -> float:
        return self.hits / self.total if self.total else float("nan")

    def add(self, hit: bool) -> None:
        if hit:
            self.hits += 1
        else:
            self.misses += 1


@dataclass
class EvalReport:
    predictor: str
    years: list[int]
    cells: dict[str, dict[str, Cell]]
    skipped: int = 0
    predictions: list[LabeledPrediction] = field(default_factory=list)

    @property
    def overall(self) -> Cell:
        cell = Cell()
        for c in self.cells["year"].values():
            cell.hits += c.hits
            cell.misses += c.misses
        return cell

    @property
    def pooled_rate(self) -> float:
        return self.overall.rate

    @property
    def mean_of_years(self) -> float:
        rates = [c.rate for c in self.cells["year"].values() if c.total]
        return sum(rates) / len(rates) if rates else float("nan")

    def to_dict(self) -> dict:
        return {
            "predictor": self.predictor,
            "years": self.years,
            "overall": {"hits": self.overall.hits, "misses": self.overall.misses,
                        "pooled_rate": self.pooled_rate, "mean_of_years": self.mean_of_years},
            "skipped": self.skipped,
            "slices": {
                name: {key: {"hits": c.hits, "misses": c.misses, "rate": c.rate} for key, c in cells.items()}
                for name, cells in self.cells.items()
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def slice_tsv(self, name: str) -> str:
        lines = [f"{name}\thits\tmisses\ttotal\thit_rate"]
        for key, c in self.cells[name].items():
            lines.append(f"{key}\t{c.hits}\t{c.misses}\t{c.total}\t{c.rate:.6f}")
        return "\n".join(lines) + "\n"


def _sorted_cells(cells: dict[str, Cell], order: Sequence[str] | None = None) -> dict[str, Cell]:
    keys = [k for k in order if k in cells] if order else sorted(cells)
    return {k: cells[k] for k in keys}


def evaluate_years(store: MatchStore, years: Iterable[int], predictor: Predictor,
                   slices: Iterable[str] = SLICES, keep_predictions: bool = False,
                   workers: int = 1) -> EvalReport:
    years = sorted(set(years))
    slices = set(slices) | {"year"}
    unknown = slices - set(SLICES)
    if unknown:
        raise ValueError(f"unknown slices {sorted(unknown)}")
    tournaments = store.tournaments_in_years(years)
    run = partial(evaluate_tournament, store, predictor=predictor)
    ids = [t.tournament_id for t in tournaments]
    if workers > 1 and len(ids) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, ids, chunksize=max(1, len(ids) // (4 * workers))))
    else:
        results = [run(tid) for tid in ids]

    cells: dict[str, dict[str, Cell]] = {name: {} for name in slices}
    for y in years:
        cells["year"][str(y)] = Cell()
    skipped = 0
    labeled = []
    for t, result in zip(tournaments, results):
        skipped += result.skipped
        for p in result.predictions:
            hit = p.outcome is Outcome.HIT
            keys = {
                "year": str(t.year),
                "surface": t.surface.value,
                "category": t.category.value,
                "rank_band": match_band(p),
            }
            for name in slices:
                cells[name].setdefault(keys[name], Cell()).add(hit)
            if keep_predictions:
                labeled.append(LabeledPrediction(p, t.year, t.surface, t.category))

    ordered = {
        "year": cells["year"],
        "surface": _sorted_cells(cells.get("surface", {}), [s.value for s in Surface]),
        "category": _sorted_cells(cells.get("category", {}), [c.value for c in Category]),
        "rank_band": _sorted_cells(cells.get("rank_band", {}), RANK_BANDS + ("mixed",)),
    }
    return EvalReport(predictor.label(), years, {k: v for k, v in ordered.items() if k in slices},
                      skipped, labeled)
