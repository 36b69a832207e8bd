"""Weighted PageRank over a target tournament's results window."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy import sparse

from .dataset import MatchRecord, MatchStore, Tournament, query_window
from .errors import ConvergenceError
from .weights import WeightedEdge, WeightParams, edge_weight

logger = logging.getLogger(__name__)

# Scores closer than this (relative) are treated as tied and ordered by name.
TIE_RTOL = 1e-9


@dataclass(frozen=True)
class PageRankConfig:
    damping: float = 0.85
    tolerance: float = 1e-8
    max_iterations: int = 1000

    def __post_init__(self):
        if not 0.0 < self.damping < 1.0:
            raise ValueError(f"damping must be in (0, 1), got {self.damping}")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class MatchGraph:
    """Directed multigraph; parallel edges are kept as separate entries."""

    nodes: tuple[int, ...]
    edges: tuple[WeightedEdge, ...]
    names: Mapping[int, str]

    @classmethod
    def from_edges(cls, edges: Sequence[WeightedEdge], names: Mapping[int, str]) -> "MatchGraph":
        nodes = sorted({e.source for e in edges} | {e.target for e in edges})
        return cls(tuple(nodes), tuple(edges), {n: names[n] for n in nodes})


def build_graph(store: MatchStore, window: Sequence[MatchRecord], target: Tournament,
                params: WeightParams | None) -> MatchGraph:
    """One loser -> winner edge per completed window match.

    ``params=None`` gives every edge weight exactly 1 (the uniform ranking).
    """
    start = store.tournament_start(target.tournament_id)
    edges = []
    for m in window:
        if not m.completed:
            continue
        if params is None:
            edges.append(WeightedEdge(m.loser_id, m.winner_id, 1.0, m.match_id))
        else:
            edges.append(edge_weight(m, store.tournament(m.tournament_id), target, start, params))
    names = {pid: store.player_name(pid) for e in edges for pid in (e.source, e.target)}
    return MatchGraph.from_edges(edges, names)


def window_graph(store: MatchStore, target_id: int, params: WeightParams | None,
                 age_years: int | None = None) -> MatchGraph:
    target = store.tournament(target_id)
    age = age_years if age_years is not None else params.age_years
    return build_graph(store, query_window(store, target_id, age), target, params)


def transition_matrix(graph: MatchGraph) -> tuple[sparse.csr_matrix, np.ndarray]:
    """Row-stochastic transition matrix and the dangling-node mask."""
    n = len(graph.nodes)
    index = {node: i for i, node in enumerate(graph.nodes)}
    rows = np.fromiter((index[e.source] for e in graph.edges), dtype=np.int64, count=len(graph.edges))
    cols = np.fromiter((index[e.target] for e in graph.edges), dtype=np.int64, count=len(graph.edges))
    vals = np.fromiter((e.weight for e in graph.edges), dtype=float, count=len(graph.edges))
    weights = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    out = np.asarray(weights.sum(axis=1)).ravel()
    dangling = out == 0
    inv = np.divide(1.0, out, out=np.zeros(n), where=~dangling)
    return sparse.diags(inv) @ weights, dangling


def compute_pagerank(graph: MatchGraph, config: PageRankConfig = PageRankConfig()) -> dict[int, float]:
    n = len(graph.nodes)
    if n == 0:
        return {}
    P, dangling = transition_matrix(graph)
    PT = P.T.tocsr()
    d = config.damping
    x = np.full(n, 1.0 / n)
    residual = np.inf
    for iteration in range(1, config.max_iterations + 1):
        x_new = d * (PT @ x + x[dangling].sum() / n) + (1.0 - d) / n
        x_new /= x_new.sum()
        residual = np.abs(x_new - x).sum()
        x = x_new
        if residual < config.tolerance:
            logger.debug("pagerank converged in %d iterations", iteration)
            return dict(zip(graph.nodes, x.tolist()))
    raise ConvergenceError(config.max_iterations, residual)


@dataclass(frozen=True)
class RatingEntry:
    position: int
    player_id: int
    name: str
    score: float


@dataclass(frozen=True)
class RatingTable:
    target_tournament_id: int | None
    entries: tuple[RatingEntry, ...]

    def positions(self) -> dict[int, int]:
        return {e.player_id: e.position for e in self.entries}

    def to_tsv(self) -> str:
        lines = ["rank\tplayer\tscore"]
        lines.extend(f"{e.position}\t{e.name}\t{e.score:.10g}" for e in self.entries)
        return "\n".join(lines) + "\n"


def order_scores(scores: Mapping[int, float], names: Mapping[int, str]) -> list[int]:
    """Players by descending score; near-equal runs (within TIE_RTOL) by name."""
    by_score = sorted(scores, key=lambda p: (-scores[p], names[p], p))
    ordered: list[int] = []
    group: list[int] = []
    for pid in by_score:
        if group and scores[group[-1]] - scores[pid] > TIE_RTOL * scores[group[-1]]:
            ordered.extend(sorted(group, key=lambda p: (names[p], p)))
            group = []
        group.append(pid)
    ordered.extend(sorted(group, key=lambda p: (names[p], p)))
    return ordered


def rating_table(scores: Mapping[int, float], names: Mapping[int, str],
                 target_tournament_id: int | None = None) -> RatingTable:
    order = order_scores(scores, names)
    entries = tuple(RatingEntry(i, pid, names[pid], scores[pid]) for i, pid in enumerate(order, start=1))
    return RatingTable(target_tournament_id, entries)


def rank_players(graph: MatchGraph, config: PageRankConfig = PageRankConfig(),
                 target_tournament_id: int | None = None) -> RatingTable:
    return rating_table(compute_pagerank(graph, config), graph.names, target_tournament_id)
