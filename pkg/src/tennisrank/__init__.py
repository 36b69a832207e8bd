"""Parametric PageRank rankings for tennis players, with backtesting and victory probabilities."""

from .dataset import (
    Category,
    MatchRecord,
    MatchStore,
    Player,
    Round,
    Surface,
    Tournament,
    build_store,
    load_column_map,
    load_store,
    normalize_player,
    parse_raw_files,
    query_window,
    save_store,
    unify_tournament,
)
from .evaluation import EvalReport, Predictor, PredictorKind, evaluate_tournament, evaluate_years, predict_match
from .probability import LogisticModel, ProbTree, bin_hit_rates, build_tree, fit_logistic, p_victory, roc_curve
from .ranking import MatchGraph, PageRankConfig, RatingTable, build_graph, compute_pagerank, rank_players
from .search import SearchGrid, SearchState, coordinate_search, sweep_parameter
from .weights import WeightParams, aging_weight, edge_weight, instance_weight, surface_weight

__version__ = "0.1.0"
