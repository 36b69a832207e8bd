import pytest

from tennisrank.errors import EvaluatorError
from tennisrank.search import (
    COORDINATES,
    HitRateEvaluator,
    SearchGrid,
    SearchState,
    coordinate_search,
    sample_test_set,
    separable_objective,
    sweep_parameter,
)
from tennisrank.weights import WeightParams

from synth import season_rows, store_from

INIT = WeightParams(5, 5.0, 0.5, 1.3)


def neighbours(grid, params):
    for c in COORDINATES:
        for v in grid.values(c):
            if v != getattr(params, c):
                yield params.with_value(c, v)


def test_single_value_grid_keeps_state():
    grid = SearchGrid(surface_factor=(0.5,))
    state = SearchState(INIT, 1.0)
    assert not sweep_parameter(state, "surface_factor", grid, lambda p: 1.0)
    assert state.best == INIT and len(state.trace) == 1


def test_quadratic_on_surface():
    state = SearchState(INIT, -1.0)
    assert sweep_parameter(state, "surface_factor", SearchGrid(), lambda p: -(p.surface_factor - 0.3) ** 2)
    assert state.best.surface_factor == 0.3
    assert len(state.trace) == 11


def test_ties_keep_incumbent():
    state = coordinate_search(SearchGrid(), lambda p: 0.5, INIT)
    assert state.best == INIT and state.converged and state.rounds == 1
    assert all(e.score == 0.5 for e in state.trace)


def test_separable_reaches_optimum_in_one_round():
    state = coordinate_search(SearchGrid(), separable_objective(), INIT)
    assert state.best.as_tuple() == (4, 5.0, 0.3, 1.7)
    # one improving round, then one confirming round with no adoption
    assert state.rounds == 2 and state.converged
    first_round = [e for e in state.trace if e.round == 1]
    assert len(first_round) == sum(len(SearchGrid().values(c)) for c in COORDINATES)


def coupled(p):
    # non-separable: surface and round interact, with a ridge off the axes
    return -((p.surface_factor - 0.6) ** 2 + (p.round_base - 1.0 - p.surface_factor) ** 2
             + 0.8 * (p.surface_factor - 0.2) * (p.round_base - 1.4)) - 0.01 * abs(p.age_years - 3)


def test_non_separable_local_optimum():
    grid = SearchGrid()
    state = coordinate_search(grid, coupled, INIT)
    assert state.converged
    best = coupled(state.best)
    assert state.best_score == best
    assert all(coupled(n) <= best for n in neighbours(grid, state.best))
    # the final round made no adoption
    last = [e for e in state.trace if e.round == state.rounds]
    assert all(e.score <= best for e in last)


def test_best_score_monotone():
    state = coordinate_search(SearchGrid(), coupled, INIT)
    running = state.trace[0].score
    for e in state.trace:
        running = max(running, e.score)
    assert running == state.best_score


def test_evaluator_failure_reports_params():
    def bad(p):
        if p.surface_factor == 0.7:
            raise RuntimeError("boom")
        return 0.0

    with pytest.raises(EvaluatorError) as info:
        coordinate_search(SearchGrid(), bad, INIT)
    assert info.value.params.surface_factor == 0.7


def test_grid_validation():
    with pytest.raises(ValueError):
        SearchGrid(surface_factor=())
    with pytest.raises(ValueError):
        SearchGrid(round_base=(1.5, 1.2))
    with pytest.raises(ValueError):
        SearchGrid(surface_factor=(1.5,))


def test_real_evaluator_reproducible():
    store = store_from(season_rows(seed=9))
    a = sample_test_set(store, [2004, 2005], per_year=3, seed=42)
    b = sample_test_set(store, [2004, 2005], per_year=3, seed=42)
    assert a == b and len(a) == 6
    years = {store.tournament(t).year for t in a}
    assert years == {2004, 2005}
    grid = SearchGrid(age_years=(1, 2), decay_lambda=(0.2, 5.0), surface_factor=(0.3, 1.0), round_base=(1.0, 1.7))
    init = WeightParams(2, 5.0, 0.3, 1.7)
    ev1, ev2 = HitRateEvaluator(store, a), HitRateEvaluator(store, b)
    s1, s2 = coordinate_search(grid, ev1, init), coordinate_search(grid, ev2, init)
    assert s1.trace_tsv() == s2.trace_tsv()
    assert 0 < s1.best_score <= 1
    assert len(ev1.cache) <= 2 ** 4
