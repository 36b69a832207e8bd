import networkx as nx
import numpy as np
import pytest

from tennisrank.dataset import query_window
from tennisrank.errors import ConvergenceError
from tennisrank.ranking import (
    MatchGraph,
    PageRankConfig,
    build_graph,
    compute_pagerank,
    rank_players,
    rating_table,
    window_graph,
)
from tennisrank.weights import WeightParams, edge_weight

from oracles import as_match_graph, dense_pagerank, random_graph
from synth import match_row, store_from, synthetic_store


def scores_vec(graph, scores):
    return np.array([scores[n] for n in graph.nodes])


def test_two_node_oracle():
    g = as_match_graph([(0, 1, 1.0)])
    s = compute_pagerank(g)
    # B is dangling: a = 0.075 + 0.425 b and a + b = 1, so a = 0.5 / 1.425
    assert s[0] == pytest.approx(0.5 / 1.425, abs=1e-7)
    assert s[1] == pytest.approx(0.649122807, abs=1e-7)
    assert np.allclose(dense_pagerank(2, [(0, 1, 1.0)]), [s[0], s[1]], atol=1e-9)


def test_symmetric_two_cycle():
    s = compute_pagerank(as_match_graph([(0, 1, 0.4), (1, 0, 0.4)]))
    assert s[0] == pytest.approx(0.5, abs=1e-12) and s[1] == pytest.approx(0.5, abs=1e-12)


def test_empty_graph():
    g = MatchGraph.from_edges([], {})
    assert compute_pagerank(g) == {}
    assert rank_players(g).entries == ()


def test_random_graphs_match_dense_solve():
    rng = np.random.default_rng(7)
    for _ in range(30):
        n, edges = random_graph(rng, max_nodes=5)
        g = as_match_graph(edges)
        got = scores_vec(g, compute_pagerank(g))
        assert np.max(np.abs(got - dense_pagerank(n, edges))) < 1e-7
        assert got.sum() == pytest.approx(1.0, abs=1e-6)


def test_unit_weights_match_networkx():
    rng = np.random.default_rng(11)
    for _ in range(25):
        n, edges = random_graph(rng, max_nodes=12)
        g = as_match_graph([(u, v, 1.0) for u, v, _ in edges])
        ref = nx.MultiDiGraph()
        ref.add_nodes_from(range(n))
        ref.add_edges_from((u, v) for u, v, _ in edges)
        expected = nx.pagerank(ref, alpha=0.85, tol=1e-13, max_iter=10000)
        got = compute_pagerank(g)
        assert max(abs(got[k] - expected[k]) for k in range(n)) < 1e-7


def test_scaling_invariance():
    rng = np.random.default_rng(3)
    for k in (1e-6, 0.37, 250.0):
        n, edges = random_graph(rng)
        a = compute_pagerank(as_match_graph(edges), PageRankConfig(tolerance=1e-13))
        b = compute_pagerank(as_match_graph([(u, v, w * k) for u, v, w in edges]), PageRankConfig(tolerance=1e-13))
        assert max(abs(a[x] - b[x]) for x in a) < 1e-9


def test_star_winner_first():
    g = as_match_graph([(1, 0, 1.0), (2, 0, 1.0), (3, 0, 1.0)])
    assert rank_players(g).entries[0].player_id == 0


def test_parallel_edges_kept():
    store = store_from([
        match_row("A Cup", "2004-03-01", "Alpha A.", "Beta B."),
        match_row("B Cup", "2004-04-05", "Alpha A.", "Beta B."),
        match_row("Target", "2004-06-07", "Alpha A.", "Beta B."),
    ])
    target = store.find_tournament("Target", 2004)
    g = window_graph(store, target.tournament_id, WeightParams.identity())
    assert len(g.nodes) == 2 and len(g.edges) == 2
    alpha = [p for p in g.nodes if g.names[p] == "Alpha A."][0]
    assert all(e.target == alpha for e in g.edges)


def test_graph_weights_recomputed_independently():
    store = store_from([
        match_row("A Cup", "2004-03-01", "Alpha A.", "Beta B.", surface="Clay", round_="Semifinals"),
        match_row("B Cup", "2004-04-05", "Gamma C.", "Alpha A.", series="Masters", round_="Quarterfinals"),
        match_row("C Cup", "2004-05-03", "Beta B.", "Gamma C.", series="Grand Slam", surface="Grass",
                  sets="6-4 6-4 6-4", best_of="5"),
        match_row("Target", "2004-06-07", "Alpha A.", "Beta B."),
    ])
    target = store.find_tournament("Target", 2004)
    start = store.tournament_start(target.tournament_id)
    p = WeightParams(2, 5.0, 0.3, 1.7)
    window = query_window(store, target.tournament_id, 2)
    g = build_graph(store, window, target, p)
    assert len(g.nodes) == 3 and len(g.edges) == 3
    # ATP250 SF on clay (v=2+3), Masters QF (v=3+1), Slam final on grass (v=1)
    t = {"A Cup": 14 / 52, "B Cup": 9 / 52, "C Cup": 5 / 52}
    v = {"A Cup": 5, "B Cup": 4, "C Cup": 1}
    for m, e in zip(window, g.edges):
        name = store.tournament(m.tournament_id).name
        surf = 1.0 if store.tournament(m.tournament_id).surface == target.surface else 0.3
        expected = np.exp(-5.0 * t[name]) * surf * 1.7 ** -(v[name] - 1)
        assert e.weight == pytest.approx(expected, rel=1e-12)
        assert e.weight == edge_weight(m, store.tournament(m.tournament_id), target, start, p).weight


def test_ties_broken_by_name():
    table = rating_table({1: 0.25, 2: 0.25, 3: 0.5}, {1: "Zed Z.", 2: "Abe A.", 3: "Mid M."})
    assert [e.name for e in table.entries] == ["Mid M.", "Abe A.", "Zed Z."]
    assert [e.position for e in table.entries] == [1, 2, 3]
    # last-ulp differences still count as a tie
    table = rating_table({1: 0.3, 2: 0.3 * (1 - 1e-14)}, {1: "Zed Z.", 2: "Abe A."})
    assert [e.name for e in table.entries] == ["Abe A.", "Zed Z."]
    # a symmetric cycle ties exactly
    g = as_match_graph([(0, 1, 1.0), (1, 0, 1.0)])
    assert [e.name for e in rank_players(g).entries] == ["P000", "P001"]


def test_simple_sort_and_sum():
    table = rating_table({7: 0.4, 9: 0.6}, {7: "B", 9: "A"})
    assert table.positions() == {9: 1, 7: 2}
    assert table.to_tsv() == "rank\tplayer\tscore\n1\tA\t0.6\n2\tB\t0.4\n"


def test_rerun_byte_identical():
    store = synthetic_store(seed=4)
    tid = store.tournaments_in_years([2005])[0].tournament_id
    p = WeightParams(2, 5.0, 0.3, 1.7)
    a = rank_players(window_graph(store, tid, p)).to_tsv()
    b = rank_players(window_graph(store, tid, p)).to_tsv()
    assert a == b
    total = sum(float(line.split("\t")[2]) for line in a.splitlines()[1:])
    assert total == pytest.approx(1.0, abs=1e-6)


def test_non_convergence_raises():
    g = as_match_graph([(0, 1, 1.0), (1, 2, 1.0), (2, 0, 0.5), (2, 1, 0.5)])
    with pytest.raises(ConvergenceError) as info:
        compute_pagerank(g, PageRankConfig(tolerance=1e-15, max_iterations=2))
    assert info.value.iterations == 2 and info.value.residual > 0
