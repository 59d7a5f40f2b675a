"""Spectral gap values, the stationary distribution, and sweep cuts."""

import numpy as np
import pytest

from vexlab.graphs import Graph, complete_graph, cycle_graph, path_graph
from vexlab.instances import gen_expander
from vexlab.spectral import (expansion_lower_bound, spectral_gap,
                             spectral_sweep_edge_cut, stationary_distribution)


def test_gap_complete_graphs_closed_form():
    for n in range(4, 9):
        assert spectral_gap(complete_graph(n)) == pytest.approx(n / (n - 1), abs=1e-8)


def test_gap_c4_and_disconnected():
    assert spectral_gap(cycle_graph(4)) == pytest.approx(1.0, abs=1e-8)
    two = Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    assert spectral_gap(two) == pytest.approx(0.0, abs=1e-8)
    isolated = Graph.from_edges(4, [(0, 1)])
    assert spectral_gap(isolated) == 0.0


def test_stationary_distribution():
    np.testing.assert_allclose(stationary_distribution(complete_graph(3)), [1 / 3] * 3)
    star = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
    np.testing.assert_allclose(stationary_distribution(star), [1 / 2, 1 / 6, 1 / 6, 1 / 6])
    assert stationary_distribution(path_graph(7)).sum() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        stationary_distribution(Graph.from_edges(3, []))


def test_expansion_lower_bound_on_expanders():
    rng = np.random.default_rng(5)
    graph, gap, (dmin, dmax) = gen_expander(60, 8, 0.2, 2.0, seed=99)
    for _ in range(100):
        X = rng.normal(size=60)
        edge_form, bound = expansion_lower_bound(graph, X, gap=gap)
        assert edge_form >= bound - 1e-9 * max(1.0, abs(edge_form))


def test_sweep_cut_finds_planted_edge_cut():
    # two dense blocks joined by a single edge: the sweep must cut between them
    edges = [(i, j) for i in range(10) for j in range(i + 1, 10)]
    edges += [(i, j) for i in range(10, 20) for j in range(i + 1, 20)]
    edges += [(0, 10)]
    g = Graph.from_edges(20, edges)
    sweep = spectral_sweep_edge_cut(g)
    assert sweep.edge_cut == 1
    assert set(sweep.subset) in ({frozenset(range(10))}, {frozenset(range(10, 20))}) or \
        sorted(sweep.subset) in (list(range(10)), list(range(10, 20)))
    assert sweep.vertex_boundary == 2
