"""Graph metrics against the definition-level oracles, plus serialization."""

from fractions import Fraction

import numpy as np
import pytest

import oracles
from vexlab.graphs import (Graph, WeightedDigraph, balanced_vertex_expansion_bruteforce,
                           complete_graph, cycle_graph, graph_from_edgelist,
                           graph_from_json, graph_to_edgelist, graph_to_json,
                           laplacian_quadform, path_graph, vertex_boundary,
                           vertex_expansion)


def test_graph_validation():
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(0, 0)])
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(0, 5)])
    g = Graph.from_edges(4, [(1, 0), (0, 1), (2, 3)])  # normalised and deduped
    assert g.edges == ((0, 1), (2, 3))


def test_vertex_boundary_examples():
    assert vertex_boundary(complete_graph(4), {0, 1}) == frozenset({2, 3})
    assert vertex_boundary(path_graph(4), {0, 1}) == frozenset({2})
    edgeless = Graph.from_edges(5, [])
    assert vertex_boundary(edgeless, {0}) == frozenset()
    with pytest.raises(ValueError):
        vertex_boundary(path_graph(4), set())
    with pytest.raises(ValueError):
        vertex_boundary(path_graph(4), {0, 1, 2, 3})


def test_vertex_expansion_examples():
    assert vertex_expansion(complete_graph(4), {0, 1}).phi == 4
    rep = vertex_expansion(path_graph(4), {0, 1})
    assert rep.phi == 2 and rep.phi_asym == 1 and rep.boundary == 2
    two_triangles = Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    assert vertex_expansion(two_triangles, {0, 1, 2}).phi == 0


def test_expansion_complement_symmetry():
    rng = np.random.default_rng(1)
    for _ in range(25):
        n = int(rng.integers(4, 10))
        edges = oracles.random_graph(rng, n, 0.4)
        g = Graph.from_edges(n, edges)
        k = int(rng.integers(1, n))
        subset = set(int(v) for v in rng.choice(n, size=k, replace=False))
        rest = set(range(n)) - subset
        assert vertex_expansion(g, subset).phi == vertex_expansion(g, rest).phi
        assert vertex_expansion(g, subset).phi == oracles.phi_vertex(n, edges, subset)
        assert vertex_expansion(g, subset).phi_asym == oracles.phi_vertex_asym(n, edges, subset)


def test_balanced_bruteforce_frozen_values():
    assert balanced_vertex_expansion_bruteforce(complete_graph(4)).phi == 4
    two_triangles = Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    rep = balanced_vertex_expansion_bruteforce(two_triangles)
    assert rep.phi == 0 and rep.subset == (0, 1, 2)
    # frozen from the enumeration oracle: C6's optimum is a consecutive arc
    rep = balanced_vertex_expansion_bruteforce(cycle_graph(6))
    assert rep.phi == Fraction(8, 3) and rep.subset == (0, 1, 2)


def test_balanced_bruteforce_matches_oracle():
    rng = np.random.default_rng(7)
    for _ in range(10):
        n = int(rng.choice([6, 8]))
        edges = oracles.random_graph(rng, n, 0.35)
        g = Graph.from_edges(n, edges)
        phi, subset = oracles.balanced_minimum(n, edges)
        rep = balanced_vertex_expansion_bruteforce(g)
        assert rep.phi == phi and rep.subset == subset


def test_balanced_bruteforce_domain_errors():
    with pytest.raises(ValueError):
        balanced_vertex_expansion_bruteforce(path_graph(5))
    with pytest.raises(ValueError):
        balanced_vertex_expansion_bruteforce(path_graph(18))


def test_laplacian_quadform():
    g = Graph.from_edges(2, [(0, 1)])
    Y = WeightedDigraph.on_graph(g, {(0, 1): Fraction(1), (1, 0): Fraction(1)})
    assert laplacian_quadform(Y, np.array([1.0, 0.0])) == 2.0
    zero = WeightedDigraph(4, {})
    assert laplacian_quadform(zero, np.array([3.0, -1.0, 2.0, 0.5])) == 0.0
    with pytest.raises(ValueError):
        laplacian_quadform(zero, np.ones(3))


def test_laplacian_quadform_matches_dense():
    rng = np.random.default_rng(3)
    for _ in range(10):
        n = 5
        edges = oracles.random_graph(rng, n, 0.6)
        g = Graph.from_edges(n, edges)
        weights = {}
        for i, j in edges:
            weights[(i, j)] = Fraction(int(rng.integers(0, 9)), 7)
            weights[(j, i)] = Fraction(int(rng.integers(0, 9)), 7)
        Y = WeightedDigraph.on_graph(g, weights)
        X = rng.normal(size=n)
        sym = {e: w for e, w in Y.symmetric_weights().items()}
        L = oracles.dense_weighted_laplacian(n, {e: float(w) for e, w in sym.items()})
        assert laplacian_quadform(Y, X) == pytest.approx(X @ L @ X, abs=1e-12)


def test_weighted_digraph_validation():
    g = path_graph(3)
    with pytest.raises(ValueError):
        WeightedDigraph.on_graph(g, {(0, 2): Fraction(1)})  # not an edge
    with pytest.raises(ValueError):
        WeightedDigraph(3, {(0, 1): Fraction(-1)})


def test_monotone_quadform_in_weights():
    g = cycle_graph(5)
    rng = np.random.default_rng(11)
    X = rng.normal(size=5)
    w0 = {(i, j): Fraction(1, 3) for i, j in g.edges}
    base = laplacian_quadform(WeightedDigraph.on_graph(g, w0), X)
    for e in g.edges:
        bumped = dict(w0)
        bumped[e] = bumped[e] + Fraction(1, 2)
        assert laplacian_quadform(WeightedDigraph.on_graph(g, bumped), X) >= base - 1e-12


def test_json_roundtrip_bit_exact():
    g = Graph.from_edges(5, [(0, 1), (1, 2), (0, 4)], adversary=[(0, 4)])
    text = graph_to_json(g)
    g2 = graph_from_json(text)
    assert g2 == g
    assert graph_to_json(g2) == text


def test_edgelist_roundtrip_bit_exact():
    g = Graph.from_edges(6, [(0, 1), (2, 5), (3, 4)])
    text = graph_to_edgelist(g)
    g2 = graph_from_edgelist(text)
    assert g2.n == g.n and g2.edges == g.edges
    assert graph_to_edgelist(g2) == text
    # n is preserved even with trailing isolated vertices
    g3 = Graph.from_edges(9, [(0, 1)])
    assert graph_from_edgelist(graph_to_edgelist(g3)).n == 9
