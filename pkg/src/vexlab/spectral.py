"""Spectral utilities: normalized Laplacian gap, stationary distribution,
the degree-ratio expansion bound, and Fiedler sweep cuts for edge expansion.

Dense symmetric eigensolves only (``numpy.linalg.eigh``); graphs here are
desk scale.  Results are deterministic for a fixed NumPy build.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .graphs import Graph, vertex_expansion


def normalized_laplacian(graph: Graph) -> np.ndarray:
    """I - D^{-1/2} A D^{-1/2}; rows of isolated vertices are zeroed."""
    A = graph.adjacency_matrix()
    deg = A.sum(axis=1)
    inv_sqrt = np.zeros_like(deg)
    pos = deg > 0
    inv_sqrt[pos] = 1.0 / np.sqrt(deg[pos])
    L = -inv_sqrt[:, None] * A * inv_sqrt[None, :]
    L[np.arange(graph.n), np.arange(graph.n)] = np.where(pos, 1.0, 0.0)
    return L


def spectral_gap(graph: Graph) -> float:
    """Second-smallest eigenvalue of the normalized Laplacian.

    Degenerate inputs (isolated vertices, fewer than two vertices) return
    0.0; disconnected graphs return ~0 from the multiplicity of the zero
    eigenvalue.
    """
    if graph.n < 2 or np.any(graph.degrees() == 0):
        return 0.0
    vals = np.linalg.eigvalsh(normalized_laplacian(graph))
    return float(max(vals[1], 0.0))


def stationary_distribution(graph: Graph) -> np.ndarray:
    """Degree-proportional distribution mu(i) = deg(i) / (2m)."""
    deg = graph.degrees()
    total = deg.sum()
    if total == 0:
        raise ValueError("stationary distribution undefined on an edgeless graph")
    return deg / total


def expansion_lower_bound(graph: Graph, X: np.ndarray,
                          gap: float | None = None) -> tuple[float, float]:
    """(edge quadratic form, its degree-ratio lower bound) for a vector X.

    The bound is (1/r^2) * (gap * d / n) * sum over unordered vertex pairs
    of (X_i - X_j)^2, with d the minimum degree and r the max/min degree
    ratio.  Valid whenever the graph is connected.
    """
    X = np.asarray(X, dtype=np.float64)
    deg = graph.degrees()
    d = int(deg.min())
    if d == 0:
        raise ValueError("expansion bound needs minimum degree >= 1")
    r = deg.max() / d
    if gap is None:
        gap = spectral_gap(graph)
    e = np.asarray(graph.edges)
    edge_form = float(((X[e[:, 0]] - X[e[:, 1]]) ** 2).sum()) if len(e) else 0.0
    n = graph.n
    # sum over unordered pairs = n*sum(X^2) - (sum X)^2
    all_pairs = float(n * (X ** 2).sum() - X.sum() ** 2)
    bound = (1.0 / r ** 2) * (gap * d / n) * all_pairs
    return edge_form, bound


@dataclass(frozen=True)
class SweepCut:
    """Best prefix of the Fiedler order by edge-cut count."""

    subset: tuple[int, ...]
    edge_cut: int
    vertex_boundary: int
    phi_vertex: Fraction


def fiedler_vector(graph: Graph) -> np.ndarray:
    L = normalized_laplacian(graph)
    _, vecs = np.linalg.eigh(L)
    return vecs[:, 1]


def spectral_sweep_edge_cut(graph: Graph, balance: tuple[float, float] = (0.25, 0.75)) -> SweepCut:
    """Minimum edge cut among balanced prefixes of the Fiedler order.

    Prefix sizes are restricted to ``[balance[0]*n, balance[1]*n]``; ties
    break to the smaller prefix.  The report carries the cut's vertex
    boundary for edge-vs-vertex comparisons.
    """
    n = graph.n
    order = np.lexsort((np.arange(n), fiedler_vector(graph)))
    pos = np.empty(n, dtype=np.int64)
    pos[order] = np.arange(n)
    lo = max(1, int(np.ceil(balance[0] * n)))
    hi = min(n - 1, int(np.floor(balance[1] * n)))
    if lo > hi:
        raise ValueError("balance window admits no prefix")
    e = np.asarray(graph.edges)
    pi, pj = pos[e[:, 0]], pos[e[:, 1]]
    lo_pos, hi_pos = np.minimum(pi, pj), np.maximum(pi, pj)
    # edge {i,j} crosses prefix of size k iff exactly one endpoint is among
    # the first k positions: lo_pos < k <= hi_pos
    sizes = np.arange(lo, hi + 1)
    cuts = ((lo_pos[None, :] < sizes[:, None]) & (sizes[:, None] <= hi_pos[None, :])).sum(axis=1)
    k = int(sizes[int(np.argmin(cuts))])
    subset = tuple(sorted(int(v) for v in order[:k]))
    report = vertex_expansion(graph, subset, method="spectral-sweep")
    return SweepCut(subset, int(cuts[k - lo]), report.boundary, report.phi)
