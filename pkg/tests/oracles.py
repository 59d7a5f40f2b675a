"""Independent brute-force oracles used to freeze expected values.

Everything here is written straight from the definitions, with no imports
from the library under test: subsets are enumerated with itertools, phi
values are exact Fractions, and Laplacian forms are built as dense
matrices.  Tests compare library output against these.
"""

from fractions import Fraction
from itertools import combinations

import numpy as np


def boundary_vertices(n, edges, subset):
    """{j outside subset adjacent to subset} by direct scan of the edge list."""
    inside = set(subset)
    out = set()
    for i, j in edges:
        if i in inside and j not in inside:
            out.add(j)
        if j in inside and i not in inside:
            out.add(i)
    return out


def phi_vertex(n, edges, subset):
    """Exact phi^V(subset) = n * (|N(S)| + |N(V\\S)|) / (|S| |V\\S|)."""
    inside = set(subset)
    rest = set(range(n)) - inside
    b = len(boundary_vertices(n, edges, inside)) + len(boundary_vertices(n, edges, rest))
    return Fraction(n * b, len(inside) * len(rest))


def phi_vertex_asym(n, edges, subset):
    inside = set(subset)
    b = len(boundary_vertices(n, edges, inside))
    return Fraction(n * b, len(inside) * (n - len(inside)))


def balanced_minimum(n, edges):
    """Exhaustive minimum of phi^V over |S| = n/2, lexicographically first.

    Enumerates every half-sized subset in lexicographic order (not just
    those containing vertex 0) so it stays independent of any symmetry
    argument the implementation might use.
    """
    best = None
    best_set = None
    for subset in combinations(range(n), n // 2):
        phi = phi_vertex(n, edges, subset)
        if best is None or phi < best:
            best = phi
            best_set = subset
    return best, best_set


def dense_weighted_laplacian(n, weights):
    """L for symmetric weights w[{i,j}] = Y_ij + Y_ji, as an explicit matrix."""
    L = np.zeros((n, n))
    for (i, j), w in weights.items():
        L[i, i] += w
        L[j, j] += w
        L[i, j] -= w
        L[j, i] -= w
    return L


def random_graph(rng, n, p):
    """Edge list of G(n, p) drawn with the supplied numpy Generator."""
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges.append((i, j))
    return edges


def random_connected_graph(rng, n, p):
    """G(n, p) resampled until connected (plus a spanning path fallback)."""
    for _ in range(200):
        edges = random_graph(rng, n, p)
        if _is_connected(n, edges):
            return edges
    edges = sorted(set(random_graph(rng, n, p)) | {(i, i + 1) for i in range(n - 1)})
    return edges


def _is_connected(n, edges):
    if n <= 1:
        return True
    adj = {i: [] for i in range(n)}
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = {0}
    stack = [0]
    while stack:
        for k in adj[stack.pop()]:
            if k not in seen:
                seen.add(k)
                stack.append(k)
    return len(seen) == n
