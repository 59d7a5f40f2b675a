"""Undirected graphs, vertex-expansion metrics, and exact cut reports.

Vertices are the integers ``0..n-1``.  Expansion values are exact
:class:`fractions.Fraction`; floating point enters only through the
spectral helpers in :mod:`vexlab.spectral`.  All types are immutable
after construction and safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping

import numpy as np

Edge = tuple[int, int]

BRUTEFORCE_CAP = 16


def _norm_edge(i: int, j: int) -> Edge:
    if i == j:
        raise ValueError(f"self-loop at vertex {i}")
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph with an optional adversary tag per edge."""

    n: int
    edges: tuple[Edge, ...]
    adversary: frozenset[Edge] = frozenset()

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError("graph needs at least one vertex")
        seen = set()
        for i, j in self.edges:
            if not (0 <= i < j < self.n):
                raise ValueError(f"bad edge ({i}, {j}) for n={self.n}")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
        if not self.adversary <= seen:
            raise ValueError("adversary tags must reference existing edges")
        nbrs = [[] for _ in range(self.n)]
        for i, j in self.edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        object.__setattr__(self, "_nbrs", tuple(tuple(sorted(a)) for a in nbrs))
        object.__setattr__(self, "_edge_set", frozenset(seen))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]],
                   adversary: Iterable[tuple[int, int]] = ()) -> "Graph":
        """Build a graph, normalising edge orientation and ordering."""
        norm = sorted({_norm_edge(i, j) for i, j in edges})
        adv = frozenset(_norm_edge(i, j) for i, j in adversary)
        return cls(n, tuple(norm), adv)

    # -- basic queries ----------------------------------------------------

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self._nbrs[i]

    def degree(self, i: int) -> int:
        return len(self._nbrs[i])

    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self._nbrs], dtype=np.int64)

    def has_edge(self, i: int, j: int) -> bool:
        return _norm_edge(i, j) in self._edge_set

    def edge_set(self) -> frozenset[Edge]:
        return self._edge_set

    @property
    def m(self) -> int:
        return len(self.edges)

    def adjacency_matrix(self, dtype=np.float64) -> np.ndarray:
        A = np.zeros((self.n, self.n), dtype=dtype)
        if self.edges:
            e = np.asarray(self.edges)
            A[e[:, 0], e[:, 1]] = 1
            A[e[:, 1], e[:, 0]] = 1
        return A

    # -- derived graphs ---------------------------------------------------

    def base_graph(self) -> "Graph":
        """The graph with adversary-tagged edges removed."""
        if not self.adversary:
            return self
        keep = tuple(e for e in self.edges if e not in self.adversary)
        return Graph(self.n, keep)

    def with_edges(self, extra: Iterable[tuple[int, int]], tag_adversary: bool) -> "Graph":
        """A copy with ``extra`` edges added; existing edges keep their tags."""
        new = {_norm_edge(i, j) for i, j in extra} - self._edge_set
        adv = self.adversary | new if tag_adversary else self.adversary
        return Graph(self.n, tuple(sorted(self._edge_set | new)), adv)

    def __repr__(self):  # keep reprs short; edge lists can be large
        return f"Graph(n={self.n}, m={self.m}, adversary={len(self.adversary)})"


@dataclass(frozen=True)
class WeightedDigraph:
    """Nonnegative rational weights on the two orientations of a graph's edges.

    ``weights[(i, j)]`` is the weight on the directed edge i -> j; support
    must sit on edges of the underlying undirected graph.
    """

    n: int
    weights: Mapping[tuple[int, int], Fraction]

    def __post_init__(self):
        for (i, j), w in self.weights.items():
            if not (0 <= i < self.n and 0 <= j < self.n and i != j):
                raise ValueError(f"bad directed pair ({i}, {j})")
            if w < 0:
                raise ValueError(f"negative weight on ({i}, {j})")

    @classmethod
    def on_graph(cls, graph: Graph, weights: Mapping[tuple[int, int], Fraction]) -> "WeightedDigraph":
        for i, j in weights:
            if not graph.has_edge(i, j):
                raise ValueError(f"weight on non-edge ({i}, {j})")
        return cls(graph.n, dict(weights))

    def symmetric_weights(self) -> dict[Edge, Fraction]:
        """Per-undirected-edge weights Y_ij + Y_ji (zeros dropped)."""
        sym: dict[Edge, Fraction] = {}
        for (i, j), w in self.weights.items():
            if w:
                e = _norm_edge(i, j)
                sym[e] = sym.get(e, Fraction(0)) + w
        return sym

    def row_sums(self) -> list[Fraction]:
        sums = [Fraction(0)] * self.n
        for (i, _), w in self.weights.items():
            sums[i] += w
        return sums

    def dense_laplacian(self) -> np.ndarray:
        L = np.zeros((self.n, self.n))
        for (i, j), w in self.symmetric_weights().items():
            fw = float(w)
            L[i, i] += fw
            L[j, j] += fw
            L[i, j] -= fw
            L[j, i] -= fw
        return L


@dataclass(frozen=True)
class CutReport:
    """One vertex cut with its exact expansion values."""

    subset: tuple[int, ...]
    size: int
    boundary: int
    phi: Fraction
    phi_asym: Fraction
    method: str = ""
    params: dict = field(default_factory=dict)

    def to_jsonable(self) -> dict:
        return {
            "A": list(self.subset),
            "sizeA": self.size,
            "boundary": self.boundary,
            "phi": {"num": self.phi.numerator, "den": self.phi.denominator},
            "phiAsym": {"num": self.phi_asym.numerator, "den": self.phi_asym.denominator},
            "method": self.method,
            "params": self.params,
        }


# ---------------------------------------------------------------------------
# expansion metrics


def vertex_boundary(graph: Graph, subset: Iterable[int]) -> frozenset[int]:
    """N(S): vertices outside ``subset`` with a neighbor inside it."""
    inside = frozenset(subset)
    if not inside or len(inside) >= graph.n:
        raise ValueError("subset must be nonempty and proper")
    out = set()
    for i in inside:
        for j in graph.neighbors(i):
            if j not in inside:
                out.add(j)
    return frozenset(out)


def vertex_expansion(graph: Graph, subset: Iterable[int], method: str = "",
                     params: dict | None = None) -> CutReport:
    """Exact phi^V and phi^{V,a} of a nonempty proper subset."""
    inside = frozenset(subset)
    n = graph.n
    if not inside or len(inside) >= n:
        raise ValueError("subset must be nonempty and proper")
    rest = frozenset(range(n)) - inside
    b_in = vertex_boundary(graph, inside)
    b_out = vertex_boundary(graph, rest)
    boundary = len(b_in) + len(b_out)
    k = len(inside)
    phi = Fraction(n * boundary, k * (n - k))
    phi_a = Fraction(n * len(b_in), k * (n - k))
    return CutReport(tuple(sorted(inside)), k, boundary, phi, phi_a,
                     method=method, params=params or {})


def balanced_vertex_expansion_bruteforce(graph: Graph, cap: int = BRUTEFORCE_CAP) -> CutReport:
    """Exact minimiser of phi^V over half-sized subsets, small n only.

    Ties break to the lexicographically smallest subset.  Because the
    minimiser family is closed under complement, the lexicographically
    smallest one always contains vertex 0, so the search fixes vertex 0.
    """
    n = graph.n
    if n % 2 != 0:
        raise ValueError("balanced expansion needs even n")
    if n > cap:
        raise ValueError(f"n={n} above brute-force cap {cap}")
    best: CutReport | None = None
    for rest in combinations(range(1, n), n // 2 - 1):
        report = vertex_expansion(graph, (0,) + rest, method="bruteforce")
        if best is None or report.phi < best.phi:
            best = report
    assert best is not None
    return best


def laplacian_quadform(Y: WeightedDigraph, X: np.ndarray) -> float:
    """X^T L(Y) X = sum over edges of (Y_ij + Y_ji) (X_i - X_j)^2."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape != (Y.n,):
        raise ValueError(f"vector length {X.shape} does not match n={Y.n}")
    total = 0.0
    for (i, j), w in Y.symmetric_weights().items():
        d = X[i] - X[j]
        total += float(w) * d * d
    return total


# ---------------------------------------------------------------------------
# small named graphs (handy in tests and demos)


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, combinations(range(n), 2))


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, ((i, i + 1) for i in range(n - 1)))


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, ((i, (i + 1) % n) for i in range(n)))


# ---------------------------------------------------------------------------
# serialization: JSON and plain edge-list text, both canonical


def graph_to_json(graph: Graph) -> str:
    tags = ["adversary" if e in graph.adversary else "base" for e in graph.edges]
    payload = {
        "kind": "graph",
        "n": graph.n,
        "edges": [list(e) for e in graph.edges],
        "tags": tags,
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def graph_from_json(text: str) -> Graph:
    payload = json.loads(text)
    if payload.get("kind", "graph") != "graph":
        raise ValueError("not a graph payload")
    edges = [tuple(e) for e in payload["edges"]]
    tags = payload.get("tags") or ["base"] * len(edges)
    adv = [e for e, t in zip(edges, tags) if t == "adversary"]
    return Graph.from_edges(payload["n"], edges, adv)


def graph_to_edgelist(graph: Graph) -> str:
    """One "i j" pair per line; a leading comment records n for round-trips."""
    lines = [f"# n={graph.n}"]
    lines.extend(f"{i} {j}" for i, j in graph.edges)
    return "\n".join(lines) + "\n"


def graph_from_edgelist(text: str) -> Graph:
    n = None
    edges = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.startswith("n="):
                n = int(body[2:])
            continue
        i, j = line.split()
        edges.append((int(i), int(j)))
    if n is None:
        n = max((max(e) for e in edges), default=-1) + 1
    return Graph.from_edges(n, edges)
