"""Semi-random planted-cut instance generators and statistical verifiers.

Three families share one instance type:

* the two-sided block model with boundary sets T, T' and a low-degree
  bipartite crossing graph F plus a monotone adversary,
* the simpler planted model whose sides are whole-side expanders with
  arbitrary T x T' edges, and
* the adversarial "hub" family used for the edge-vs-vertex separation
  experiment.

Planted labels put S on ``0..n/2-1`` and S' on ``n/2..n-1``, with the
boundary sets at the low indices of each side; all randomness is drawn
from Philox streams derived from the instance seed.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import rng as rngmod
from .graphs import Edge, Graph, vertex_boundary
from .spectral import spectral_gap

GAP_FLOOR_BIPARTITE = Fraction(1, 288)  # Cheeger floor 1/(2*12^2) for the dense bipartite regime
DEFAULT_EXPANDER_ATTEMPTS = 50


class GenerationError(Exception):
    """Instance construction could not satisfy its postconditions."""


def _as_fraction(x) -> Fraction:
    """Exact fraction from ints, Fractions, strings, or decimal-literal floats."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


# ---------------------------------------------------------------------------
# parameters and the instance record


AdversarySpec = tuple[str, dict]

ADVERSARY_STRATEGIES = ("none", "random-within-sides", "clique-TTprime", "degree-balancer")


def _norm_adversary(spec) -> AdversarySpec:
    if spec is None:
        return ("none", {})
    if isinstance(spec, str):
        return (spec, {})
    name, params = spec
    return (name, dict(params))


@dataclass(frozen=True)
class VbmParams:
    """Parameters of the two-sided block model.

    ``eps1``/``eps2`` are exact fractions of n; boundary sizes are
    floor(eps*n) with a minimum of one vertex whenever eps > 0.
    """

    n: int
    eps1: Fraction
    eps2: Fraction
    p1: float
    p2: float
    c: int
    r: float
    lambda1: float
    lambda2: float
    adversary: AdversarySpec = ("none", {})
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "eps1", _as_fraction(self.eps1))
        object.__setattr__(self, "eps2", _as_fraction(self.eps2))
        object.__setattr__(self, "adversary", _norm_adversary(self.adversary))
        if self.n % 2 != 0 or self.n < 4:
            raise ValueError("n must be even and at least 4")
        for eps in (self.eps1, self.eps2):
            if not 0 <= eps < Fraction(1, 2):
                raise ValueError("eps must lie in [0, 1/2)")
        for p in (self.p1, self.p2):
            if not 0.0 <= p <= 1.0:
                raise ValueError("probabilities must lie in [0, 1]")
        if self.c < 0:
            raise ValueError("c must be >= 0")
        if self.r < 1.0 and (self.lambda1 > 0 or self.lambda2 > 0):
            raise ValueError("degree ratio bound r must be >= 1")
        if self.adversary[0] not in ADVERSARY_STRATEGIES:
            raise ValueError(f"unknown adversary strategy {self.adversary[0]!r}")

    def boundary_size(self, side: int) -> int:
        eps = self.eps1 if side == 0 else self.eps2
        if eps == 0:
            return 0
        return max(1, math.floor(eps * self.n))

    def to_jsonable(self) -> dict:
        return {
            "n": self.n,
            "eps1": [self.eps1.numerator, self.eps1.denominator],
            "eps2": [self.eps2.numerator, self.eps2.denominator],
            "p1": self.p1,
            "p2": self.p2,
            "c": self.c,
            "r": self.r,
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "adversary": [self.adversary[0], self.adversary[1]],
            "seed": self.seed,
        }

    @classmethod
    def from_jsonable(cls, d: Mapping) -> "VbmParams":
        return cls(
            n=d["n"],
            eps1=Fraction(*d["eps1"]),
            eps2=Fraction(*d["eps2"]),
            p1=d["p1"],
            p2=d["p2"],
            c=d["c"],
            r=d["r"],
            lambda1=d["lambda1"],
            lambda2=d["lambda2"],
            adversary=(d["adversary"][0], dict(d["adversary"][1])),
            seed=d["seed"],
        )


@dataclass(frozen=True)
class PlantedInstance:
    """A generated graph together with its planted structure.

    ``expander_edges`` are the step-3 edges per side (used to measure the
    realized degree range and gap); ``F`` is the bipartite crossing graph.
    Adversary edges are tagged on the graph itself.
    """

    graph: Graph
    S: tuple[int, ...]
    T: tuple[int, ...]
    Sp: tuple[int, ...]
    Tp: tuple[int, ...]
    F: tuple[Edge, ...]
    model: str
    params: dict = field(default_factory=dict)
    expander_edges: tuple[tuple[Edge, ...], tuple[Edge, ...]] = ((), ())
    measured_gaps: tuple[float, float] = (0.0, 0.0)
    expander_degree_range: tuple[tuple[int, int], tuple[int, int]] = ((0, 0), (0, 0))

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def adversary_edges(self) -> frozenset[Edge]:
        return self.graph.adversary

    def side_sets(self):
        return frozenset(self.S), frozenset(self.T), frozenset(self.Sp), frozenset(self.Tp)

    def f_degree(self, v: int) -> int:
        return sum(1 for e in self.F if v in e)

    def planted_boundary_size(self) -> int:
        """|N(S)| + |N(S')| on the realized graph."""
        S = frozenset(self.S)
        return len(vertex_boundary(self.graph, S)) + len(
            vertex_boundary(self.graph, frozenset(range(self.n)) - S))

    def boundary_is_planted(self) -> bool:
        """True when the vertex boundary of the planted cut is exactly T u T'."""
        S = frozenset(self.S)
        nb_S = vertex_boundary(self.graph, S)
        nb_Sp = vertex_boundary(self.graph, frozenset(range(self.n)) - S)
        return nb_S == frozenset(self.Tp) and nb_Sp == frozenset(self.T)

    def validate(self) -> None:
        """Check structural invariants; raises GenerationError on violation."""
        S, T, Sp, Tp = self.side_sets()
        interior1, interior2 = S - T, Sp - Tp
        adv = self.adversary_edges
        for i, j in self.graph.edges:
            in_s, in_sp = i in S and j in S, i in Sp and j in Sp
            crossing_tt = (i in T and j in Tp) or (i in Tp and j in T)
            if (i, j) in adv:
                if not (in_s or in_sp or crossing_tt):
                    raise GenerationError(f"non-monotone adversary edge {(i, j)}")
                continue
            inner_rand1 = (i in interior1 and j in T) or (i in T and j in interior1)
            inner_rand2 = (i in interior2 and j in Tp) or (i in Tp and j in interior2)
            within1 = i in interior1 and j in interior1
            within2 = i in interior2 and j in interior2
            if not (within1 or within2 or inner_rand1 or inner_rand2 or crossing_tt):
                raise GenerationError(f"base edge {(i, j)} outside allowed families")
        c = self.params.get("c", 0)
        if c and c >= 1:
            for v in list(T) + list(Tp):
                d = self.f_degree(v)
                if not 1 <= d <= c:
                    raise GenerationError(f"F-degree of {v} is {d}, outside [1, {c}]")


# ---------------------------------------------------------------------------
# building blocks


def degree_for_gap(lambda_target: float, m: int) -> int:
    """Smallest even degree whose random union-of-cycles graph typically
    clears the gap target (Alon-Boppana scale 1 - 2 sqrt(d-1)/d, with margin)."""
    d = 6
    while d < m - 1 and 1.0 - 2.0 * math.sqrt(d - 1) / d < lambda_target + 0.03:
        d += 2
    return min(d, m - 1 if (m - 1) % 2 == 0 else m - 2)


def gen_expander(m: int, d: int, lambda_target: float, r: float, seed,
                 max_attempts: int = DEFAULT_EXPANDER_ATTEMPTS) -> tuple[Graph, float, tuple[int, int]]:
    """Near-regular expander on m vertices via unions of permutation cycles.

    Odd d uses (d-1)/2 cycles plus a perfect matching (hence d*m must be
    even).  Duplicate edges are dropped, then the sample is accepted only
    if the measured normalized-Laplacian gap reaches ``lambda_target`` and
    the degree ratio stays within ``r``; otherwise it is redrawn.

    Returns (graph, measured_gap, (min_degree, max_degree)).
    """
    if d < 3:
        raise ValueError("expander degree must be >= 3")
    if (d * m) % 2 != 0:
        raise ValueError(f"d*m must be even (d={d}, m={m})")
    if m <= d:
        raise ValueError("need m > d")
    gen = seed if isinstance(seed, np.random.Generator) else rngmod.stream(seed, "expander")
    last = ""
    for attempt in range(max_attempts):
        edges: set[Edge] = set()
        cycles, matching = divmod(d, 2)
        for _ in range(cycles):
            perm = gen.permutation(m)
            for k in range(m):
                a, b = int(perm[k]), int(perm[(k + 1) % m])
                edges.add((a, b) if a < b else (b, a))
        if matching:
            perm = gen.permutation(m)
            for k in range(0, m - 1, 2):
                a, b = int(perm[k]), int(perm[k + 1])
                edges.add((a, b) if a < b else (b, a))
        graph = Graph.from_edges(m, edges)
        deg = graph.degrees()
        dmin, dmax = int(deg.min()), int(deg.max())
        if dmin == 0:
            last = "isolated vertex after deduplication"
            continue
        if dmax > r * dmin:
            last = f"degree ratio {dmax}/{dmin} exceeds {r}"
            continue
        gap = spectral_gap(graph)
        accept = gap >= lambda_target if lambda_target > 0 else gap > 1e-9
        if accept:
            return graph, gap, (dmin, dmax)
        last = f"measured gap {gap:.4f} below target {lambda_target}"
    raise GenerationError(
        f"expander target unreachable after {max_attempts} attempts "
        f"(m={m}, d={d}, lambda>={lambda_target}, r<={r}): {last}")


def gen_bipartite_random(L: Sequence[int], R: Sequence[int], p: float, seed,
                         n: int | None = None) -> Graph:
    """Each L x R pair becomes an edge independently with probability p."""
    L, R = sorted(L), sorted(R)
    if set(L) & set(R):
        raise ValueError("L and R must be disjoint")
    if n is None:
        n = max(L + R) + 1
    gen = seed if isinstance(seed, np.random.Generator) else rngmod.stream(seed, "bipartite")
    mask = gen.random((len(L), len(R))) < p
    li, ri = np.nonzero(mask)
    edges = [(L[a], R[b]) for a, b in zip(li, ri)]
    return Graph.from_edges(n, edges)


@dataclass(frozen=True)
class BipartiteReport:
    ratio_L: float
    deg_L: tuple[int, int]
    deg_R: tuple[int, int]
    gap: float
    ratio_ok: bool
    gap_ok: bool


def verify_bipartite_properties(graph: Graph, L: Sequence[int], R: Sequence[int]) -> BipartiteReport:
    """Degree-concentration and Cheeger-floor checks for a random bipartite sample.

    ``ratio_ok`` flags max/min degree on L at most 3; ``gap_ok`` flags a
    spectral gap of at least 1/288 (the Cheeger floor 1/(2*12^2) implied
    by edge expansion >= 1/12 in the dense regime).
    """
    deg = graph.degrees()
    dL, dR = deg[sorted(L)], deg[sorted(R)]
    for i, j in graph.edges:
        if (i in set(L)) == (j in set(L)):
            raise ValueError("graph has a non-bipartite edge for this (L, R)")
    ratio = float(dL.max() / dL.min()) if dL.min() > 0 else float("inf")
    gap = spectral_gap(graph)
    return BipartiteReport(
        ratio_L=ratio,
        deg_L=(int(dL.min()), int(dL.max())),
        deg_R=(int(dR.min()), int(dR.max())),
        gap=gap,
        ratio_ok=ratio <= 3.0,
        gap_ok=gap >= float(GAP_FLOOR_BIPARTITE),
    )


def _bipartite_pairs(gen: np.random.Generator, left: Sequence[int], right: Sequence[int],
                     p: float) -> set[Edge]:
    if p <= 0 or not left or not right:
        return set()
    mask = gen.random((len(left), len(right))) < p
    li, ri = np.nonzero(mask)
    return {(left[a], right[b]) if left[a] < right[b] else (right[b], left[a])
            for a, b in zip(li, ri)}


def _f_graph(gen: np.random.Generator, T: Sequence[int], Tp: Sequence[int], c: int) -> set[Edge]:
    """Bipartite T x T' graph with every degree in [1, c].

    c rounds of random partial matchings, deduplicated, then a repair pass
    that connects any still-isolated vertex to the least-loaded partner
    with spare capacity.
    """
    if c < 1:
        return set()
    if (len(T) == 0) != (len(Tp) == 0):
        raise GenerationError("one boundary set is empty; F cannot cover the other")
    if not T:
        return set()
    edges: set[Edge] = set()
    k = min(len(T), len(Tp))
    for _ in range(c):
        pt = gen.permutation(len(T))[:k]
        pp = gen.permutation(len(Tp))[:k]
        for a, b in zip(pt, pp):
            edges.add((T[int(a)], Tp[int(b)]))
    degree = {v: 0 for v in list(T) + list(Tp)}
    for i, j in edges:
        degree[i] += 1
        degree[j] += 1
    for side, other in ((T, Tp), (Tp, T)):
        for v in side:
            if degree[v] == 0:
                options = [u for u in other if degree[u] < c]
                if not options:
                    raise GenerationError(f"cannot repair F-degree of vertex {v}")
                u = min(options, key=lambda u: (degree[u], u))
                edges.add((v, u) if v < u else (u, v))
                degree[v] += 1
                degree[u] += 1
    return edges


# ---------------------------------------------------------------------------
# the block model


def gen_vbm(params: VbmParams) -> PlantedInstance:
    """Sample the block model: random interior-to-boundary edges, near-regular
    expanders inside each side, a low-degree crossing graph F, and the
    configured monotone adversary.  Deterministic given ``params.seed``."""
    n = params.n
    half = n // 2
    t1, t2 = params.boundary_size(0), params.boundary_size(1)
    if t1 > half or t2 > half:
        raise ValueError("boundary larger than a side")
    S = tuple(range(half))
    Sp = tuple(range(half, n))
    T, Tp = S[:t1], Sp[:t2]
    int1, int2 = S[t1:], Sp[t2:]

    rand1 = _bipartite_pairs(rngmod.stream(params.seed, "vbm", "rand", 0), int1, T, params.p1)
    rand2 = _bipartite_pairs(rngmod.stream(params.seed, "vbm", "rand", 1), int2, Tp, params.p2)

    exp_sides = []
    for side, (interior, lam) in enumerate(((int1, params.lambda1), (int2, params.lambda2))):
        if len(interior) < 4:
            raise GenerationError(f"side {side} interior too small for an expander")
        d = degree_for_gap(lam, len(interior))
        # the ratio bound only constrains sides with a real gap target; with
        # lam = 0 the side graph is arbitrary and r is of no consequence
        ratio_bound = params.r if (lam > 0 and params.r >= 1) else 4.0
        gen = rngmod.stream(params.seed, "vbm", "expander", side)
        try:
            local, gap, drange = gen_expander(len(interior), d, lam, ratio_bound, gen)
        except GenerationError as exc:
            raise GenerationError(f"side {side}: {exc}") from exc
        offset = interior[0]
        edges = tuple(sorted((i + offset, j + offset) for i, j in local.edges))
        exp_sides.append((edges, gap, drange))

    f_edges = _f_graph(rngmod.stream(params.seed, "vbm", "F"), T, Tp, params.c)

    base_edges = set(rand1) | set(rand2) | set(exp_sides[0][0]) | set(exp_sides[1][0]) | f_edges
    graph = Graph.from_edges(n, base_edges)
    inst = PlantedInstance(
        graph=graph, S=S, T=T, Sp=Sp, Tp=Tp, F=tuple(sorted(f_edges)),
        model="vbm", params={"model": "vbm", **params.to_jsonable()},
        expander_edges=(exp_sides[0][0], exp_sides[1][0]),
        measured_gaps=(exp_sides[0][1], exp_sides[1][1]),
        expander_degree_range=(exp_sides[0][2], exp_sides[1][2]),
    )
    inst = apply_adversary(inst, params.adversary, rngmod.derive_seed(params.seed, "vbm", "adv"))
    if np.any(inst.graph.degrees() == 0):
        warnings.warn("instance has isolated vertices (p, c, lambda all zero on some part); "
                      "recovery experiments should exclude this configuration",
                      stacklevel=2)
    inst.validate()
    return inst


def apply_adversary(inst: PlantedInstance, strategy, seed) -> PlantedInstance:
    """Add monotone edges (within sides, or T x T') per the named strategy."""
    name, opts = _norm_adversary(strategy)
    S, T, Sp, Tp = inst.side_sets()
    new: set[Edge] = set()
    if name == "none":
        return inst
    if name == "random-within-sides":
        q = float(opts["q"])
        gen = rngmod.stream(seed, "adv", "rws")
        for side in (sorted(S), sorted(Sp)):
            idx = np.array(side)
            iu, ju = np.triu_indices(len(idx), k=1)
            mask = gen.random(len(iu)) < q
            for a, b in zip(idx[iu[mask]], idx[ju[mask]]):
                if not inst.graph.has_edge(int(a), int(b)):
                    new.add((int(a), int(b)))
    elif name == "clique-TTprime":
        for t in sorted(T):
            for tp in sorted(Tp):
                if not inst.graph.has_edge(t, tp):
                    new.add((t, tp))
    elif name == "degree-balancer":
        target = int(opts["target"])
        allowed = _monotone_allowed_groups(inst)
        new = _greedy_balance(inst.graph, target, allowed)
    else:
        raise ValueError(f"unknown adversary strategy {name!r}")
    if not new:
        return inst
    return replace(inst, graph=inst.graph.with_edges(new, tag_adversary=True))


def _monotone_allowed_groups(inst: PlantedInstance) -> list[tuple[np.ndarray, np.ndarray]]:
    S = np.array(inst.S)
    Sp = np.array(inst.Sp)
    T = np.array(inst.T)
    Tp = np.array(inst.Tp)
    groups = [(S, S), (Sp, Sp)]
    if len(T) and len(Tp):
        groups.append((T, Tp))
    return groups


def _greedy_balance(graph: Graph, target: int,
                    allowed_groups: list[tuple[np.ndarray, np.ndarray]]) -> set[Edge]:
    """Raise all degrees to >= target greedily: lowest-degree vertex first,
    joined to its lowest-degree allowed non-neighbor (ties to low index)."""
    n = graph.n
    adj = graph.adjacency_matrix(dtype=bool)
    deg = graph.degrees().astype(np.int64)
    partners = [np.zeros(n, dtype=bool) for _ in range(n)]
    for A, B in allowed_groups:
        for v in A:
            partners[v][B] = True
        for v in B:
            partners[v][A] = True
    for v in range(n):
        partners[v][v] = False
    new: set[Edge] = set()
    budget = n * target
    while True:
        v = int(np.argmin(deg))
        if deg[v] >= target:
            break
        budget -= 1
        if budget < 0:
            raise GenerationError("degree balancing did not terminate")
        candidates = partners[v] & ~adj[v]
        if not candidates.any():
            raise GenerationError(f"degree balancing infeasible: vertex {v} stuck at degree {int(deg[v])}")
        cand_idx = np.nonzero(candidates)[0]
        u = int(cand_idx[np.argmin(deg[cand_idx])])
        adj[v, u] = adj[u, v] = True
        deg[v] += 1
        deg[u] += 1
        new.add((v, u) if v < u else (u, v))
    return new


# ---------------------------------------------------------------------------
# whole-side planted model


def gen_lr14(n: int, eps, lambda_target: float, seed: int,
             adversary=("none", {}), ttprime: str = "matching") -> PlantedInstance:
    """Planted model with whole-side expanders and strategy-driven T x T' edges."""
    eps = _as_fraction(eps)
    if n % 2 != 0:
        raise ValueError("n must be even")
    t = max(1, math.floor(eps * n))
    if t > n // 2:
        raise ValueError("eps too large")
    half = n // 2
    S, Sp = tuple(range(half)), tuple(range(half, n))
    d = degree_for_gap(lambda_target, half)

    sides = []
    for side, offset in enumerate((0, half)):
        gen = rngmod.stream(seed, "lr14", "expander", side)
        try:
            local, gap, drange = gen_expander(half, d, lambda_target, 2.0, gen)
        except GenerationError as exc:
            raise GenerationError(f"side {side}: {exc}") from exc
        edges = tuple(sorted((i + offset, j + offset) for i, j in local.edges))
        sides.append((edges, gap, drange))

    pick = rngmod.stream(seed, "lr14", "labels")
    T = tuple(sorted(int(v) for v in pick.choice(half, size=t, replace=False)))
    Tp = tuple(sorted(int(v) + half for v in pick.choice(half, size=t, replace=False)))

    if ttprime == "matching":
        cross = {(a, b) for a, b in zip(T, Tp)}
    elif ttprime == "clique":
        cross = {(a, b) for a in T for b in Tp}
    else:
        raise ValueError(f"unknown T x T' strategy {ttprime!r}")

    graph = Graph.from_edges(n, set(sides[0][0]) | set(sides[1][0]) | cross)
    inst = PlantedInstance(
        graph=graph, S=S, T=T, Sp=Sp, Tp=Tp, F=tuple(sorted(cross)),
        model="lr14",
        params={"model": "lr14", "n": n, "eps": [eps.numerator, eps.denominator],
                "lambda_target": lambda_target, "ttprime": ttprime, "seed": seed},
        expander_edges=(sides[0][0], sides[1][0]),
        measured_gaps=(sides[0][1], sides[1][1]),
        expander_degree_range=(sides[0][2], sides[1][2]),
    )
    return apply_adversary(inst, adversary, rngmod.derive_seed(seed, "lr14", "adv"))


# ---------------------------------------------------------------------------
# adversarial family separating edge and vertex expansion


def gen_hn(n: int, eps, alpha: float, seed: int,
           expander_degree: int = 8, expander_gap: float = 0.2) -> PlantedInstance:
    """Hub-structured family: dense bipartite boundary blocks, thin interior
    expanders, and a degree-balancing adversary pushing every degree to
    ~alpha*n.  Its sparsest balanced vertex cut is the planted one while
    its sparsest balanced edge cut is entirely different."""
    eps = _as_fraction(eps)
    if n % 4 != 0:
        raise ValueError("n must be divisible by 4")
    if eps < Fraction(1, 2) * Fraction(1, round(n ** (1 / 3))):
        raise ValueError("eps below n^(-1/3)/2; family degenerates")
    if not 0.0 < alpha < 0.5:
        raise ValueError("alpha must lie in (0, 1/2)")
    half = n // 2
    t = 2 * (math.floor(eps * n) // 2)
    if t < 2 or (half - t) % 2 != 0 or half - t < 8:
        raise ValueError("boundary size incompatible with the half/half splits")
    S, Sp = tuple(range(half)), tuple(range(half, n))
    T, Tp = S[:t], Sp[:t]
    interior1, interior2 = S[t:], Sp[t:]
    mid = len(interior1) // 2
    A1, A2 = interior1[:mid], interior1[mid:]
    B1, B2 = interior2[:mid], interior2[mid:]
    T1, T2 = T[: t // 2], T[t // 2:]
    Tp1, Tp2 = Tp[: t // 2], Tp[t // 2:]

    sides = []
    for side, interior in enumerate((interior1, interior2)):
        gen = rngmod.stream(seed, "hn", "expander", side)
        local, gap, drange = gen_expander(len(interior), expander_degree, expander_gap, 3.0, gen)
        offset = interior[0]
        sides.append((tuple(sorted((i + offset, j + offset) for i, j in local.edges)), gap, drange))

    f_edges = {(a, b) for a in T1 for b in Tp1} | {(a, b) for a in T2 for b in Tp2}
    p = math.log(n) / n
    rand1 = _bipartite_pairs(rngmod.stream(seed, "hn", "rand", 0), interior1, T, p)
    rand2 = _bipartite_pairs(rngmod.stream(seed, "hn", "rand", 1), interior2, Tp, p)

    base = set(sides[0][0]) | set(sides[1][0]) | f_edges | rand1 | rand2
    graph = Graph.from_edges(n, base)

    target = math.floor(alpha * n)
    groups = [(np.array(A1), np.array(A1)), (np.array(A2), np.array(A2)),
              (np.array(B1), np.array(B1)), (np.array(B2), np.array(B2)),
              (np.array(A1), np.array(T1)), (np.array(A2), np.array(T2)),
              (np.array(B1), np.array(Tp1)), (np.array(B2), np.array(Tp2))]
    balancing = _greedy_balance(graph, target, groups)
    graph = graph.with_edges(balancing, tag_adversary=True)

    slack = n ** 0.9
    deg = graph.degrees()
    if deg.min() < target - slack or deg.max() > target + slack:
        v = int(np.argmin(deg)) if deg.min() < target - slack else int(np.argmax(deg))
        raise GenerationError(f"balancing postcondition failed at vertex {v} (degree {int(deg[v])})")

    return PlantedInstance(
        graph=graph, S=S, T=T, Sp=Sp, Tp=Tp, F=tuple(sorted(f_edges)),
        model="hn",
        params={"model": "hn", "n": n, "eps": [eps.numerator, eps.denominator],
                "alpha": alpha, "p": p, "c": t // 2, "seed": seed,
                "groups": {"A1": list(A1), "A2": list(A2), "B1": list(B1), "B2": list(B2),
                           "T1": list(T1), "T2": list(T2), "Tp1": list(Tp1), "Tp2": list(Tp2)}},
        expander_edges=(sides[0][0], sides[1][0]),
        measured_gaps=(sides[0][1], sides[1][1]),
        expander_degree_range=(sides[0][2], sides[1][2]),
    )


# ---------------------------------------------------------------------------
# instance files


def instance_to_json(inst: PlantedInstance) -> str:
    payload = {
        "kind": "instance",
        "format": 1,
        "model": inst.model,
        "n": inst.n,
        "graph": {
            "edges": [list(e) for e in inst.graph.edges],
            "tags": ["adversary" if e in inst.graph.adversary else "base" for e in inst.graph.edges],
        },
        "labels": {"S": list(inst.S), "T": list(inst.T), "Sp": list(inst.Sp), "Tp": list(inst.Tp)},
        "F": [list(e) for e in inst.F],
        "expander_edges": [[list(e) for e in side] for side in inst.expander_edges],
        "measured_gaps": list(inst.measured_gaps),
        "expander_degree_range": [list(r) for r in inst.expander_degree_range],
        "params": inst.params,
        "rng": {"name": rngmod.GENERATOR_NAME, "seed": inst.params.get("seed")},
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def instance_from_json(text: str) -> PlantedInstance:
    d = json.loads(text)
    if d.get("kind") != "instance":
        raise ValueError("not an instance payload")
    edges = [tuple(e) for e in d["graph"]["edges"]]
    adv = [e for e, tag in zip(edges, d["graph"]["tags"]) if tag == "adversary"]
    graph = Graph.from_edges(d["n"], edges, adv)
    return PlantedInstance(
        graph=graph,
        S=tuple(d["labels"]["S"]), T=tuple(d["labels"]["T"]),
        Sp=tuple(d["labels"]["Sp"]), Tp=tuple(d["labels"]["Tp"]),
        F=tuple(tuple(e) for e in d["F"]),
        model=d["model"],
        params=d["params"],
        expander_edges=tuple(tuple(tuple(e) for e in side) for side in d["expander_edges"]),
        measured_gaps=tuple(d["measured_gaps"]),
        expander_degree_range=tuple(tuple(r) for r in d["expander_degree_range"]),
    )
