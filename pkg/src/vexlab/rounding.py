"""Cut extraction from SDP solutions.

Four routes: exact rank-one recovery by the top eigenvector; prefix
sweeps of a one-dimensional embedding (with the 2*delta_0 guarantee);
cluster rounding that sweeps squared-distance orderings around dense
balls; and the ball-growing rounding for the whole-side planted model.

All roundings are deterministic: every ordering breaks ties by vertex
index and every argmin by (value, candidate order).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .graphs import CutReport, Graph, vertex_expansion
from .sdp import SdpSolution, factorize, max_triangle_violation

EXACT_RECOVERY_TOL = 1e-3
CLUSTER_INNER_RADIUS = 0.1    # ball that must be dense
CLUSTER_OUTER_RADIUS = 0.125  # sweep stops past this ball
SET_DISTANCE_FLOOR = 0.02     # required gap between cluster and far set


class RoundingError(Exception):
    """The rounding's structural hypothesis failed on this input."""


@dataclass(frozen=True)
class LineEmbedding:
    """Nonnegative 1-D embedding of the vertices plus its provenance."""

    y: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        y = np.asarray(self.y, dtype=np.float64)
        if not np.all(np.isfinite(y)):
            raise ValueError("embedding values must be finite")
        if y.min() < -1e-12:
            raise ValueError("embedding values must be nonnegative")
        object.__setattr__(self, "y", y)


def pairwise_sq_distances(vectors: np.ndarray) -> np.ndarray:
    """||u_i - u_j||^2 for row vectors, clipped to be exactly symmetric."""
    sq = (vectors ** 2).sum(axis=1)
    D = sq[:, None] + sq[None, :] - 2.0 * (vectors @ vectors.T)
    D = np.maximum(D, 0.0)
    return 0.5 * (D + D.T)


# ---------------------------------------------------------------------------
# exact recovery


def round_exact(graph: Graph, solution: SdpSolution) -> tuple[CutReport, bool]:
    """Sign partition of the top eigenvector of U; ``recovered`` is True when
    U is entrywise within 1e-3 of the rank-one matrix of that partition."""
    U = 0.5 * (solution.U + solution.U.T)
    n = U.shape[0]
    evals, evecs = np.linalg.eigh(U)
    top = evecs[:, -1]
    degenerate = evals[-1] <= 1e-9 or np.linalg.norm(top) <= 1e-9
    if top[0] < 0 or (top[0] == 0 and top.sum() < 0):
        top = -top
    side = top >= 0
    if side.all() or not side.any():
        # no usable sign split; fall back to the balanced split of the values
        order = np.lexsort((np.arange(n), -top))
        side = np.zeros(n, dtype=bool)
        side[order[: n // 2]] = True
        degenerate = True
    s = np.where(side, 1.0, -1.0)
    recovered = (not degenerate) and float(np.abs(U - np.outer(s, s)).max()) <= EXACT_RECOVERY_TOL
    subset = tuple(int(i) for i in np.nonzero(side)[0])
    report = vertex_expansion(graph, subset, method="exact",
                              params={"recovered": recovered})
    return report, recovered


# ---------------------------------------------------------------------------
# line sweeps


def sweep_delta0(graph: Graph, y: np.ndarray) -> float:
    """delta_0 = n * sum_i max_{j ~ i} |y_i - y_j| / sum_{pairs} |y_i - y_j|."""
    n = graph.n
    num = 0.0
    for i in range(n):
        nbrs = graph.neighbors(i)
        if nbrs:
            num += max(abs(y[i] - y[j]) for j in nbrs)
    diffs = np.abs(y[:, None] - y[None, :])
    den = float(np.triu(diffs, 1).sum())
    if den == 0.0:
        raise RoundingError("all embedding values equal; delta_0 undefined")
    return n * num / den


def line_sweep(graph: Graph, emb: LineEmbedding) -> CutReport:
    """Best of the n-1 level cuts of the embedding order by phi^V.

    The winner is guaranteed to satisfy phi^V <= 2 * delta_0; the realized
    delta_0 is recorded in the report params.
    """
    n = graph.n
    if n < 2:
        raise ValueError("need at least two vertices")
    y = emb.y
    if len(y) != n:
        raise ValueError("embedding length does not match the graph")
    delta0 = sweep_delta0(graph, y)
    order = np.lexsort((np.arange(n), y))
    best: CutReport | None = None
    for k in range(1, n):
        report = vertex_expansion(graph, order[:k], method="line-sweep")
        if best is None or report.phi < best.phi:
            best = report
    assert best is not None and float(best.phi) <= 2 * delta0 + 1e-9
    return CutReport(best.subset, best.size, best.boundary, best.phi, best.phi_asym,
                     method="line-sweep",
                     params={"delta0": delta0, "provenance": emb.provenance})


def set_distance(D: np.ndarray, members: np.ndarray) -> np.ndarray:
    """d(i, L) = min_{k in L} D[i, k] for every i."""
    return D[:, members].min(axis=1)


def cluster_to_embedding(vectors: np.ndarray, cluster: np.ndarray,
                         far_set: np.ndarray) -> LineEmbedding:
    """Distance-to-cluster embedding with the far set clamped to d(R', L').

    Preconditions: the two sets are disjoint and their squared distance is
    at least 1/50 (the proof's margin between the 1/10 and 1/8 balls).
    """
    cluster = np.asarray(sorted(cluster), dtype=np.int64)
    far_set = np.asarray(sorted(far_set), dtype=np.int64)
    if len(np.intersect1d(cluster, far_set)):
        raise ValueError("cluster and far set must be disjoint")
    D = pairwise_sq_distances(np.asarray(vectors, dtype=np.float64))
    dist = set_distance(D, cluster)
    d_sets = float(dist[far_set].min()) if len(far_set) else math.inf
    if d_sets < SET_DISTANCE_FLOOR:
        raise ValueError(f"set distance {d_sets:.4f} below the 1/50 floor")
    y = dist.copy()
    if len(far_set):
        y[far_set] = d_sets
    return LineEmbedding(y=y, provenance="cluster-distance")


# ---------------------------------------------------------------------------
# cluster rounding


def algorithm1_round(graph: Graph, vectors: np.ndarray, alpha: float,
                     triangle_tol: float = 1e-4) -> CutReport:
    """Sweep squared-distance orderings around every dense 1/10-ball.

    For each center i with |{j : d(i,j) <= 1/10}| > 3*alpha*n/4, vertices
    are ordered by distance to that ball and the prefixes between the ball
    and the first vertex beyond squared distance 1/8 from i are scored by
    phi^V; the best prefix over all centers wins.  The prefix window keeps
    every output between the 1/10- and 1/8-balls, which is what bounds its
    size.  (The stopping index is read as "first vertex in sweep order
    beyond the 1/8 criterion"; with no such vertex all n-1 prefixes are
    swept.)
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    n = graph.n
    D = pairwise_sq_distances(vectors)
    worst = max_triangle_violation(D_as_gram(D))
    if worst > triangle_tol:
        raise RoundingError(
            f"vectors violate the squared triangle inequality by {worst:.2e} "
            f"(tolerance {triangle_tol:g}); strengthen the SDP first")
    size_floor = 3.0 * alpha * n / 4.0
    best: CutReport | None = None
    best_key = None
    any_dense = False
    for i in range(n):
        ball = np.nonzero(D[i] <= CLUSTER_INNER_RADIUS)[0]
        if len(ball) <= size_floor:
            continue
        any_dense = True
        dist = set_distance(D, ball)
        order = np.lexsort((np.arange(n), dist))
        beyond = D[i, order] > CLUSTER_OUTER_RADIUS
        cutoff = int(np.argmax(beyond)) if beyond.any() else n  # 0-based position
        lo, hi = len(ball), min(cutoff, n - 1)
        for k in range(lo, hi + 1):
            report = vertex_expansion(graph, order[:k], method="cluster-round")
            key = (report.phi, i, k)
            if best is None or key < best_key:
                best, best_key = report, key
    if best is None:
        if not any_dense:
            raise RoundingError("no dense cluster found (cluster hypothesis violated)")
        raise RoundingError("no valid sweep prefix (all vectors within the 1/8 ball)")
    return CutReport(best.subset, best.size, best.boundary, best.phi, best.phi_asym,
                     method="cluster-round",
                     params={"alpha": alpha, "center": best_key[1]})


def D_as_gram(D: np.ndarray) -> np.ndarray:
    """Gram matrix whose edge forms reproduce D, for the triangle scan.

    The scan checks U_jj - U_ij - U_jk + U_ik >= -tol; substituting
    U = -D/2 makes that expression (d(i,j) + d(j,k) - d(i,k)) / 2.
    """
    return -0.5 * D


# ---------------------------------------------------------------------------
# ball growing for the whole-side planted model


def algorithm2_planted(graph: Graph, solution: SdpSolution, delta: float) -> CutReport:
    """Drop high-eta vertices, grow balls around every survivor at radii
    t*sqrt(delta), and return the best ball-plus-dropped-set by phi^V.

    ``delta`` is the SDP objective divided by n.  A zero delta means a
    perfect cut; the exact rank-one rounding handles that directly.
    """
    n = graph.n
    if delta <= 0:
        report, _ = round_exact(graph, solution)
        return CutReport(report.subset, report.size, report.boundary, report.phi,
                         report.phi_asym, method="ball-grow",
                         params={"delta": delta, "fallback": "exact"})
    sqrt_d = math.sqrt(delta)
    dropped = np.nonzero(solution.eta >= sqrt_d)[0]
    if len(dropped) > sqrt_d * n + 1e-9:
        raise RoundingError("dropped set exceeds the sqrt(delta) n Markov bound")
    keep = np.setdiff1d(np.arange(n), dropped)
    if len(keep) == 0:
        raise RoundingError("every vertex exceeded the eta threshold")
    vectors = factorize(solution.U, tol=1e-4)
    D = pairwise_sq_distances(vectors)[np.ix_(keep, keep)]

    # diagnostic from the analysis: 1/50-balls keep at most 9n/10 vertices
    small_ball_max = int((D <= 0.02).sum(axis=1).max())
    if small_ball_max > 0.9 * n:
        warnings.warn(f"a 1/50-ball holds {small_ball_max} > 0.9n vertices", stacklevel=2)

    t_end = math.ceil(1.0 / (50.0 * sqrt_d)) + 1
    t_lo, t_hi = min(50, t_end), max(50, t_end)
    radii = []
    for t in range(t_lo, t_hi + 1):
        r = t * sqrt_d
        radii.append(r)
        if r > 4.0:  # unit vectors: every ball beyond radius 4 is all of V'
            break
    order = np.argsort(D, axis=1, kind="stable")
    D_sorted = np.take_along_axis(D, order, axis=1)
    dropped_set = set(int(v) for v in dropped)
    best: CutReport | None = None
    best_key = None
    for ci in range(len(keep)):
        sizes = np.searchsorted(D_sorted[ci], np.array(radii), side="right")
        for k in sorted(set(int(s) for s in sizes)):
            if k == 0:
                continue
            members = set(int(keep[v]) for v in order[ci, :k]) | dropped_set
            if len(members) >= n:
                continue
            report = vertex_expansion(graph, members, method="ball-grow")
            key = (report.phi, ci, k)
            if best is None or key < best_key:
                best, best_key = report, key
    if best is None:
        raise RoundingError("no proper ball candidate")
    return CutReport(best.subset, best.size, best.boundary, best.phi, best.phi_asym,
                     method="ball-grow",
                     params={"delta": delta, "dropped": len(dropped),
                             "max_ball_1_50": small_ball_max,
                             "small_ball_ok": small_ball_max <= 0.9 * n})
