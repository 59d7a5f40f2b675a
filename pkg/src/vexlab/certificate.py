"""Exact dual certificates of integrality for planted instances.

Given a planted instance whose sides carry measured near-regular
expanders, the construction assigns rational directed edge weights Y:
``a = 1/(2 r d)`` on expander edges (r, d measured from the realized
subgraph, so a = 1/(2 max_degree) exactly), ``b_i = 1/(2 deg_T(i))`` on
interior-to-boundary edges, reciprocal-degree weights on the crossing
graph F, zero on adversary edges, and a deterministic row-sum padding
onto the lowest-index same-side neighbor.  The boundary diagonal B and
the shift alpha then witness that the planted indicator is the unique
zero eigenvector of M = L(Y) + alpha 11^T - B, which is checked with a
dense eigensolve of M + l gg^T (PSD plus rank n-1 iff that matrix is
positive definite for some l > 0).

Feasibility, the kernel equation M g = 0, and the dual objective
4(|T| + |T'|) are all verified in exact rational arithmetic; floating
point appears only in the eigensolve and in the flow diagnostics.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import networkx as nx
import numpy as np

from .graphs import Graph, WeightedDigraph
from .instances import PlantedInstance
from .sdp import SdpSolution


class CertificateError(Exception):
    """The construction's preconditions do not hold on this instance."""


@dataclass(frozen=True)
class DualCertificate:
    Y: WeightedDigraph
    B: tuple[Fraction, ...]
    alpha: Fraction
    l: Fraction
    c_prime: Fraction
    a_side: tuple[Fraction, Fraction]
    b_weights: Mapping[int, Fraction]

    def dual_objective(self) -> Fraction:
        return sum(self.B, Fraction(0))


@dataclass
class CertReport:
    dual_objective: Fraction
    feasible: bool
    violations: list[str]
    eigen_zero_residual: Fraction
    min_eig_shifted: float
    eig_tolerance: float
    rank_condition: bool
    objective_matches_integral: bool
    integrality_certified: bool
    harmonic: "HarmonicReport | None" = None

    def to_jsonable(self) -> dict:
        return {
            "dualObjective": [self.dual_objective.numerator, self.dual_objective.denominator],
            "feasible": self.feasible,
            "violations": self.violations,
            "eigenZeroOnPlanted": float(self.eigen_zero_residual),
            "minEigShifted": self.min_eig_shifted,
            "eigTolerance": self.eig_tolerance,
            "rankCondition": self.rank_condition,
            "objectiveMatchesIntegral": self.objective_matches_integral,
            "integralityCertified": self.integrality_certified,
        }


def _interiors(inst: PlantedInstance):
    S, T, Sp, Tp = inst.side_sets()
    return tuple(sorted(S - T)), tuple(sorted(Sp - Tp))


def _t_degrees(base: Graph, interior, boundary) -> dict[int, int]:
    bset = frozenset(boundary)
    return {i: sum(1 for j in base.neighbors(i) if j in bset) for i in interior}


def build_certificate(inst: PlantedInstance) -> DualCertificate:
    """Assemble (Y, B, alpha) for an instance in the expander-sides regime.

    Requires positive measured gaps on both sides and an F-edge at every
    boundary vertex; raises CertificateError otherwise.
    """
    base = inst.graph.base_graph()
    n = inst.n
    S, T, Sp, Tp = inst.side_sets()
    if not T or not Tp:
        raise CertificateError("both boundary sets must be nonempty")
    for side, gap in enumerate(inst.measured_gaps):
        if gap <= 0:
            raise CertificateError(f"side {side} has no measured spectral gap")

    f_deg = {v: 0 for v in sorted(T | Tp)}
    for i, j in inst.F:
        f_deg[i] += 1
        f_deg[j] += 1
    for v, d in f_deg.items():
        if d == 0:
            raise CertificateError(f"boundary vertex {v} has no F-edge")

    weights: dict[tuple[int, int], Fraction] = {}
    a_values = []
    b_weights: dict[int, Fraction] = {}
    int1, int2 = _interiors(inst)
    for side, (interior, boundary) in enumerate(((int1, T), (int2, Tp))):
        dmin, dmax = inst.expander_degree_range[side]
        if dmax < 1:
            raise CertificateError(f"side {side} has no expander edges")
        a = Fraction(1, 2 * dmax)  # == 1 / (2 r d) with r = dmax/dmin, d = dmin
        a_values.append(a)
        for i, j in inst.expander_edges[side]:
            weights[(i, j)] = weights.get((i, j), Fraction(0)) + a
            weights[(j, i)] = weights.get((j, i), Fraction(0)) + a
        tdeg = _t_degrees(base, interior, boundary)
        bset = frozenset(boundary)
        for i in interior:
            if tdeg[i] == 0:
                continue
            b = Fraction(1, 2 * tdeg[i])
            b_weights[i] = b
            for j in base.neighbors(i):
                if j in bset:
                    weights[(i, j)] = weights.get((i, j), Fraction(0)) + b

    for i, j in inst.F:
        # i in T, j in T' by construction of F
        weights[(i, j)] = Fraction(1, f_deg[i])
        weights[(j, i)] = Fraction(1, f_deg[j])

    # pad row sums up to exactly 1 on the lowest-index same-side base
    # neighbor; boundary rows are already exactly 1 through F
    row = [Fraction(0)] * n
    for (i, _), w in weights.items():
        row[i] += w
    side_of = {v: 0 for v in S}
    side_of.update({v: 1 for v in Sp})
    for v in range(n):
        deficit = 1 - row[v]
        if v in T or v in Tp:
            if deficit != 0:
                raise CertificateError(f"boundary row sum of {v} is {row[v]}, expected 1")
            continue
        if deficit < 0:
            raise CertificateError(f"row sum of {v} exceeds 1: {row[v]}")
        if deficit == 0:
            continue
        target = next((j for j in base.neighbors(v) if side_of[j] == side_of[v]), None)
        if target is None:
            raise CertificateError(f"vertex {v} has no same-side base neighbor for padding")
        weights[(v, target)] = weights.get((v, target), Fraction(0)) + deficit

    Y = WeightedDigraph(n, weights)
    sym = Y.symmetric_weights()
    B = [Fraction(0)] * n
    for v in sorted(T):
        B[v] = 2 * sum((sym.get((min(v, u), max(v, u)), Fraction(0))
                        for u in base.neighbors(v) if u in Tp), Fraction(0))
    for v in sorted(Tp):
        B[v] = 2 * sum((sym.get((min(v, u), max(v, u)), Fraction(0))
                        for u in base.neighbors(v) if u in T), Fraction(0))

    eps = max(Fraction(len(T), n), Fraction(len(Tp), n))
    c_real = max(f_deg.values())
    c_prime = Fraction(8 * c_real, 1) / (1 - eps)
    margin = (1 - eps) * c_prime / 2 - 2 * c_real  # equals 2*c_real by choice of c_prime
    if margin <= 0:
        raise CertificateError("witness margin is not positive")
    l = 2 * max(Fraction(1), eps * c_prime ** 2 / (4 * n * margin))
    return DualCertificate(
        Y=Y, B=tuple(B), alpha=l, l=l, c_prime=c_prime,
        a_side=(a_values[0], a_values[1]), b_weights=b_weights,
    )


# ---------------------------------------------------------------------------
# verification


def planted_sign_vector(inst: PlantedInstance) -> np.ndarray:
    g = -np.ones(inst.n)
    g[list(inst.S)] = 1.0
    return g


def _kernel_residual(inst: PlantedInstance, cert: DualCertificate) -> Fraction:
    """max_i |(M g)_i| in exact arithmetic, for g the planted sign vector.

    Uses 1^T g = 0 (both sides have n/2 vertices), so the alpha 11^T term
    vanishes and M g = L(Y) g - B g is a sparse rational computation.
    """
    S = frozenset(inst.S)
    sign = {v: (1 if v in S else -1) for v in range(inst.n)}
    out = [Fraction(0)] * inst.n
    for (i, j), w in cert.Y.symmetric_weights().items():
        di = sign[i] - sign[j]
        out[i] += w * di
        out[j] -= w * di
    worst = Fraction(0)
    for v in range(inst.n):
        r = out[v] - cert.B[v] * sign[v]
        worst = max(worst, abs(r))
    return worst


def dense_m_matrix(inst: PlantedInstance, cert: DualCertificate) -> np.ndarray:
    M = cert.Y.dense_laplacian()
    M += float(cert.alpha)
    M[np.arange(inst.n), np.arange(inst.n)] -= np.array([float(b) for b in cert.B])
    return M


def verify_certificate(inst: PlantedInstance, cert: DualCertificate,
                       tol: float = 1e-8, with_harmonic: bool = True) -> CertReport:
    """Four checks, in order: exact dual feasibility; M g = 0 exactly;
    positive definiteness of M + l gg^T (rank n-1 witness); and exact
    equality of the dual objective with the integral value 4(|T| + |T'|).
    Failures are reported, never raised."""
    violations: list[str] = []
    S, T, Sp, Tp = inst.side_sets()

    # (1) feasibility in exact arithmetic
    for (i, j), w in cert.Y.weights.items():
        if w < 0:
            violations.append(f"negative weight on ({i},{j})")
        e = (i, j) if i < j else (j, i)
        if e in inst.graph.adversary:
            if w != 0:
                violations.append(f"nonzero weight on adversary edge ({i},{j})")
        elif not inst.graph.has_edge(i, j):
            violations.append(f"weight on non-edge ({i},{j})")
        if w != 0 and ((i in T and j in S) or (i in Tp and j in Sp)):
            violations.append(f"boundary vertex {i} sends weight into its own side")
    for v, s in enumerate(cert.Y.row_sums()):
        if s != 1:
            violations.append(f"row sum of {v} is {s}")
    feasible = not violations

    # (2) planted vector in the kernel, exactly
    residual = _kernel_residual(inst, cert)
    if residual != 0:
        violations.append(f"M g has residual {residual}")

    # (3) PSD + rank n-1 via the shifted eigensolve
    M = dense_m_matrix(inst, cert)
    g = planted_sign_vector(inst)
    shifted = M + float(cert.l) * np.outer(g, g)
    evals = np.linalg.eigvalsh(0.5 * (shifted + shifted.T))
    scale = float(np.abs(evals).max())
    eig_tol = max(1e-10, tol * scale)
    min_eig = float(evals.min())
    rank_condition = min_eig > eig_tol

    # (4) exact objective equality
    integral = Fraction(4 * (len(T) + len(Tp)))
    obj = cert.dual_objective()
    obj_ok = obj == integral
    if not obj_ok:
        violations.append(f"dual objective {obj} != {integral}")

    harmonic = harmonic_condition(inst, Fraction(1)) if with_harmonic else None
    return CertReport(
        dual_objective=obj,
        feasible=feasible,
        violations=violations,
        eigen_zero_residual=residual,
        min_eig_shifted=min_eig,
        eig_tolerance=eig_tol,
        rank_condition=rank_condition,
        objective_matches_integral=obj_ok,
        integrality_certified=feasible and residual == 0 and rank_condition and obj_ok,
        harmonic=harmonic,
    )


# ---------------------------------------------------------------------------
# flow diagnostics


@dataclass
class FlowReport:
    min_flow: float
    threshold: float
    ok: bool
    per_boundary_flow: dict[int, float]
    crosscheck: list[tuple[int, int, float, float]]
    crosscheck_agree: bool


def flow_check(inst: PlantedInstance, cert: DualCertificate,
               c_prime: Fraction | None = None, samples: int = 10) -> FlowReport:
    """Two-hop routed flow into each boundary vertex versus 2 c'/n.

    The closed form routes through every interior neighbor j of t on the
    expansion-completed side graph: f(t) = (1/2) sum_j (a d lambda /
    (2 r^2 n)) / deg_T(j).  For sampled (i, t) pairs the same quantity is
    recomputed as a maximum flow on the two-hop layered network whose
    capacities are the routing scheme's dedicated shares.
    """
    if c_prime is None:
        c_prime = cert.c_prime
    base = inst.graph.base_graph()
    n = inst.n
    int1, int2 = _interiors(inst)
    S, T, Sp, Tp = inst.side_sets()
    flows: dict[int, float] = {}
    pair_data = []
    for side, (interior, boundary) in enumerate(((int1, tuple(sorted(T))), (int2, tuple(sorted(Tp))))):
        dmin, dmax = inst.expander_degree_range[side]
        lam = inst.measured_gaps[side]
        a = float(cert.a_side[side])
        d = float(dmin)
        r = dmax / dmin
        unit = a * d * lam / (2.0 * r * r * n)
        tdeg = _t_degrees(base, interior, boundary)
        bset = frozenset(boundary)
        for t in boundary:
            nbrs = [j for j in base.neighbors(t) if j in frozenset(interior)]
            flows[t] = 0.5 * sum(unit / tdeg[j] for j in nbrs)
            pair_data.append((side, t, nbrs, unit))

    threshold = float(2 * c_prime / n)
    min_flow = min(flows.values()) if flows else 0.0

    # layered max-flow cross-check on evenly sampled boundary vertices
    crosscheck = []
    agree = True
    tdeg_all = {}
    for side, (interior, boundary) in enumerate(((int1, T), (int2, Tp))):
        tdeg_all.update(_t_degrees(base, interior, boundary))
    sampled = [pair_data[k] for k in range(0, len(pair_data), max(1, len(pair_data) // max(samples, 1)))][:samples]
    for side, t, nbrs, unit in sampled:
        interior = int1 if side == 0 else int2
        src = next(i for i in interior if i not in set(nbrs) and i != t)
        G = nx.DiGraph()
        for j in nbrs:
            share = 0.5 * unit / tdeg_all[j]
            G.add_edge("src", j, capacity=share)
            G.add_edge(j, "sink", capacity=float(cert.b_weights.get(j, 0)) / len(interior))
        if not nbrs:
            value = 0.0
        else:
            value, _ = nx.maximum_flow(G, "src", "sink")
        closed = flows[t]
        crosscheck.append((src, t, closed, value))
        if abs(closed - value) > 1e-9:
            agree = False

    return FlowReport(min_flow=min_flow, threshold=threshold, ok=min_flow >= threshold,
                      per_boundary_flow=flows, crosscheck=crosscheck, crosscheck_agree=agree)


# ---------------------------------------------------------------------------
# harmonic sums


@dataclass
class HarmonicReport:
    sums: dict[int, tuple[Fraction, Fraction]]
    alpha_const: Fraction
    holds: bool
    max_feasible_alpha: float | None

    def to_jsonable(self) -> dict:
        return {
            "alphaConst": float(self.alpha_const),
            "holds": self.holds,
            "maxFeasibleAlpha": self.max_feasible_alpha,
            "sums": {str(v): [float(h_int), float(h_ext)] for v, (h_int, h_ext) in self.sums.items()},
        }


def harmonic_condition(inst: PlantedInstance, alpha_const) -> HarmonicReport:
    """Internal vs external harmonic degree sums at every boundary vertex.

    H_int(t) sums 1/deg_T(j) over t's interior neighbors; H_ext(t) sums
    1/deg_T(t') over t's neighbors across the cut (with T' in place of T
    on the other side).  Flags whether H_int >= alpha_const * H_ext holds
    everywhere, and reports the largest constant that would.
    """
    alpha_const = alpha_const if isinstance(alpha_const, Fraction) else Fraction(str(alpha_const))
    base = inst.graph.base_graph()
    int1, int2 = _interiors(inst)
    S, T, Sp, Tp = inst.side_sets()
    sums: dict[int, tuple[Fraction, Fraction]] = {}
    for interior, boundary, other in ((int1, T, Tp), (int2, Tp, T)):
        iset, oset = frozenset(interior), frozenset(other)
        tdeg = _t_degrees(base, interior, boundary)
        odeg = _t_degrees(base, sorted(other), boundary)
        for t in sorted(boundary):
            h_int = sum((Fraction(1, tdeg[j]) for j in base.neighbors(t)
                         if j in iset and tdeg[j] > 0), Fraction(0))
            h_ext = sum((Fraction(1, odeg[tp]) for tp in base.neighbors(t)
                         if tp in oset and odeg[tp] > 0), Fraction(0))
            sums[t] = (h_int, h_ext)
    holds = all(h_int >= alpha_const * h_ext for h_int, h_ext in sums.values())
    ratios = [h_int / h_ext for h_int, h_ext in sums.values() if h_ext > 0]
    max_alpha = float(min(ratios)) if ratios else None
    return HarmonicReport(sums=sums, alpha_const=alpha_const, holds=holds,
                          max_feasible_alpha=max_alpha)


# ---------------------------------------------------------------------------
# complementary slackness


@dataclass
class SlacknessReport:
    inner_product: float
    eta_slack: float
    ok: bool


def complementary_slackness(solution: SdpSolution, inst: PlantedInstance,
                            cert: DualCertificate, tol: float = 1e-4) -> SlacknessReport:
    """<M, U> and sum_i eta_i (1 - sum_j Y_ij); both vanish at a primal/dual
    optimal pair (up to tol * n for solver output)."""
    M = dense_m_matrix(inst, cert)
    inner = float((M * solution.U).sum())
    slack = float(sum(float(e) * float(1 - s) for e, s in zip(solution.eta, cert.Y.row_sums())))
    bound = tol * inst.n
    return SlacknessReport(inner_product=inner, eta_slack=slack,
                           ok=abs(inner) <= bound and abs(slack) <= bound)


# ---------------------------------------------------------------------------
# certificate files


def certificate_to_json(cert: DualCertificate, report: CertReport | None = None) -> str:
    payload = {
        "kind": "certificate",
        "format": 1,
        "n": cert.Y.n,
        "Y": sorted([i, j, w.numerator, w.denominator] for (i, j), w in cert.Y.weights.items() if w != 0),
        "B": [[b.numerator, b.denominator] for b in cert.B],
        "alpha": [cert.alpha.numerator, cert.alpha.denominator],
        "l": [cert.l.numerator, cert.l.denominator],
        "cPrime": [cert.c_prime.numerator, cert.c_prime.denominator],
        "aSide": [[a.numerator, a.denominator] for a in cert.a_side],
        "b": {str(v): [b.numerator, b.denominator] for v, b in sorted(cert.b_weights.items())},
        "report": report.to_jsonable() if report is not None else None,
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def certificate_from_json(text: str) -> DualCertificate:
    d = json.loads(text)
    if d.get("kind") != "certificate":
        raise ValueError("not a certificate payload")
    weights = {(i, j): Fraction(num, den) for i, j, num, den in d["Y"]}
    return DualCertificate(
        Y=WeightedDigraph(d["n"], weights),
        B=tuple(Fraction(*b) for b in d["B"]),
        alpha=Fraction(*d["alpha"]),
        l=Fraction(*d["l"]),
        c_prime=Fraction(*d["cPrime"]),
        a_side=tuple(Fraction(*a) for a in d["aSide"]),
        b_weights={int(v): Fraction(*b) for v, b in d["b"].items()},
    )
