"""Balanced vertex-expansion SDP: modelling, an operator-splitting solver,
triangle-inequality strengthening, and Gram-matrix factorization.

The program over a symmetric matrix U and per-vertex epigraph variables
eta is

    minimize    sum_i eta_i
    subject to  U_ii + U_jj - 2 U_ij <= eta_i   for every i and j ~ i
                diag(U) = 1,   <J, U> = 0,      U PSD.

The solver is a two-block ADMM.  One block holds U with the diagonal and
balance constraints enforced exactly in closed form (plus a conjugate
gradient solve once triangle cuts are active); the other holds a PSD copy
of U (dense eigendecomposition projection) and per-directed-edge epigraph
auxiliaries whose update is the proximal map of a max function
(water-filling).  Deterministic given options; no randomness anywhere.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graphs import Graph

DEFAULT_TRIANGLE_TOL = 1e-4


@dataclass(frozen=True)
class SolverOptions:
    tol_feas: float = 1e-6
    tol_obj: float = 1e-5
    max_iter: int = 20000
    rho: float = 500.0
    edge_weight: float = 0.05  # relative weight of epigraph couplings vs the PSD coupling
    over_relax: float = 1.6
    check_every: int = 25
    cg_tol: float = 1e-10


@dataclass(frozen=True)
class SdpProblem:
    """Constraint data for one graph, plus solver options."""

    n: int
    edges: tuple[tuple[int, int], ...]
    neighbors: tuple[tuple[int, ...], ...]
    triangle: bool = False
    options: SolverOptions = SolverOptions()
    isolated: tuple[int, ...] = ()

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def edge_constraint_count(self) -> int:
        """One constraint per (vertex, incident edge) pair: sum_i |N(i)|."""
        return 2 * self.m


@dataclass
class Residuals:
    max_diag_dev: float
    balance_dev: float
    max_edge_violation: float
    min_eig_U: float
    triangle_violation: float

    def to_jsonable(self) -> dict:
        return {
            "maxDiagDev": self.max_diag_dev,
            "balanceDev": self.balance_dev,
            "maxEdgeViolation": self.max_edge_violation,
            "minEigU": self.min_eig_U,
            "triangleViolation": self.triangle_violation,
        }


@dataclass
class SdpSolution:
    U: np.ndarray
    eta: np.ndarray
    objective: float
    residuals: Residuals
    iterations: int
    wall_time: float
    converged: bool
    info: dict = field(default_factory=dict)
    _state: dict | None = field(default=None, repr=False, compare=False)

    def vectors(self) -> np.ndarray:
        return factorize(self.U)


def build_primal(graph: Graph, options: SolverOptions | None = None,
                 triangle: bool = False) -> SdpProblem:
    """Assemble the program for a graph.  Isolated vertices get no edge
    constraints; their eta is fixed to 0 and reported in ``isolated``."""
    isolated = tuple(int(i) for i in np.nonzero(graph.degrees() == 0)[0])
    return SdpProblem(
        n=graph.n,
        edges=tuple(graph.edges),
        neighbors=tuple(graph.neighbors(i) for i in range(graph.n)),
        triangle=triangle,
        options=options or SolverOptions(),
        isolated=isolated,
    )


# ---------------------------------------------------------------------------
# proximal pieces


def _prox_max(values: np.ndarray, t: float) -> np.ndarray:
    """argmin_theta  max(theta) + (1/2t) ||theta - values||^2  (water-filling)."""
    w = np.sort(values)[::-1]
    csum = np.cumsum(w)
    k = np.arange(1, len(w) + 1)
    tau = (csum - t) / k
    # the largest k with tau_k < w_k is the active set size
    valid = tau >= np.append(w[1:], -np.inf)
    kk = int(np.argmax(valid))
    return np.minimum(values, tau[kk])


def _spectral_init(graph_edges: Sequence[tuple[int, int]], n: int) -> np.ndarray:
    """Balanced rank-one guess from the normalized-Laplacian Fiedler split;
    falls back to the spread (simplex) solution when n is odd."""
    if n % 2 == 1 or not graph_edges:
        return (n * np.eye(n) - np.ones((n, n))) / (n - 1)
    A = np.zeros((n, n))
    e = np.asarray(graph_edges)
    A[e[:, 0], e[:, 1]] = 1.0
    A[e[:, 1], e[:, 0]] = 1.0
    deg = A.sum(axis=1)
    inv = np.where(deg > 0, 1.0 / np.sqrt(np.maximum(deg, 1e-12)), 0.0)
    L = np.eye(n) - inv[:, None] * A * inv[None, :]
    _, vecs = np.linalg.eigh(L)
    order = np.lexsort((np.arange(n), vecs[:, 1]))
    s = np.empty(n)
    s[order[: n // 2]] = -1.0
    s[order[n // 2:]] = 1.0
    return np.outer(s, s)


class _Workspace:
    """Index arrays and iterate storage for the ADMM."""

    def __init__(self, problem: SdpProblem):
        n = problem.n
        self.n = n
        e = np.asarray(problem.edges, dtype=np.int64).reshape(-1, 2)
        self.ei, self.ej = e[:, 0], e[:, 1]
        m = len(e)
        self.m = m
        # directed index layout: k = (i->j), m + k = (j->i) for edge k=(i,j)
        tails = np.concatenate([self.ei, self.ej]) if m else np.empty(0, dtype=np.int64)
        self.vertex_dirs = [np.nonzero(tails == v)[0] for v in range(n)]
        self.triples = np.empty((0, 3), dtype=np.int64)

    def edge_forms(self, U: np.ndarray) -> np.ndarray:
        """Q_e(U) = U_ii + U_jj - 2 U_ij per unordered edge."""
        if self.m == 0:
            return np.empty(0)
        d = np.diagonal(U)
        return d[self.ei] + d[self.ej] - 2.0 * U[self.ei, self.ej]

    def triple_forms(self, U: np.ndarray) -> np.ndarray:
        if len(self.triples) == 0:
            return np.empty(0)
        i, j, k = self.triples.T
        return U[j, j] - U[i, j] - U[j, k] + U[i, k]


def _u_step(ws: _Workspace, P: np.ndarray, asum: np.ndarray, btargets: np.ndarray,
            w: float, cg_state: dict, cg_tol: float) -> np.ndarray:
    """Minimize ||U-P||_F^2 + w sum_dir (Q_e(U)-a_dir)^2 + w sum_tau (g_tau(U)-b_tau)^2
    over symmetric U with diag(U)=1 and <J,U>=0, exactly.

    With the diagonal pinned, the quadratic is separable per off-diagonal
    pair apart from triangle cuts, and the single balance constraint is a
    scalar multiplier; with cuts active the linear systems go through a
    preconditioned conjugate gradient.
    """
    n = ws.n
    npairs = n * (n - 1) // 2
    de = 4.0 + 16.0 * w  # edge diagonal of the normal matrix
    if len(ws.triples) == 0:
        mu_num = 0.5 * (P.sum() - np.trace(P)) + 0.5 * n
        coef = 0.5 * (npairs - ws.m)
        if ws.m:
            Pe = P[ws.ei, ws.ej]
            base = (4.0 * Pe + 16.0 * w - 4.0 * w * asum) / de
            mu_num += base.sum() - Pe.sum()
            coef += 2.0 * ws.m / de
        mu = mu_num / coef
        U = P - mu / 2.0
        if ws.m:
            vals = base - 2.0 * mu / de
            U[ws.ei, ws.ej] = vals
            U[ws.ej, ws.ei] = vals
        np.fill_diagonal(U, 1.0)
        return U

    # CG path: solve H u = rhs and H u2 = 2*ones over off-diagonal pairs.
    iu, ju = cg_state["iu"], cg_state["ju"]
    diagH = cg_state["diagH"]
    ti, tj, tk = ws.triples.T

    def H(u_flat):
        M = np.zeros((n, n))
        M[iu, ju] = u_flat
        s = -M[np.minimum(ti, tj), np.maximum(ti, tj)] \
            - M[np.minimum(tj, tk), np.maximum(tj, tk)] \
            + M[np.minimum(ti, tk), np.maximum(ti, tk)]
        out = cg_state["base_diag"] * u_flat
        upd = np.zeros((n, n))
        np.add.at(upd, (np.minimum(ti, tj), np.maximum(ti, tj)), -2.0 * w * s)
        np.add.at(upd, (np.minimum(tj, tk), np.maximum(tj, tk)), -2.0 * w * s)
        np.add.at(upd, (np.minimum(ti, tk), np.maximum(ti, tk)), 2.0 * w * s)
        return out + upd[iu, ju]

    def cg(rhs, x0):
        x = x0.copy()
        r = rhs - H(x)
        z = r / diagH
        p = z.copy()
        rz = r @ z
        tol2 = (cg_tol * max(1.0, np.linalg.norm(rhs))) ** 2
        for _ in range(400):
            if r @ r <= tol2:
                break
            Hp = H(p)
            alpha = rz / (p @ Hp)
            x += alpha * p
            r -= alpha * Hp
            z = r / diagH
            rz_new = r @ z
            p = z + (rz_new / rz) * p
            rz = rz_new
        return x

    rhs = 4.0 * P[iu, ju]
    if ws.m:
        add = np.zeros((n, n))
        add[ws.ei, ws.ej] = 16.0 * w - 4.0 * w * asum
        rhs += add[iu, ju]
    tvec = np.zeros((n, n))
    np.add.at(tvec, (np.minimum(ti, tj), np.maximum(ti, tj)), 2.0 * w * (1.0 - btargets))
    np.add.at(tvec, (np.minimum(tj, tk), np.maximum(tj, tk)), 2.0 * w * (1.0 - btargets))
    np.add.at(tvec, (np.minimum(ti, tk), np.maximum(ti, tk)), -2.0 * w * (1.0 - btargets))
    rhs -= tvec[iu, ju]

    u1 = cg(rhs, cg_state["u1"])
    if cg_state.get("u2_dirty", True):
        cg_state["u2"] = cg(np.full(npairs, 2.0), cg_state["u2"])
        cg_state["u2_dirty"] = False
    u2 = cg_state["u2"]
    cg_state["u1"] = u1
    mu = (u1.sum() + 0.5 * n) / u2.sum()
    u_flat = u1 - mu * u2
    U = np.zeros((n, n))
    U[iu, ju] = u_flat
    U = U + U.T
    np.fill_diagonal(U, 1.0)
    return U


def _make_cg_state(ws: _Workspace, w: float) -> dict:
    n = ws.n
    iu, ju = np.triu_indices(n, k=1)
    base = np.full(len(iu), 4.0)
    if ws.m:
        M = np.zeros((n, n))
        M[ws.ei, ws.ej] = 16.0 * w
        base += M[iu, ju]
    diagH = base.copy()
    if len(ws.triples):
        ti, tj, tk = ws.triples.T
        upd = np.zeros((n, n))
        for a, b in ((ti, tj), (tj, tk), (ti, tk)):
            np.add.at(upd, (np.minimum(a, b), np.maximum(a, b)), 2.0 * w)
        diagH += upd[iu, ju]
    npairs = n * (n - 1) // 2
    return {"iu": iu, "ju": ju, "base_diag": base, "diagH": diagH,
            "u1": np.zeros(npairs), "u2": np.zeros(npairs), "u2_dirty": True}


def max_triangle_violation(U: np.ndarray, sample_middles: Sequence[int] | None = None) -> float:
    """Largest violation of U_jj - U_ij - U_jk + U_ik >= 0 over triples."""
    n = U.shape[0]
    worst = 0.0
    middles = range(n) if sample_middles is None else sample_middles
    for j in middles:
        cj = U[:, j]
        G = U[j, j] - cj[:, None] - cj[None, :] + U
        G[j, :] = 0.0
        G[:, j] = 0.0
        worst = max(worst, float(-G.min()))
    return worst


def find_violated_triples(U: np.ndarray, K: int, tol: float = DEFAULT_TRIANGLE_TOL,
                          exclude: set[tuple[int, int, int]] | None = None) -> list[tuple[int, int, int]]:
    """K most-violated triangle triples (i, j, k), j the middle, i < k."""
    n = U.shape[0]
    exclude = exclude or set()
    per_j = max(8, (3 * K) // max(n, 1))
    found: list[tuple[float, tuple[int, int, int]]] = []
    for j in range(n):
        cj = U[:, j]
        G = U[j, j] - cj[:, None] - cj[None, :] + U
        G[j, :] = np.inf
        G[:, j] = np.inf
        G[np.tril_indices(n)] = np.inf  # canonical i < k, skip i == k
        flat = G.ravel()
        take = min(per_j, flat.size)
        cand = np.argpartition(flat, take - 1)[:take]
        for pos in cand:
            v = flat[pos]
            if v < -tol:
                i, k = divmod(int(pos), n)
                trip = (i, j, k)
                if trip not in exclude:
                    found.append((float(v), trip))
    found.sort()
    return [t for _, t in found[:K]]


def solve(problem: SdpProblem, warm: dict | None = None,
          active_triples: Sequence[tuple[int, int, int]] = ()) -> SdpSolution:
    """Run the ADMM.  Non-convergence within the iteration cap is not an
    error: the solution comes back flagged ``converged=False``."""
    opts = problem.options
    n = problem.n
    ws = _Workspace(problem)
    ws.triples = np.asarray(sorted(set(active_triples)), dtype=np.int64).reshape(-1, 3)
    m = ws.m

    t0 = time.perf_counter()
    if warm is not None:
        U = warm["U"].copy()
        Z = warm["Z"].copy()
        theta = warm["theta"].copy()
        Lam = warm["Lam"].copy()
        lam = warm["lam"].copy()
        rho = warm["rho"]
        carried = {t: (th, lm) for t, th, lm in
                   zip(warm.get("triples", []), warm.get("theta_tri", ()), warm.get("lam_tri", ()))}
    else:
        U = _spectral_init(problem.edges, n)
        Z = U.copy()
        q0 = ws.edge_forms(U)
        theta = np.concatenate([q0, q0])
        Lam = np.zeros((n, n))
        lam = np.zeros(2 * m)
        rho = opts.rho
        carried = {}
    ntrip = len(ws.triples)
    # realign triple auxiliaries/duals with the (sorted) active set; fresh
    # cuts start from the projected current value with zero dual
    fresh = np.maximum(ws.triple_forms(U), 0.0)
    th_tri = np.empty(ntrip)
    lam_tri = np.zeros(ntrip)
    for pos, trip in enumerate(map(tuple, ws.triples)):
        if trip in carried:
            th_tri[pos], lam_tri[pos] = carried[trip]
        else:
            th_tri[pos] = fresh[pos]

    w = opts.edge_weight
    cg_state = _make_cg_state(ws, w) if ntrip else {}
    alpha = opts.over_relax
    obj_hist: list[tuple[int, float]] = []
    converged = False
    feas = np.inf
    it = 0

    def objective_now():
        vals = 0.0
        for v in range(n):
            idx = ws.vertex_dirs[v]
            if len(idx):
                vals += float(theta[idx].max())
        return vals

    while it < opts.max_iter:
        it += 1
        # U-step targets
        a_dir = theta - lam
        asum = a_dir[:m] + a_dir[m:] if m else np.empty(0)
        btargets = th_tri - lam_tri
        P = Z - Lam
        U = _u_step(ws, P, asum, btargets, w, cg_state, opts.cg_tol)

        q = ws.edge_forms(U)
        qdir = np.concatenate([q, q])
        g = ws.triple_forms(U)

        # over-relaxation on both coupling constraints
        hU = alpha * U + (1 - alpha) * Z
        hq = alpha * qdir + (1 - alpha) * theta
        hg = alpha * g + (1 - alpha) * th_tri

        V = hU + Lam
        V = 0.5 * (V + V.T)
        evals, evecs = np.linalg.eigh(V)
        pos = evals > 0
        Z = (evecs[:, pos] * evals[pos]) @ evecs[:, pos].T
        Z = 0.5 * (Z + Z.T)

        vtheta = hq + lam
        new_theta = np.empty_like(theta)
        t = 1.0 / (rho * w)
        for v in range(n):
            idx = ws.vertex_dirs[v]
            if len(idx):
                new_theta[idx] = _prox_max(vtheta[idx], t)
        theta = new_theta
        th_tri = np.maximum(hg + lam_tri, 0.0)

        Lam += hU - Z
        if m:
            lam += hq - theta
        if ntrip:
            lam_tri += hg - th_tri

        if it % opts.check_every == 0 or it == opts.max_iter:
            prim = max(float(np.abs(U - Z).max()),
                       float(np.abs(qdir - theta).max()) if m else 0.0,
                       float(np.abs(g - th_tri).max()) if ntrip else 0.0)
            feas = prim
            obj = objective_now()
            obj_hist.append((it, obj))
            stationary = False
            for past_it, past_obj in reversed(obj_hist[:-1]):
                if it - past_it >= 50:
                    stationary = abs(obj - past_obj) <= opts.tol_obj * max(1.0, abs(obj))
                    break
            if prim <= opts.tol_feas and (stationary or len(obj_hist) < 3):
                converged = True
                break

    eta = np.zeros(n)
    for v in range(n):
        idx = ws.vertex_dirs[v]
        if len(idx):
            eta[v] = theta[idx].max()
    q = ws.edge_forms(U)
    edge_viol = 0.0
    if m:
        tails = np.concatenate([ws.ei, ws.ej])
        edge_viol = float(np.maximum(np.concatenate([q, q]) - eta[tails], 0.0).max())
    min_eig = float(np.linalg.eigvalsh(0.5 * (U + U.T)).min())
    tri_viol = max_triangle_violation(U) if (problem.triangle or ntrip) else float("nan")
    res = Residuals(
        max_diag_dev=float(np.abs(np.diagonal(U) - 1.0).max()),
        balance_dev=float(abs(U.sum())),
        max_edge_violation=edge_viol,
        min_eig_U=min_eig,
        triangle_violation=tri_viol,
    )
    state = {"U": U, "Z": Z, "theta": theta, "Lam": Lam, "lam": lam, "rho": rho,
             "theta_tri": th_tri, "lam_tri": lam_tri,
             "triples": [tuple(t) for t in ws.triples]}
    return SdpSolution(
        U=U, eta=eta, objective=float(eta.sum()), residuals=res,
        iterations=it, wall_time=time.perf_counter() - t0, converged=converged,
        info={"rho": rho, "feas": feas, "n_triples": ntrip},
        _state=state,
    )


def strengthen_triangle(problem: SdpProblem, solution: SdpSolution,
                        K: int | None = None, max_rounds: int = 20,
                        viol_tol: float = DEFAULT_TRIANGLE_TOL) -> SdpSolution:
    """Cutting-plane loop for the squared-distance triangle inequalities.

    Adds the K most-violated triples per round and re-solves warm-started
    until the worst violation is at most ``viol_tol`` or the round cap is
    reached (the partially strengthened solution is then returned, flagged
    in ``info["strengthened"]``).  K=0 is the identity.
    """
    if K is None:
        K = 5 * problem.n
    if K == 0:
        return solution
    active: set[tuple[int, int, int]] = set(solution._state.get("triples", [])) if solution._state else set()
    sol = solution
    trace = []
    for rnd in range(max_rounds):
        worst = max_triangle_violation(sol.U)
        trace.append(worst)
        if worst <= viol_tol:
            sol.info["strengthened"] = True
            sol.info["strengthen_trace"] = trace
            sol.residuals.triangle_violation = worst
            return sol
        new = find_violated_triples(sol.U, K, tol=viol_tol, exclude=active)
        if not new:
            break
        active.update(new)
        sol = solve(problem, warm=sol._state, active_triples=sorted(active))
    worst = max_triangle_violation(sol.U)
    trace.append(worst)
    sol.residuals.triangle_violation = worst
    sol.info["strengthened"] = worst <= viol_tol
    sol.info["strengthen_trace"] = trace
    return sol


def factorize(U: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    """Rows u_i with <u_i, u_j> = U_ij, after clipping negative eigenvalues.

    Raises if U is substantially non-PSD (smallest eigenvalue below -tol).
    """
    Us = 0.5 * (U + U.T)
    evals, evecs = np.linalg.eigh(Us)
    if evals.min() < -tol:
        raise ValueError(f"matrix is not PSD within tolerance (min eig {evals.min():.3e})")
    keep = evals > 0
    return evecs[:, keep] * np.sqrt(evals[keep])


# ---------------------------------------------------------------------------
# solution files


def solution_to_json(sol: SdpSolution) -> str:
    n = sol.U.shape[0]
    payload = {
        "kind": "solution",
        "format": 1,
        "n": n,
        "U": [f"{x:.17g}" for x in sol.U.ravel()],
        "eta": [f"{x:.17g}" for x in sol.eta],
        "objective": sol.objective,
        "residuals": sol.residuals.to_jsonable(),
        "iterations": sol.iterations,
        "wallTime": sol.wall_time,
        "converged": sol.converged,
        "trace": {k: v for k, v in sol.info.items() if k != "strengthen_trace"},
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def solution_from_json(text: str) -> SdpSolution:
    d = json.loads(text)
    if d.get("kind") != "solution":
        raise ValueError("not a solution payload")
    n = d["n"]
    U = np.array([float(x) for x in d["U"]]).reshape(n, n)
    eta = np.array([float(x) for x in d["eta"]])
    r = d["residuals"]
    res = Residuals(r["maxDiagDev"], r["balanceDev"], r["maxEdgeViolation"],
                    r["minEigU"], r["triangleViolation"])
    return SdpSolution(U=U, eta=eta, objective=d["objective"], residuals=res,
                       iterations=d["iterations"], wall_time=d["wallTime"],
                       converged=d["converged"], info=dict(d.get("trace", {})))
