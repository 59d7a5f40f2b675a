"""Experiment orchestration: parameter grids, trial replication, persistence,
and CSV emission for the recovery / approximation / separation regimes.

Every trial is reproducible from (config cell, trial index): its seed is a
hash of the seed base and those coordinates, records are written atomically
per trial, and reruns skip trials whose record file already exists.  CSV
bodies are byte-identical across reruns; timestamps live in a separate
metadata file.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from pathlib import Path

from . import rng as rngmod
from .certificate import (CertificateError, build_certificate, certificate_to_json,
                          verify_certificate)
from .graphs import vertex_expansion
from .instances import (PlantedInstance, VbmParams, apply_adversary, gen_hn, gen_lr14,
                        gen_vbm, instance_to_json)
from .rounding import RoundingError, algorithm1_round, algorithm2_planted, round_exact
from .sdp import SolverOptions, build_primal, factorize, solve, strengthen_triangle
from .spectral import spectral_sweep_edge_cut

TRIALS_SCHEMA = "vexlab-trials-v1"
AGG_SCHEMA = "vexlab-agg-v1"

REGIMES = ("exact-recovery", "lambda-zero", "p-zero", "lr14", "hn-separation")


@dataclass(frozen=True)
class ExperimentConfig:
    regime: str
    grid: dict[str, list]
    trials: int
    seed_base: int
    output_dir: str
    solver: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)

    def cells(self) -> list[dict]:
        keys = sorted(self.grid)
        return [dict(zip(keys, values)) for values in product(*(self.grid[k] for k in keys))]

    def to_jsonable(self) -> dict:
        return {"regime": self.regime, "grid": self.grid, "trials": self.trials,
                "seedBase": self.seed_base, "outputDir": self.output_dir,
                "solver": self.solver, "constants": self.constants}

    @classmethod
    def from_jsonable(cls, d: dict) -> "ExperimentConfig":
        return cls(regime=d["regime"], grid=d["grid"], trials=d["trials"],
                   seed_base=d["seedBase"], output_dir=d["outputDir"],
                   solver=d.get("solver", {}), constants=d.get("constants", {}))


def validate_config(config: ExperimentConfig) -> None:
    if config.regime not in REGIMES:
        raise ValueError(f"unknown regime {config.regime!r}")
    if config.trials < 1 or not config.grid:
        raise ValueError("need a nonempty grid and at least one trial")
    cells = config.cells()
    if not cells:
        raise ValueError("empty grid")
    c1 = float(config.constants.get("c1", 1.0))
    for cell in cells:
        n = cell.get("n", 0)
        if n < 8:
            raise ValueError(f"cell n={n} too small")
        if config.regime == "exact-recovery":
            p = min(cell["p1"], cell["p2"])
            if p * n < c1 * math.log(n):
                raise ValueError(f"exact recovery needs p*n >= c1 log n; got {p * n:.2f} "
                                 f"< {c1 * math.log(n):.2f}")
        if config.regime == "lambda-zero" and cell.get("p1", 0) <= 0:
            raise ValueError("lambda-zero regime needs p1 > 0")
        if config.regime == "p-zero" and cell.get("lambda1", 0) <= 0:
            raise ValueError("p-zero regime needs a spectral gap target")


def trial_seed(config: ExperimentConfig, cell_index: int, trial_index: int) -> int:
    return rngmod.derive_seed(config.seed_base, "cell", cell_index, "trial", trial_index)


def _solver_options(config: ExperimentConfig) -> SolverOptions:
    return SolverOptions(**config.solver)


def density_capped(n: int, gamma: float, constant: float = 300.0) -> float:
    """p with p * gamma * n = constant * ln n, capped at 1.

    Dense-regime gates of this form are unsatisfiable below p = 1 at desk
    scale, so the cap is almost always active; the uncapped value is kept
    in configs for the record.
    """
    return min(1.0, constant * math.log(n) / (gamma * n))


# ---------------------------------------------------------------------------
# per-regime trial bodies


def _build_instance(regime: str, cell: dict, seed: int) -> PlantedInstance:
    if regime in ("exact-recovery", "lambda-zero", "p-zero"):
        params = VbmParams(
            n=cell["n"],
            eps1=Fraction(cell["eps1"]), eps2=Fraction(cell["eps2"]),
            p1=cell["p1"], p2=cell["p2"], c=cell["c"], r=cell["r"],
            lambda1=cell["lambda1"], lambda2=cell["lambda2"],
            adversary=(cell.get("adversary", "none"), cell.get("adversary_params", {})),
            seed=seed)
        inst = gen_vbm(params)
        extra_q = cell.get("extra_random_q", 0.0)
        if extra_q:
            inst = apply_adversary(inst, ("random-within-sides", {"q": extra_q}),
                                   rngmod.derive_seed(seed, "extra-adv"))
        return inst
    if regime == "lr14":
        return gen_lr14(cell["n"], Fraction(cell["eps"]), cell["lambda_target"], seed,
                        ttprime=cell.get("ttprime", "matching"))
    if regime == "hn-separation":
        return gen_hn(cell["n"], Fraction(cell["eps"]), cell["alpha"], seed)
    raise ValueError(regime)


def run_trial(config: ExperimentConfig, cell_index: int, trial_index: int) -> dict:
    """One (cell, trial) execution; returns the JSON-able outcome record.

    Solver failures and rounding hypotheses that do not hold are recorded
    in the outcome, not raised.
    """
    cell = config.cells()[cell_index]
    seed = trial_seed(config, cell_index, trial_index)
    t_start = time.perf_counter()
    out: dict = {"cell": cell_index, "trial": trial_index, "seed": seed, "params": cell}
    try:
        inst = _build_instance(config.regime, cell, seed)
    except Exception as exc:  # generation errors are data, not crashes
        out["error"] = f"generation: {exc}"
        out["wallTimeTotal"] = time.perf_counter() - t_start
        return out
    n = inst.n
    out["plantedBoundary"] = inst.planted_boundary_size()
    out["integralValue"] = 4 * out["plantedBoundary"]
    out["boundaryIsPlanted"] = inst.boundary_is_planted()
    opts = _solver_options(config)

    try:
        if config.regime == "exact-recovery":
            if config.constants.get("certify", True):
                t0 = time.perf_counter()
                try:
                    cert = build_certificate(inst)
                    report = verify_certificate(inst, cert)
                    out["dualObjective"] = float(report.dual_objective)
                    out["dualObjectiveExact"] = report.dual_objective == Fraction(out["integralValue"])
                    out["certified"] = report.integrality_certified
                    out["minEigShifted"] = report.min_eig_shifted
                    out["certViolations"] = report.violations
                except CertificateError as exc:
                    out["certified"] = False
                    out["certError"] = str(exc)
                out["wallTimeCertify"] = time.perf_counter() - t0
            if config.constants.get("solve", True):
                t0 = time.perf_counter()
                sol = solve(build_primal(inst.graph, opts))
                out["wallTimeSolve"] = time.perf_counter() - t0
                out["sdpObjective"] = sol.objective
                out["converged"] = sol.converged
                out["residualFeas"] = sol.info["feas"]
                report, recovered = round_exact(inst.graph, sol)
                matches = set(report.subset) in (set(inst.S), set(inst.Sp))
                out["recovered"] = bool(recovered and matches)
                out["roundPhi"] = float(report.phi)
                out["roundSize"] = report.size

        elif config.regime in ("lambda-zero", "p-zero"):
            t0 = time.perf_counter()
            problem = build_primal(inst.graph, opts, triangle=True)
            sol = solve(problem)
            sol = strengthen_triangle(problem, sol)
            out["wallTimeSolve"] = time.perf_counter() - t0
            out["sdpObjective"] = sol.objective
            out["converged"] = sol.converged
            out["triangleViolation"] = sol.residuals.triangle_violation
            eps_total = float(Fraction(cell["eps1"]) + Fraction(cell["eps2"]))
            alpha = 0.5 - float(Fraction(cell["eps1"]))
            try:
                rep = algorithm1_round(inst.graph, factorize(sol.U, tol=1e-4), alpha)
                out["roundPhi"] = float(rep.phi)
                out["roundSize"] = rep.size
                out["phiRatio"] = float(rep.phi) / eps_total
                out["sizeOk"] = 0.1 * n <= rep.size <= 0.9 * n
                out["ratioOk"] = out["phiRatio"] <= 100.0
            except RoundingError as exc:
                out["roundError"] = str(exc)
                out["sizeOk"] = out["ratioOk"] = False

        elif config.regime == "lr14":
            t0 = time.perf_counter()
            sol = solve(build_primal(inst.graph, opts))
            out["wallTimeSolve"] = time.perf_counter() - t0
            out["sdpObjective"] = sol.objective
            out["converged"] = sol.converged
            delta = sol.objective / n
            eps = float(Fraction(cell["eps"]))
            try:
                rep = algorithm2_planted(inst.graph, sol, delta)
                out["roundPhi"] = float(rep.phi)
                out["roundSize"] = rep.size
                out["phiRatio"] = float(rep.phi) / math.sqrt(eps)
                out["sizeOk"] = rep.size >= n / 20
                out["ratioOk"] = out["phiRatio"] <= 50.0
                out["smallBallOk"] = rep.params.get("small_ball_ok", True)
                out["droppedSize"] = rep.params.get("dropped", 0)
            except RoundingError as exc:
                out["roundError"] = str(exc)
                out["sizeOk"] = out["ratioOk"] = False

        elif config.regime == "hn-separation":
            t0 = time.perf_counter()
            sol = solve(build_primal(inst.graph, opts))
            out["wallTimeSolve"] = time.perf_counter() - t0
            out["sdpObjective"] = sol.objective
            out["converged"] = sol.converged
            report, recovered = round_exact(inst.graph, sol)
            matches = set(report.subset) in (set(inst.S), set(inst.Sp))
            out["recovered"] = bool(recovered and matches)
            out["recoveredBoundary"] = report.boundary
            sweep = spectral_sweep_edge_cut(inst.graph)
            out["sweepEdgeCut"] = sweep.edge_cut
            out["sweepVertexBoundary"] = sweep.vertex_boundary
            out["sweepSize"] = len(sweep.subset)
            groups = inst.params["groups"]
            half1 = set(groups["A1"]) | set(groups["B1"]) | set(groups["T1"]) | set(groups["Tp1"])
            cross = sum(1 for i, j in inst.graph.edges if (i in half1) != (j in half1))
            out["aCutCrossEdges"] = cross
            out["aCutCrossPerN"] = cross / n
            a_report = vertex_expansion(inst.graph, half1)
            out["aCutVertexBoundary"] = a_report.boundary
    except Exception as exc:
        out["error"] = f"{type(exc).__name__}: {exc}"
    out["wallTimeTotal"] = time.perf_counter() - t_start
    return out


# ---------------------------------------------------------------------------
# record persistence and CSV emission


def _record_path(outdir: Path, cell_index: int, trial_index: int) -> Path:
    return outdir / "records" / f"c{cell_index:03d}_t{trial_index:03d}.json"


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


_CSV_FIELDS = [
    "cell", "trial", "seed", "plantedBoundary", "integralValue", "boundaryIsPlanted",
    "dualObjective", "dualObjectiveExact", "certified", "minEigShifted",
    "sdpObjective", "converged", "residualFeas", "triangleViolation",
    "recovered", "roundPhi", "roundSize", "phiRatio", "sizeOk", "ratioOk",
    "smallBallOk", "droppedSize", "recoveredBoundary",
    "sweepEdgeCut", "sweepVertexBoundary", "sweepSize",
    "aCutCrossEdges", "aCutCrossPerN", "aCutVertexBoundary", "error",
]


def records_to_csv(records: list[dict]) -> str:
    buf = io.StringIO()
    buf.write(f"#schema={TRIALS_SCHEMA}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_CSV_FIELDS)
    for rec in sorted(records, key=lambda r: (r["cell"], r["trial"])):
        writer.writerow([_fmt(rec.get(k)) for k in _CSV_FIELDS])
    return buf.getvalue()


def aggregate(records: list[dict]) -> list[dict]:
    """Per-cell aggregates: rates for flags, means for numeric outcomes."""
    cells = sorted({r["cell"] for r in records})
    rows = []
    for c in cells:
        group = [r for r in records if r["cell"] == c]
        row: dict = {"cell": c, "trials": len(group),
                     "errors": sum(1 for r in group if r.get("error") or r.get("certError"))}
        for flag in ("certified", "recovered", "sizeOk", "ratioOk", "dualObjectiveExact",
                     "boundaryIsPlanted", "converged", "smallBallOk"):
            vals = [r[flag] for r in group if flag in r]
            row[f"{flag}Rate"] = repr(sum(map(bool, vals)) / len(vals)) if vals else ""
        for num in ("sdpObjective", "phiRatio", "roundPhi", "sweepVertexBoundary",
                    "aCutCrossPerN", "wallTimeTotal"):
            vals = [r[num] for r in group if r.get(num) is not None]
            row[f"{num}Mean"] = repr(sum(vals) / len(vals)) if vals else ""
        rows.append(row)
    return rows


def aggregates_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    buf.write(f"#schema={AGG_SCHEMA}\n")
    fields = ["cell", "trials", "errors"] + sorted({k for r in rows for k in r}
                                                   - {"cell", "trials", "errors"})
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for r in rows:
        writer.writerow([_fmt(r.get(k)) for k in fields])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands


def cmd_generate(config: ExperimentConfig) -> list[Path]:
    """Write one instance file per (cell, trial); reruns are byte-identical."""
    validate_config(config)
    outdir = Path(config.output_dir)
    written = []
    for ci in range(len(config.cells())):
        for ti in range(config.trials):
            seed = trial_seed(config, ci, ti)
            inst = _build_instance(config.regime, config.cells()[ci], seed)
            path = outdir / "instances" / f"c{ci:03d}_t{ti:03d}.json"
            _write_atomic(path, instance_to_json(inst))
            written.append(path)
    return written


def _pool_trial(args: tuple) -> dict:
    config_dict, ci, ti = args
    return run_trial(ExperimentConfig.from_jsonable(config_dict), ci, ti)


def cmd_pipeline(config: ExperimentConfig, workers: int | None = None,
                 progress=None) -> dict:
    """Run every (cell, trial), resuming from existing records, then emit
    trials.csv, aggregates.csv, and run metadata."""
    validate_config(config)
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    tasks = []
    records = []
    for ci in range(len(config.cells())):
        for ti in range(config.trials):
            path = _record_path(outdir, ci, ti)
            if path.exists():
                records.append(json.loads(path.read_text()))
            else:
                tasks.append((ci, ti))
    if tasks:
        if workers is None:
            workers = os.cpu_count() or 1
        if workers > 1 and len(tasks) > 1:
            os.environ.setdefault("OMP_NUM_THREADS", "1")
            import multiprocessing as mp
            ctx = mp.get_context("spawn")
            payload = config.to_jsonable()
            with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
                for rec in pool.map(_pool_trial, [(payload, ci, ti) for ci, ti in tasks]):
                    _write_atomic(_record_path(outdir, rec["cell"], rec["trial"]),
                                  json.dumps(rec, sort_keys=True, separators=(",", ":")))
                    records.append(rec)
                    if progress:
                        progress(rec)
        else:
            for ci, ti in tasks:
                rec = run_trial(config, ci, ti)
                _write_atomic(_record_path(outdir, ci, ti),
                              json.dumps(rec, sort_keys=True, separators=(",", ":")))
                records.append(rec)
                if progress:
                    progress(rec)
    trials_csv = records_to_csv(records)
    agg_rows = aggregate(records)
    agg_csv = aggregates_to_csv(agg_rows)
    (outdir / "trials.csv").write_text(trials_csv)
    (outdir / "aggregates.csv").write_text(agg_csv)
    _write_atomic(outdir / "metadata.json", json.dumps(
        {"config": config.to_jsonable(), "finishedAt": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
         "records": len(records)}, sort_keys=True, indent=2))
    return {"records": records, "aggregates": agg_rows,
            "trials_csv": trials_csv, "aggregates_csv": agg_csv}


def cmd_certify_instance(inst: PlantedInstance) -> tuple[str, bool]:
    cert = build_certificate(inst)
    report = verify_certificate(inst, cert)
    return certificate_to_json(cert, report), report.integrality_certified


# ---------------------------------------------------------------------------
# presets matching the shipped experiment grids


def _preset_exact_recovery(n: int, trials: int, solve_flag: bool, certify: bool,
                           out: str) -> ExperimentConfig:
    return ExperimentConfig(
        regime="exact-recovery",
        grid={"n": [n], "eps1": ["1/20"], "eps2": ["1/20"], "p1": [0.5], "p2": [0.5],
              "c": [3], "r": [2.0], "lambda1": [0.3], "lambda2": [0.3],
              "adversary": ["random-within-sides"], "adversary_params": [{"q": 0.05}]},
        trials=trials, seed_base=20240001, output_dir=out,
        solver={"max_iter": 6000},
        constants={"c1": 1.0, "solve": solve_flag, "certify": certify})


def preset(name: str, output_root: str | None = None) -> ExperimentConfig:
    root = output_root or os.environ.get("VEXLAB_OUTPUT_ROOT", "runs")

    def out(tag):
        return str(Path(root) / tag)

    if name == "exact-recovery-n200":
        return _preset_exact_recovery(200, 50, False, True, out(name))
    if name == "exact-recovery-n100":
        return _preset_exact_recovery(100, 20, True, True, out(name))
    if name == "lambda-zero-n400":
        n = 400
        return ExperimentConfig(
            regime="lambda-zero",
            grid={"n": [n], "eps1": ["3/100"], "eps2": ["3/100"],
                  "p1": [density_capped(n, 0.06)], "p2": [0.0], "c": [0], "r": [1.0],
                  "lambda1": [0.0], "lambda2": [0.0],
                  "adversary": ["clique-TTprime"], "adversary_params": [{}],
                  "extra_random_q": [0.05]},
            trials=20, seed_base=20240006, output_dir=out(name),
            solver={"max_iter": 6000, "tol_feas": 2e-6},
            constants={"p1_rule": "min(1, 300 ln n / ((eps1+eps2) n))"})
    if name == "p-zero-n400":
        n = 400
        return ExperimentConfig(
            regime="p-zero",
            grid={"n": [n], "eps1": ["3/100"], "eps2": ["3/100"], "p1": [0.0], "p2": [0.0],
                  "c": [1], "r": [2.0], "lambda1": [0.45], "lambda2": [0.0],
                  "adversary": ["clique-TTprime"], "adversary_params": [{}],
                  "extra_random_q": [0.03]},
            trials=20, seed_base=20240007, output_dir=out(name),
            solver={"max_iter": 6000, "tol_feas": 2e-6},
            constants={"lambda_rule": "sharpened constant 320*eps*r^3/beta exceeds the "
                                      "attainable normalized-Laplacian gap at this n; "
                                      "the universal-constant form c5*r^3*(eps1+eps2), "
                                      "c5<1, is satisfied with slack"})
    if name == "lr14-n300":
        return ExperimentConfig(
            regime="lr14",
            grid={"n": [300], "eps": ["1/50"], "lambda_target": [0.3], "ttprime": ["matching"]},
            trials=20, seed_base=20240008, output_dir=out(name),
            solver={"max_iter": 6000, "tol_feas": 2e-6}, constants={})
    if name == "hn-separation-n600":
        return ExperimentConfig(
            regime="hn-separation",
            grid={"n": [600], "eps": ["1/10"], "alpha": [0.25]},
            trials=10, seed_base=20240009, output_dir=out(name),
            solver={"max_iter": 6000, "tol_feas": 2e-6}, constants={})
    if name == "smoke-exact-recovery":
        cfg = _preset_exact_recovery(60, 2, True, True, out(name))
        return cfg
    raise ValueError(f"unknown preset {name!r}; available: {sorted(PRESET_NAMES)}")


PRESET_NAMES = ("exact-recovery-n200", "exact-recovery-n100", "lambda-zero-n400",
                "p-zero-n400", "lr14-n300", "hn-separation-n600", "smoke-exact-recovery")
