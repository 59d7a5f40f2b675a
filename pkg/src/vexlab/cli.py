"""Command-line harness.

Subcommands: generate, solve, certify, round, expand, pipeline, verify.
Configuration comes from JSON files or flags; only the output root may be
taken from the environment (VEXLAB_OUTPUT_ROOT).  Exit codes for verify:
0 all checks pass, 1 a check failed, 2 input files missing or unparsable.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .certificate import (build_certificate, certificate_from_json, certificate_to_json,
                          complementary_slackness, flow_check, verify_certificate)
from .graphs import (Graph, balanced_vertex_expansion_bruteforce, graph_from_edgelist,
                     graph_from_json, vertex_expansion)
from .harness import (ExperimentConfig, PRESET_NAMES, cmd_generate, cmd_pipeline, preset)
from .instances import instance_from_json, instance_to_json
from .rounding import algorithm1_round, algorithm2_planted, round_exact
from .sdp import (SolverOptions, build_primal, factorize, solution_from_json,
                  solution_to_json, solve, strengthen_triangle)


def _load_config(args) -> ExperimentConfig:
    if args.preset:
        cfg = preset(args.preset, output_root=args.output)
    else:
        cfg = ExperimentConfig.from_jsonable(json.loads(Path(args.config).read_text()))
        if args.output:
            cfg = ExperimentConfig.from_jsonable({**cfg.to_jsonable(), "outputDir": args.output})
    return cfg


def _read_instance(path: str):
    return instance_from_json(Path(path).read_text())


def _solver_options(args) -> SolverOptions:
    kwargs = {}
    if args.tol_feas is not None:
        kwargs["tol_feas"] = args.tol_feas
    if args.tol_obj is not None:
        kwargs["tol_obj"] = args.tol_obj
    if args.max_iter is not None:
        kwargs["max_iter"] = args.max_iter
    return SolverOptions(**kwargs)


def _cmd_generate(args) -> int:
    cfg = _load_config(args)
    paths = cmd_generate(cfg)
    print(f"wrote {len(paths)} instance files under {cfg.output_dir}")
    return 0


def _cmd_pipeline(args) -> int:
    cfg = _load_config(args)

    def progress(rec):
        status = "error" if rec.get("error") else "ok"
        print(f"cell {rec['cell']} trial {rec['trial']}: {status} "
              f"({rec.get('wallTimeTotal', 0):.1f}s)", flush=True)

    result = cmd_pipeline(cfg, workers=args.workers, progress=progress)
    print(f"{len(result['records'])} records -> {cfg.output_dir}/trials.csv")
    for row in result["aggregates"]:
        print(json.dumps(row, sort_keys=True))
    return 0


def _cmd_solve(args) -> int:
    inst = _read_instance(args.instance)
    problem = build_primal(inst.graph, _solver_options(args), triangle=args.triangle)
    sol = solve(problem)
    if args.triangle:
        sol = strengthen_triangle(problem, sol)
    text = solution_to_json(sol)
    Path(args.out).write_text(text)
    print(f"objective={sol.objective:.6f} converged={sol.converged} "
          f"iterations={sol.iterations} -> {args.out}")
    return 0


def _cmd_certify(args) -> int:
    inst = _read_instance(args.instance)
    cert = build_certificate(inst)
    report = verify_certificate(inst, cert)
    if args.flow:
        flow = flow_check(inst, cert)
        print(f"flow: min={flow.min_flow:.3e} threshold={flow.threshold:.3e} "
              f"ok={flow.ok} crosscheck_agree={flow.crosscheck_agree}")
    Path(args.out).write_text(certificate_to_json(cert, report))
    print(f"dualObjective={report.dual_objective} certified={report.integrality_certified} "
          f"-> {args.out}")
    return 0 if report.integrality_certified else 1


def _cmd_round(args) -> int:
    inst = _read_instance(args.instance)
    sol = solution_from_json(Path(args.solution).read_text())
    if args.method == "exact":
        report, recovered = round_exact(inst.graph, sol)
        report.params["recovered"] = recovered
    elif args.method == "cluster":
        alpha = args.alpha if args.alpha is not None else 0.5 - len(inst.T) / inst.n
        report = algorithm1_round(inst.graph, factorize(sol.U, tol=1e-4), alpha)
    elif args.method == "ball":
        report = algorithm2_planted(inst.graph, sol, sol.objective / inst.n)
    else:
        raise ValueError(args.method)
    print(json.dumps(report.to_jsonable(), sort_keys=True))
    return 0


def _load_graph_any(path: str) -> Graph:
    text = Path(path).read_text()
    try:
        payload = json.loads(text)
    except json.JSONDecodeError:
        return graph_from_edgelist(text)
    if payload.get("kind") == "instance":
        return instance_from_json(text).graph
    return graph_from_json(text)


def _cmd_expand(args) -> int:
    graph = _load_graph_any(args.graph)
    if args.subset:
        subset = [int(v) for v in args.subset.split(",")]
        report = vertex_expansion(graph, subset)
    else:
        report = balanced_vertex_expansion_bruteforce(graph)
    print(json.dumps(report.to_jsonable(), sort_keys=True))
    return 0


def _cmd_verify(args) -> int:
    try:
        inst = _read_instance(args.instance)
        payload = json.loads(Path(args.artifact).read_text())
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    kind = payload.get("kind")
    if kind == "certificate":
        cert = certificate_from_json(json.dumps(payload))
        report = verify_certificate(inst, cert)
        print(json.dumps(report.to_jsonable(), sort_keys=True))
        if report.integrality_certified:
            print("verify: all checks passed")
            return 0
        failing = []
        if not report.feasible:
            failing.append("(1) dual feasibility")
        if report.eigen_zero_residual != 0:
            failing.append("(2) M*1_S = 0")
        if not report.rank_condition:
            failing.append("(3) PSD rank n-1 witness")
        if not report.objective_matches_integral:
            failing.append("(4) dual objective equality")
        print("verify: FAILED " + "; ".join(failing))
        return 1
    if kind == "solution":
        sol = solution_from_json(json.dumps(payload))
        res = sol.residuals
        problems = []
        if res.max_diag_dev > 1e-5:
            problems.append(f"diag deviation {res.max_diag_dev:.2e}")
        if res.balance_dev > 1e-4 * inst.n:
            problems.append(f"balance deviation {res.balance_dev:.2e}")
        if res.min_eig_U < -1e-5:
            problems.append(f"min eigenvalue {res.min_eig_U:.2e}")
        U = sol.U
        recomputed = float(np.abs(np.diagonal(U) - 1).max())
        if abs(recomputed - res.max_diag_dev) > 1e-9:
            problems.append("stored residuals disagree with recomputation")
        print(json.dumps(res.to_jsonable(), sort_keys=True))
        if problems:
            print("verify: FAILED " + "; ".join(problems))
            return 1
        print("verify: all checks passed")
        return 0
    print(f"error: unknown artifact kind {kind!r}", file=sys.stderr)
    return 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="vexlab",
                                     description="planted sparse vertex cut laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_args(p):
        p.add_argument("--config", help="experiment config JSON")
        p.add_argument("--preset", choices=PRESET_NAMES, help="named preset grid")
        p.add_argument("--output", help="output directory override")

    p = sub.add_parser("generate", help="write instance files for a grid")
    add_config_args(p)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("pipeline", help="generate/solve/certify/round over a grid")
    add_config_args(p)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=_cmd_pipeline)

    p = sub.add_parser("solve", help="solve the SDP for one instance")
    p.add_argument("instance")
    p.add_argument("--out", required=True)
    p.add_argument("--tol-feas", type=float, default=None)
    p.add_argument("--tol-obj", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--triangle", action="store_true")
    p.add_argument("--seed", type=int, default=0, help="recorded in outputs; the solver is deterministic")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("certify", help="build and verify a dual certificate")
    p.add_argument("instance")
    p.add_argument("--out", required=True)
    p.add_argument("--flow", action="store_true", help="also run the flow diagnostics")
    p.set_defaults(func=_cmd_certify)

    p = sub.add_parser("round", help="round a solution into a cut")
    p.add_argument("instance")
    p.add_argument("solution")
    p.add_argument("--method", choices=("exact", "cluster", "ball"), default="exact")
    p.add_argument("--alpha", type=float, default=None)
    p.set_defaults(func=_cmd_round)

    p = sub.add_parser("expand", help="vertex expansion of a subset or brute-force balanced optimum")
    p.add_argument("graph", help="graph/instance file (JSON or edge list)")
    p.add_argument("--subset", help="comma-separated vertex ids; omit for brute force")
    p.set_defaults(func=_cmd_expand)

    p = sub.add_parser("verify", help="check a certificate or solution against an instance")
    p.add_argument("instance")
    p.add_argument("artifact", help="certificate or solution JSON")
    p.set_defaults(func=_cmd_verify)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
