"""Command-line entry point.

Subcommands: ``prox-eval``, ``resolvent-eval``, ``solve`` (each takes a
problem-spec file) and ``verify`` (seeded identity suite).  Reports go to
stdout as JSON (verify: fixed-format text); ``--out`` mirrors them to a
file.  Exit codes: 0 success, 2 malformed spec, 3 solver failure, 4
verification failure.
"""

import argparse
import json
import sys

from . import admm as admm_mod
from . import compose, oracle, postcompose, specfile
from .config import DEFAULTS
from .errors import (
    InnerSolverDiverged,
    MaxIterations,
    MetricProxError,
    NotAttained,
    NotFound,
    SpecError,
)

_MAX_RECORD_LINES = 200


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metricprox",
        description="Resolvents of composed monotone operators, generalized "
        "proximity operators, and a metric-penalty splitting solver.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("prox-eval", "evaluate a generalized proximity operator"),
        ("resolvent-eval", "evaluate the resolvent of a metric-scaled composition"),
        ("solve", "run the splitting solver on min f(x) + g(Lx)"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("spec", help="problem-spec file")
        p.add_argument("--out", help="also write the report to this path")
    v = sub.add_parser("verify", help="run the seeded identity suite")
    v.add_argument("--seed", type=int, default=None, help="suite seed (default 42)")
    v.add_argument("--count", type=int, default=None, help="instances per identity (default 50)")
    v.add_argument("--spec", help="optional spec file providing seed/count/tolerances")
    v.add_argument("--out", help="also write the report to this path")
    return parser


def _emit(text: str, out_path):
    sys.stdout.write(text)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)


def _vec(x):
    return None if x is None else [float(v) for v in x]


def _check_task(spec, command):
    if spec.task is not None and spec.task != command:
        raise SpecError(f"spec declares task {spec.task!r} but the {command!r} command was run")


def _run_prox_eval(args) -> int:
    spec = specfile.parse_problem_file(args.spec)
    _check_task(spec, "prox-eval")
    f, lmap, metric, u, cfg = specfile.build_prox_eval(spec)
    result = postcompose.prox_infcomp(f, lmap, metric, u, cfg)
    payload = {
        "task": "prox-eval",
        "attained": result.attained,
        "representative": _vec(result.representative),
        "image": _vec(result.image),
        "kernel_complement": _vec(result.kernel_complement),
        "explanation": result.explanation,
        "status": result.report.status,
        "iterations": result.report.iterations,
        "final_residual": result.report.final_residual,
        "dual_point": _vec(result.report.dual_point),
    }
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return 0


def _run_resolvent_eval(args) -> int:
    spec = specfile.parse_problem_file(args.spec)
    _check_task(spec, "resolvent-eval")
    problem, x, cfg = specfile.build_resolvent_eval(spec)
    value, route, report = compose.resolvent_dispatch(problem, x, cfg)
    payload = {
        "task": "resolvent-eval",
        "route": route,
        "value": _vec(value),
        "status": report.status if report else "converged",
        "iterations": report.iterations if report else None,
        "final_residual": report.final_residual if report else None,
    }
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return 0


def _run_solve(args) -> int:
    spec = specfile.parse_problem_file(args.spec)
    _check_task(spec, "solve")
    f, g, lmap, metric, cfg = specfile.build_solve(spec)
    report = admm_mod.admm_solve(f, g, lmap, metric, cfg)
    records = report.records
    stride = max(1, -(-len(records) // _MAX_RECORD_LINES))
    sampled = records[::stride]
    if records and sampled[-1].index != records[-1].index:
        sampled.append(records[-1])
    payload = {
        "task": "solve",
        "converged": report.converged,
        "iterations": report.iterations,
        "final_objective": report.final_objective,
        "x": _vec(report.x),
        "z": _vec(report.z),
        "primal_residual": records[-1].primal_residual if records else None,
        "dual_residual": records[-1].dual_residual if records else None,
        "qualification": report.qualification,
        "all_x_updates_attained": report.all_x_updates_attained,
        "records": [
            [r.index, r.x_norm, r.z_norm, r.primal_residual, r.dual_residual] for r in sampled
        ],
        "tolerances": report.tolerances,
        "wall_time": report.wall_time,
    }
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return 0


def _run_verify(args) -> int:
    seed, count, cfg = 42, 50, DEFAULTS
    if args.spec:
        spec = specfile.parse_problem_file(args.spec)
        _check_task(spec, "verify")
        cfg = spec.tolerances()
        if spec.seed is not None:
            seed = spec.seed
        if spec.count is not None:
            count = spec.count
    if args.seed is not None:
        seed = args.seed
    if args.count is not None:
        count = args.count
    report = oracle.check_identity_suite(seed=seed, count=count, cfg=cfg)
    _emit(report.to_text(), args.out)
    return 0 if report.passed else 4


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    handlers = {
        "prox-eval": _run_prox_eval,
        "resolvent-eval": _run_resolvent_eval,
        "solve": _run_solve,
        "verify": _run_verify,
    }
    try:
        return handlers[args.command](args)
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return 2
    except (NotAttained, MaxIterations, NotFound, InnerSolverDiverged) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    except MetricProxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
