"""Command-line frontend: ``primalbp {info,exact,bp,compare,check} FILE ...``.

Every command prints one JSON document on stdout. Floats are written with
17 significant digits so reports round-trip exactly. Exit status: 0 pass,
1 check failed or BP did not converge, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import collections
import hashlib
import json
import math
import sys
import time

import numpy as np

from . import checks
from .bp_engine import BpConfig, BpNumericalError, run_bp
from .exact_oracle import (
    DEFAULT_CAP,
    StateSpaceTooLarge,
    entropy_exact,
    is_acyclic,
    log_partition_exact,
    marginals_exact,
)
from .local import beliefs, bethe_entropy, bethe_log_partition, bethe_objective
from .model import Model, ModelError, TableVector
from .modelfile import ModelFileError, parse_model

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _dump(obj, indent: int = 0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_dump(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(x, (dict, list, tuple)) for x in obj):
            return "[" + ", ".join(_dump(x) for x in obj) + "]"
        return "[\n" + ",\n".join(inner + _dump(x, indent + 1) for x in obj) + "\n" + pad + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return json.dumps(str(x))
        return format(x, ".17g")
    return json.dumps(str(obj))


def render_report(report: dict) -> str:
    return _dump(report) + "\n"


def _tables(tv: TableVector) -> dict:
    return {
        "variables": [t.tolist() for t in tv.unary],
        "hyperedges": [t.ravel().tolist() for t in tv.higher],
    }


def _bp_config(args) -> BpConfig:
    schedule = "round_robin" if args.schedule == "roundrobin" else "random"
    return BpConfig(
        tolerance=args.tol,
        max_sweeps=args.max_sweeps,
        schedule=schedule,
        seed=args.seed if schedule == "random" else None,
        damping=args.damping,
    )


def _cap(args):
    return None if getattr(args, "force", False) else args.cap


def cmd_info(model: Model, args):
    g = model.graph
    arity = collections.Counter(len(e) for e in g.hyperedges)
    results = {
        "num_vars": g.num_vars,
        "num_hyperedges": g.num_edges,
        "arity_histogram": {str(k): arity[k] for k in sorted(arity)},
        "acyclic": is_acyclic(model),
        "state_space_size": g.state_space_size,
        "degenerate_variables": model.degenerate_variables(),
    }
    return results, {}, {}


def cmd_exact(model: Model, args):
    cap = _cap(args)
    results = {
        "log_partition": log_partition_exact(model, cap),
        "entropy": entropy_exact(model, cap),
        "marginals": _tables(marginals_exact(model, cap)),
    }
    return results, {}, {}


def _bp_results(model: Model, config: BpConfig):
    result = run_bp(model, config)
    fp = result.final_model
    mu = beliefs(fp)
    results = {
        "status": result.status,
        "sweeps": result.sweeps_used,
        "final_residual": result.final_residual,
        "bethe_log_partition": bethe_log_partition(fp),
        "bethe_entropy_counting": bethe_entropy(mu, "counting"),
        "bethe_entropy_kl": bethe_entropy(mu, "kl"),
        "bethe_objective": bethe_objective(fp, mu),
        "beliefs": _tables(mu),
    }
    return result, results


def cmd_bp(model: Model, args):
    config = _bp_config(args)
    result, results = _bp_results(model, config)
    seeds = {"schedule_seed": config.seed} if config.seed is not None else {}
    return results, {"converged": result.converged}, seeds


def cmd_compare(model: Model, args):
    config = _bp_config(args)
    cap = _cap(args)
    result, bp = _bp_results(model, config)
    exact_f = log_partition_exact(model, cap)
    exact_m = marginals_exact(model, cap)
    mu = beliefs(result.final_model)
    results = {
        "bp_status": bp["status"],
        "bp_sweeps": bp["sweeps"],
        "bp_final_residual": bp["final_residual"],
        "acyclic": is_acyclic(model),
        "log_partition": exact_f,
        "bethe_log_partition": bp["bethe_log_partition"],
        "log_partition_error": abs(bp["bethe_log_partition"] - exact_f),
        "max_belief_error": mu.max_abs_diff(exact_m),
        "max_variable_belief_error": max(
            float(np.max(np.abs(x - y))) for x, y in zip(mu.unary, exact_m.unary)
        ),
    }
    seeds = {"schedule_seed": config.seed} if config.seed is not None else {}
    return results, {"converged": result.converged}, seeds


def cmd_check(model: Model, args):
    config = _bp_config(args)
    results, verdicts = checks.run_check(args.what, model, config, args.seed, _cap(args))
    results = {"check": args.what, **results}
    return results, verdicts, {"seed": args.seed}


def _add_bp_flags(p):
    p.add_argument("--tol", type=float, default=1e-9, help="convergence threshold on max|gamma|")
    p.add_argument("--max-sweeps", type=int, default=1000)
    p.add_argument("--damping", type=float, default=0.0)
    p.add_argument("--schedule", choices=("roundrobin", "random"), default="roundrobin")
    p.add_argument("--seed", type=int, default=0)


def _add_cap_flags(p):
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="maximum number of enumerated states")
    p.add_argument("--force", action="store_true", help="enumerate regardless of --cap")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="primalbp",
        description="Belief propagation as reparameterization, with exact and Bethe diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("info", help="structure summary")
    p.add_argument("file")
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("exact", help="brute-force log-partition, marginals and entropy")
    p.add_argument("file")
    _add_cap_flags(p)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("bp", help="run serial BP")
    p.add_argument("file")
    _add_bp_flags(p)
    p.set_defaults(func=cmd_bp)

    p = sub.add_parser("compare", help="BP against the exact oracle")
    p.add_argument("file")
    _add_bp_flags(p)
    _add_cap_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("check", help="numerical theorem and identity checks")
    p.add_argument("file")
    p.add_argument("--what", required=True, choices=checks.CHECKS)
    _add_bp_flags(p)
    _add_cap_flags(p)
    p.set_defaults(func=cmd_check)
    return parser


def run_command(argv, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK

    start = time.perf_counter()
    try:
        with open(args.file, "rb") as fh:
            raw = fh.read()
        model = parse_model(raw.decode("utf-8"))
        results, verdicts, seeds = args.func(model, args)
    except (OSError, UnicodeDecodeError, ModelFileError, ModelError, StateSpaceTooLarge, ValueError) as exc:
        print(f"primalbp: error: {exc}", file=stderr)
        return EXIT_USAGE
    except BpNumericalError as exc:
        print(f"primalbp: numerical failure: {exc}", file=stderr)
        return EXIT_FAIL

    passed = all(bool(v) for v in verdicts.values())
    report = {
        "command": args.command,
        "input": {"file": args.file, "sha256": hashlib.sha256(raw).hexdigest()},
        "results": results,
        "verdicts": verdicts,
        "passed": passed,
        "seeds": seeds,
        "wall_time_s": time.perf_counter() - start,
    }
    stdout.write(render_report(report))
    return EXIT_OK if passed else EXIT_FAIL


def main(argv=None) -> int:
    return run_command(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
