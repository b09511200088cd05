"""``mec`` command-line interface.

Exit codes: 0 when everything checked holds, 1 for input or usage errors,
2 when a bound that must hold fails.

Instance files are JSON documents::

    {"distributions": [[0.6, 0.4], ["1/2", "1/2"]],
     "numeric_mode": "float64",      # optional; "exact" for rationals
     "renormalize": false}           # optional

Any ``"a/b"`` string switches the whole instance to exact mode.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .core import DEFAULT_TOL, Instance, Tolerances, entropy, make_distribution, make_instance
from .errors import AssertionFailure, InputError, MECError
from .greedy import LOG2_E, bound_report
from .majorization import meet
from .majorizing_set import gprime, uniform, uniform_gap, uniform_greedy_state
from .oracle import DEFAULT_NODE_CAP, compare_greedy_to_oracle, exact_mec
from .split import split
from .verify import run_verification

EXIT_OK, EXIT_INPUT, EXIT_BOUND = 0, 1, 2
MAX_Z = 10**6


class InstanceFileError(InputError):
    def __init__(self, path, location: str, message: str):
        self.path = str(path)
        self.location = location
        super().__init__(f"{path}: {location}: {message}")


def load_instance(path, mode: Optional[str] = None, tol: Tolerances = DEFAULT_TOL) -> Instance:
    """Parse an instance file. ``mode`` overrides the file's numeric mode."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InstanceFileError(path, "file", exc.strerror or str(exc)) from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFileError(path, f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    return instance_from_doc(doc, mode, tol, path)


def instance_from_doc(doc, mode=None, tol: Tolerances = DEFAULT_TOL, path="<input>") -> Instance:
    if not isinstance(doc, dict) or "distributions" not in doc:
        raise InstanceFileError(path, "document", 'expected an object with a "distributions" array')
    rows = doc["distributions"]
    if not isinstance(rows, list) or not rows:
        raise InstanceFileError(path, "distributions", "must be a non-empty array")
    for i, row in enumerate(rows):
        if not isinstance(row, list) or not row:
            raise InstanceFileError(path, f"distributions[{i}]", "must be a non-empty array")
        for k, v in enumerate(row):
            if isinstance(v, bool) or not isinstance(v, (int, float, str)):
                raise InstanceFileError(path, f"distributions[{i}][{k}]", f"not a number: {v!r}")
            if isinstance(v, str):
                try:
                    Fraction(v.strip())
                except (ValueError, ZeroDivisionError):
                    raise InstanceFileError(
                        path, f"distributions[{i}][{k}]", f"not a number: {v!r}"
                    ) from None
    file_mode = doc.get("numeric_mode")
    if file_mode is not None and file_mode not in ("float64", "exact"):
        raise InstanceFileError(path, "numeric_mode", f"unknown mode {file_mode!r}")
    if mode is None:
        mode = file_mode
    renormalize = bool(doc.get("renormalize", False))
    for i, row in enumerate(rows):
        try:
            make_distribution(row, mode, renormalize, tol)
        except InputError as exc:
            raise InstanceFileError(path, f"distributions[{i}]", str(exc)) from None
    return make_instance(rows, mode, renormalize, tol)


def _num(x):
    """JSON form of a mass: floats as-is, Fractions as ``"a/b"`` strings."""
    if isinstance(x, Fraction):
        return str(x)
    return float(x)


def _fmt(x) -> str:
    return f"{float(x):.9f}"


def _emit(args, doc: dict, lines: list[str]) -> None:
    if args.json:
        print(json.dumps(doc, indent=2))
    else:
        print("\n".join(lines))


def _instance_doc(S: Instance) -> dict:
    return {
        "m": S.m,
        "n": S.n,
        "numeric_mode": S.mode.value,
        "distributions": [[_num(x) for x in p] for p in S],
    }


def _tolerances(args) -> Tolerances:
    if not args.tol >= 0:
        raise InputError(f"tolerance must be nonnegative, got {args.tol}")
    return Tolerances(mass=args.tol, compare=args.tol)


def _mode(args) -> Optional[str]:
    return "exact" if args.exact else None


def _single_distribution(args):
    if args.probs is not None:
        values = [v.strip() for v in args.probs.split(",") if v.strip()]
        return make_distribution(values, _mode(args), tol=_tolerances(args))
    if args.file is not None:
        return meet(load_instance(args.file, _mode(args), _tolerances(args))).meet
    raise InputError("give an instance file or --probs")


def cmd_couple(args) -> int:
    tol = _tolerances(args)
    S = load_instance(args.file, _mode(args), tol)
    rep = bound_report(S, args.z, tol, strict=False)
    cells = rep.trace.coupling.cells
    doc = {
        "command": "couple",
        "instance": _instance_doc(S),
        "cells": [{"indices": list(idx), "mass": _num(u)} for idx, u in cells],
        "greedy_entropy": rep.greedy_entropy,
        "meet": [_num(x) for x in rep.meet.meet],
        "meet_entropy": rep.meet_entropy,
        "gap": rep.gap,
        "log2_e": LOG2_E,
        "certificate": [
            {"step": r.step, "mass": _num(r.mass), "bound": _num(r.bound), "argmax_j": r.argmax_j}
            for r in rep.certificate.rows
        ],
        "split_bounds": {str(z): b for z, b in rep.split_bounds.items()},
        "checks": rep.checks,
        "passed": rep.passed,
    }
    lines = [f"instance: m={S.m} n={S.n} mode={S.mode.value}", "cells (0-based state indices):"]
    lines += [f"  {i + 1:>4}  {idx}  {_fmt(u)}" for i, (idx, u) in enumerate(cells)]
    lines += [
        f"H(greedy) = {_fmt(rep.greedy_entropy)}",
        f"H(meet)   = {_fmt(rep.meet_entropy)}",
        f"gap       = {_fmt(rep.gap)}  (limit log2(e) = {_fmt(LOG2_E)})",
        "lower-bound certificate:",
        "  step  mass         bound        j",
    ]
    lines += [
        f"  {r.step:>4}  {_fmt(r.mass)}  {_fmt(r.bound)}  {r.argmax_j}" for r in rep.certificate.rows
    ]
    lines += [f"split bound z={z}: {_fmt(b)}" for z, b in rep.split_bounds.items()]
    lines += ["checks:"] + [f"  {k:<24} {'PASS' if ok else 'FAIL'}" for k, ok in rep.checks.items()]
    _emit(args, doc, lines)
    return EXIT_OK if rep.passed else EXIT_BOUND


def cmd_meet(args) -> int:
    S = load_instance(args.file, _mode(args), _tolerances(args))
    mr = meet(S)
    doc = {
        "command": "meet",
        "instance": _instance_doc(S),
        "meet": [_num(x) for x in mr.meet],
        "meet_entropy": entropy(mr.meet),
        "per_index_argmin": list(mr.per_index_argmin),
    }
    lines = [
        "meet: " + " ".join(_fmt(x) for x in mr.meet),
        f"H(meet) = {_fmt(entropy(mr.meet))}",
        "argmin marginal per prefix: " + " ".join(map(str, mr.per_index_argmin)),
    ]
    _emit(args, doc, lines)
    return EXIT_OK


def cmd_gprime(args) -> int:
    if args.uniform is not None:
        p = uniform(args.uniform, "exact" if args.exact else "float64")
    else:
        p = _single_distribution(args)
    gp = gprime(p, args.tail, args.max_states)
    doc = {
        "command": "gprime",
        "base": [_num(x) for x in p],
        "states": [_num(x) for x in gp.states],
        "argmax_j": list(gp.argmax_j),
        "residual": _num(gp.residual),
        "entropy_materialized": entropy(gp.states),
        "entropy_tail_allowance": gp.entropy_tail_allowance,
    }
    lines = [f"base: {' '.join(_fmt(x) for x in p)}", "  i  state        j"]
    lines += [f"  {i + 1:>3}  {_fmt(g)}  {j}" for i, (g, j) in enumerate(zip(gp.states, gp.argmax_j))]
    lines.append(f"residual: {float(gp.residual):.3e}")
    lines.append(
        f"entropy: {entropy(gp.states):.9f} (+ tail allowance {gp.entropy_tail_allowance:.3e})"
    )
    _emit(args, doc, lines)
    return EXIT_OK


def cmd_split(args) -> int:
    p = _single_distribution(args)
    sp = split(p, args.gamma, args.tail)
    doc = {
        "command": "split",
        "base": [_num(x) for x in p],
        "gamma": sp.gamma,
        "entries": [
            {"mass": e.mass, "source": e.source, "geom_index": e.geom_index} for e in sp.entries
        ],
        "tail_bound": sp.tail_bound,
    }
    lines = ["  mass         source  k"]
    lines += [f"  {_fmt(e.mass)}  {e.source:>6}  {e.geom_index}" for e in sp.entries]
    lines.append(f"tail bound: {sp.tail_bound:.3e}")
    _emit(args, doc, lines)
    return EXIT_OK


def cmd_oracle(args) -> int:
    tol = _tolerances(args)
    S = load_instance(args.file, _mode(args), tol)
    res = exact_mec(S, args.node_cap, args.time_limit)
    doc = {
        "command": "oracle",
        "instance": _instance_doc(S),
        "best_entropy": res.best_entropy,
        "best_coupling": [
            {"indices": list(idx), "mass": _num(u)} for idx, u in res.best_coupling.cells
        ],
        "nodes_explored": res.nodes_explored,
        "exhaustive": res.exhaustive,
        "certified_optimal": res.certified_optimal,
    }
    lines = [
        f"best entropy: {_fmt(res.best_entropy)}"
        + ("" if res.certified_optimal else "  (best found, not certified optimal)"),
        f"nodes explored: {res.nodes_explored}",
    ]
    lines += [f"  {idx}  {_fmt(u)}" for idx, u in res.best_coupling.cells]
    code = EXIT_OK
    if res.exhaustive:
        try:
            cmp = compare_greedy_to_oracle(S, res, tol)
            doc["greedy_entropy"] = cmp.greedy_entropy
            doc["greedy_minus_optimum"] = cmp.difference
            lines.append(f"greedy - best: {_fmt(cmp.difference)}")
        except AssertionFailure as exc:
            doc["error"] = str(exc)
            lines.append(f"FAIL: {exc}")
            code = EXIT_BOUND
    _emit(args, doc, lines)
    return code


def cmd_uniform(args) -> int:
    if args.n_min < 2 or args.n_max < args.n_min:
        raise InputError("need 2 <= --n-min <= --n-max")
    rows = []
    for n in range(args.n_min, args.n_max + 1):
        rows.append(
            {
                "n": n,
                "gap": uniform_gap(n),
                "states": [uniform_greedy_state(n, i) for i in range(1, args.states + 1)],
            }
        )
    doc = {"command": "uniform", "log2_e": LOG2_E, "rows": rows}
    lines = [f"  {'n':>3}  gap"] + [f"  {r['n']:>3}  {_fmt(r['gap'])}" for r in rows]
    lines.append(f"limit log2(e) = {_fmt(LOG2_E)}")
    _emit(args, doc, lines)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.trials < 0:
        raise InputError("--trials must be nonnegative")
    mode = "exact" if args.exact else args.mode
    summary = run_verification(
        args.trials, args.m, args.n, args.seed, args.z, mode, args.tail, _tolerances(args), args.workers
    )
    first = summary.first_failure
    doc = {
        "command": "verify",
        "trials": summary.trials,
        "seed": args.seed,
        "m": list(args.m) if isinstance(args.m, tuple) else args.m,
        "n": list(args.n) if isinstance(args.n, tuple) else args.n,
        "z": list(args.z),
        "mode": mode,
        "max_gap": summary.max_gap,
        "max_gap_trial": summary.max_gap_trial,
        "oracle_trials": summary.oracle_trials,
        "max_oracle_difference": summary.max_oracle_difference,
        "min_certificate_slack": _finite(summary.min_certificate_slack),
        "min_entropy_slack": _finite(summary.min_entropy_slack),
        "failures": len(summary.failures),
        "passed": summary.passed,
    }
    lines = [
        f"trials: {summary.trials}",
        f"max gap H(greedy) - H(meet): {_fmt(summary.max_gap)} (limit {_fmt(LOG2_E)})",
    ]
    if summary.oracle_trials:
        lines.append(
            f"oracle trials: {summary.oracle_trials}, max greedy - optimum: "
            f"{_fmt(summary.max_oracle_difference)}"
        )
    lines.append(f"failures: {len(summary.failures)}")
    if first is not None:
        doc["counterexample"] = {
            "trial": first.trial,
            "distributions": first.instance,
            "failed_checks": [k for k, ok in first.checks.items() if not ok],
            "errors": list(first.errors),
        }
        lines.append("counterexample: " + json.dumps(doc["counterexample"]))
    lines.append("PASS" if summary.passed else "FAIL")
    _emit(args, doc, lines)
    return EXIT_OK if summary.passed else EXIT_BOUND


def _finite(x: float):
    return x if math.isfinite(x) else None


def _z_list(text: str) -> tuple[int, ...]:
    try:
        zs = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad z list {text!r}") from None
    if not zs or any(not 2 <= z <= MAX_Z for z in zs):
        raise argparse.ArgumentTypeError(f"z values must lie in [2, {MAX_Z}]")
    return zs


def _int_or_range(text: str):
    try:
        if "-" in text:
            lo, hi = (int(v) for v in text.split("-", 1))
            if not 1 <= lo <= hi:
                raise ValueError
            return (lo, hi)
        v = int(text)
        if v < 1:
            raise ValueError
        return v
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive int or range lo-hi, got {text!r}") from None


def _env_float(name: str, default: float) -> float:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        return default


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=_env_float("MEC_TOL", 1e-9),
                        help="mass and comparison tolerance (env MEC_TOL)")
    common.add_argument("--tail", type=float, default=_env_float("MEC_TAIL", 1e-12),
                        help="truncation mass for infinite sequences (env MEC_TAIL)")
    common.add_argument("--exact", action="store_true", help="use exact rational arithmetic")
    common.add_argument("--json", action="store_true", help="print one JSON document")

    parser = argparse.ArgumentParser(prog="mec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("couple", parents=[common], help="greedy coupling with bound certificates")
    p.add_argument("file")
    p.add_argument("--z", type=_z_list, default=(2, 3, 5, 10), help="comma-separated z values")
    p.set_defaults(func=cmd_couple)

    p = sub.add_parser("meet", parents=[common], help="majorization meet of an instance")
    p.add_argument("file")
    p.set_defaults(func=cmd_meet)

    p = sub.add_parser("gprime", parents=[common], help="G' recursion for a distribution")
    p.add_argument("file", nargs="?")
    p.add_argument("--probs", help="comma-separated masses instead of a file")
    p.add_argument("--uniform", type=int, help="use the uniform distribution on N states")
    p.add_argument("--max-states", type=int)
    p.set_defaults(func=cmd_gprime)

    p = sub.add_parser("split", parents=[common], help="geometric split of the meet")
    p.add_argument("file", nargs="?")
    p.add_argument("--probs", help="comma-separated masses instead of a file")
    p.add_argument("--gamma", type=float, required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("oracle", parents=[common], help="exact minimum entropy coupling (small)")
    p.add_argument("file")
    p.add_argument("--node-cap", type=int, default=DEFAULT_NODE_CAP)
    p.add_argument("--time-limit", type=float)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("uniform", parents=[common], help="closed forms for the uniform family")
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--states", type=int, default=0, help="also list this many greedy states")
    p.set_defaults(func=cmd_uniform)

    p = sub.add_parser("verify", parents=[common], help="random-instance verification harness")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--m", type=_int_or_range, default=2)
    p.add_argument("--n", type=_int_or_range, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--z", type=_z_list, default=(2, 3, 5, 10))
    p.add_argument("--mode", choices=["float64", "exact"], default="float64")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except AssertionFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BOUND
    except (InputError, MECError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
