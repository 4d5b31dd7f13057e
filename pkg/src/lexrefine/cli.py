"""Command-line interface: ``lexrefine solve|verify|compare|dump|reps-check``.

Exit codes: 0 success, 1 verification failure or other error, 2 model or
usage error, 3 unsupported feature, 4 resource limit.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import LexRefineError
from .groups import DEFAULT_ALL_CAP
from .parser import parse_model
from .pipeline import COMPARE_FIELDS, RunConfig, compile_for, rows_to_csv, run_compare, run_solve, run_verify
from .solver import DEFAULT_NODE_LIMIT, DEFAULT_TIME_LIMIT
from .sweep import run_sweep
from .types import DEFAULT_CAP

GENS = ("consecutive", "allpairs", "all")


def _repr_map(items) -> dict:
    """``--repr TREE`` (sole variable) or ``--repr NAME=TREE``."""
    out = {}
    for item in items or []:
        name, sep, tree = item.partition("=")
        out[name.strip() if sep else None] = tree.strip() if sep else item.strip()
    return out


def _gens_list(text: str) -> str:
    for g in text.split(","):
        if g.strip() not in GENS:
            raise argparse.ArgumentTypeError(f"unknown generator strategy {g.strip()!r}")
    return text


def _add_common(p: argparse.ArgumentParser, method: bool = True, gens_list: bool = False) -> None:
    p.add_argument("model", type=Path, help="model file (UTF-8)")
    if method:
        p.add_argument("--method", choices=("new", "old", "none", "doublelex"), default="new")
    if gens_list:
        p.add_argument("--gens", type=_gens_list, default="consecutive", metavar="LIST",
                       help="comma-separated generator strategies")
    else:
        p.add_argument("--gens", choices=GENS, default="consecutive",
                       help="generator strategy for the lex-leader constraints")
    p.add_argument("--combine", choices=("independently",), default="independently")
    p.add_argument("--repr", action="append", metavar="[NAME=]TREE",
                   help="representation tree, e.g. set:Explicit(set:Occurrence)")
    p.add_argument("--node-limit", type=int, default=DEFAULT_NODE_LIMIT)
    p.add_argument("--time-limit", type=float, default=DEFAULT_TIME_LIMIT)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP,
                   help="largest value space enumerated by the oracle")
    p.add_argument("--all-cap", type=int, default=DEFAULT_ALL_CAP,
                   help="largest n! allowed for --gens all")


def _config(args, **over) -> RunConfig:
    cfg = RunConfig(method=getattr(args, "method", "new"), gens=args.gens, combine=args.combine,
                    reprs=_repr_map(args.repr), node_limit=args.node_limit,
                    time_limit=args.time_limit, cap=args.cap, all_cap=args.all_cap,
                    all_solutions=getattr(args, "all_solutions", False))
    for k, v in over.items():
        setattr(cfg, k, v)
    return cfg


def _load(path: Path):
    return parse_model(path.read_text(encoding="utf-8"))


def _write_json(data, path, out) -> None:
    text = json.dumps(data, indent=2, default=str)
    if path:
        Path(path).write_text(text + "\n", encoding="utf-8")
    else:
        print(text, file=out)


def cmd_solve(args, out) -> int:
    report = run_solve(_load(args.model), _config(args))
    if args.all_solutions:
        for sol in report.pop("all_solutions"):
            print(" ".join(map(str, sol)), file=out)
    stats = {k: report[k] for k in ("solutions", "nodes", "failures", "wall_time_s",
                                    "num_vars", "num_constraints", "num_aux_vars")}
    if args.stats_json:
        _write_json(stats, args.stats_json, out)
    print(json.dumps(report, default=str), file=out)
    return 0


def cmd_dump(args, out) -> int:
    model = compile_for(_load(args.model), _config(args))
    text = model.dump()
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    return 0


def cmd_verify(args, out) -> int:
    strategies = GENS if args.strategies is None else tuple(args.strategies.split(","))
    report = run_verify(_load(args.model), _config(args), strategies=strategies,
                        descending=args.descending_hook, solver_check=not args.no_solver_check)
    _write_json(report, args.json, out)
    print(f"verdict: {report['verdict']}", file=out)
    return 0 if report["verdict"] == "PASS" else 1


def cmd_compare(args, out) -> int:
    abstract = _load(args.model)
    configs = []
    for m in args.methods.split(","):
        m = m.strip()
        gens = args.gens.split(",") if m in ("new", "old") else [args.gens.split(",")[0]]
        for g in gens:
            configs.append(_config(args, method=m, gens=g.strip()))
    rows = run_compare(abstract, configs)
    text = rows_to_csv(rows) if args.format == "csv" else json.dumps(
        {"fields": list(COMPARE_FIELDS), "rows": rows}, indent=2)
    if args.output:
        Path(args.output).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    else:
        out.write(text if text.endswith("\n") else text + "\n")
    return 0


def cmd_reps_check(args, out) -> int:
    failed = 0

    def show(res):
        nonlocal failed
        if not res.passed:
            failed += 1
        if args.verbose or not res.passed:
            status = "ok  " if res.passed else "FAIL"
            print(f"{status} {res.type_text}  [{res.repr_text}]  checked={res.report.checked} "
                  f"violations={res.report.num_violations} "
                  f"equality={res.report.equality_holds}", file=out)

    results = run_sweep(show)
    total = sum(r.seconds for r in results)
    print(f"{len(results) - failed}/{len(results)} instances pass "
          f"({sum(r.report.checked for r in results)} pairs, {total:.1f}s)", file=out)
    return 0 if failed == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lexrefine", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="compile and enumerate solutions")
    _add_common(p)
    p.add_argument("--all-solutions", action="store_true",
                   help="print every solution as a line of flattened integers")
    p.add_argument("--stats-json", metavar="PATH", help="write search statistics as JSON")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("dump", help="print the compiled concrete model")
    _add_common(p)
    p.add_argument("-o", "--output", metavar="PATH")
    p.set_defaults(func=cmd_dump)

    p = sub.add_parser("verify", help="check symmetry breaking against the orbit oracle")
    _add_common(p, method=False)
    p.add_argument("--strategies", metavar="LIST",
                   help="comma-separated generator strategies (default: all three)")
    p.add_argument("--no-solver-check", action="store_true",
                   help="skip comparing solver output with the value-level sets")
    p.add_argument("--descending-hook", action="store_true",
                   help="compare in descending order (negative control, expected to FAIL)")
    p.add_argument("--json", metavar="PATH", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("compare", help="solve under several methods and tabulate")
    _add_common(p, method=False, gens_list=True)
    p.add_argument("--methods", default="old,new,none")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("-o", "--output", metavar="PATH")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("reps-check", help="delayed-application sweep over every representation")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_reps_check)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except LexRefineError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
