"""Solve, verify and compare pipelines shared by the CLI and the tests."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

from . import concrete as C
from .errors import SizeOverflow, UnsupportedReprAtConstraintLevel
from .groups import DEFAULT_ALL_CAP, GenStrategy, generators, symmetric_group, orbits
from .refinery import AbstractModel, ConcreteModel, LexLeq, compile_model
from .reprs import ReprTree, check_delayed_condition, complete_repr, encoder
from .solver import DEFAULT_NODE_LIMIT, DEFAULT_TIME_LIMIT, solve_all
from .types import DEFAULT_CAP, Ordering, TupleT, act, enumerate_values

COMPARE_FIELDS = ("method", "gens", "solutions", "nodes", "failures", "time_s",
                  "num_vars", "num_constraints", "num_aux")


@dataclass
class RunConfig:
    method: str = "new"
    gens: str = "consecutive"
    combine: str = "independently"
    reprs: dict = field(default_factory=dict)
    node_limit: Optional[int] = DEFAULT_NODE_LIMIT
    time_limit: Optional[float] = DEFAULT_TIME_LIMIT
    cap: int = DEFAULT_CAP
    all_cap: int = DEFAULT_ALL_CAP
    all_solutions: bool = False

    def label(self) -> str:
        return self.method if self.method in ("none", "doublelex") else f"{self.method}/{self.gens}"


def resolve_reprs(abstract: AbstractModel, reprs: Optional[dict]) -> dict:
    """Completed representation tree for every variable.

    A key of ``None`` applies to the only variable of the model.
    """
    reprs = dict(reprs or {})
    if None in reprs:
        if len(abstract.variables) != 1:
            raise ValueError("a bare --repr needs a model with exactly one variable; use NAME=TREE")
        reprs[abstract.variables[0][0]] = reprs.pop(None)
    unknown = set(reprs) - set(abstract.var_names())
    if unknown:
        raise ValueError(f"--repr names unknown variables: {', '.join(sorted(unknown))}")
    return {name: complete_repr(t, reprs.get(name)) for name, t in abstract.variables}


def compile_for(abstract: AbstractModel, config: RunConfig, **kw) -> ConcreteModel:
    if config.combine != "independently":
        raise ValueError("only the 'independently' combination is supported")
    reprs = resolve_reprs(abstract, config.reprs)
    return compile_model(abstract, reprs, config.method, config.gens,
                         all_cap=config.all_cap, **kw)


def run_solve(abstract: AbstractModel, config: RunConfig) -> dict:
    model = compile_for(abstract, config)
    res = solve_all(model, config.node_limit, config.time_limit, keep=config.all_solutions)
    report = {"method": config.method,
              "gens": config.gens if config.method in ("new", "old") else None,
              "reprs": {b.name: str(b.repr) for b in model.blocks}}
    report.update(res.stats.as_dict())
    if config.all_solutions:
        report["all_solutions"] = [list(s) for s in res.solutions]
    return report


def run_compare(abstract: AbstractModel, configs) -> list:
    """One row per configuration with the stable :data:`COMPARE_FIELDS` keys."""
    rows = []
    for cfg in configs:
        rep = run_solve(abstract, RunConfig(**{**cfg.__dict__, "all_solutions": False}))
        rows.append({"method": cfg.method,
                     "gens": cfg.gens if cfg.method in ("new", "old") else "-",
                     "solutions": rep["solutions"], "nodes": rep["nodes"],
                     "failures": rep["failures"], "time_s": rep["wall_time_s"],
                     "num_vars": rep["num_vars"], "num_constraints": rep["num_constraints"],
                     "num_aux": rep["num_aux_vars"]})
    return rows


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COMPARE_FIELDS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Value-level oracle
# ---------------------------------------------------------------------------

def model_value_type(abstract: AbstractModel, reprs: Optional[dict] = None):
    """The type of the tuple of all variables and its representation tree.

    A single variable stands for itself rather than a 1-tuple.
    """
    trees = resolve_reprs(abstract, reprs)
    if len(abstract.variables) == 1:
        name, t = abstract.variables[0]
        return t, trees[name]
    t = TupleT(tuple(t for _, t in abstract.variables))
    return t, ReprTree("tuple", tuple(trees[n] for n, _ in abstract.variables))


def feasible_values(abstract: AbstractModel, reprs=None, cap: int = DEFAULT_CAP) -> list:
    """Values of the variable tuple that satisfy the problem constraints."""
    t, tree = model_value_type(abstract, reprs)
    values = enumerate_values(t, cap)
    if not abstract.constraints:
        return values
    model = compile_model(abstract, resolve_reprs(abstract, reprs), structural=False)
    enc = encoder(t, tree)
    return [x for x in values
            if model.holds(model.extend_channels(enc.encode(x)), model.problem)]


def _lex_sides(c: LexLeq, a, model) -> tuple:
    lo = model.lo_of
    return (tuple(w.value(a, lo(w)) for w in c.lhs), tuple(w.value(a, lo(w)) for w in c.rhs))


def retained_by(model: ConcreteModel, images: dict, descending: bool = False) -> set:
    """Values whose image satisfies every symmetry-breaking lex constraint.

    Only meaningful for constraints that read the primary block alone (the
    delayed method); ``descending`` flips the comparison as a negative control.
    """
    out = set()
    for x, img in images.items():
        ok = True
        for c in model.symbreak:
            o = C.lex_compare(*_lex_sides(c, img, model), descending)
            if o is Ordering.GT or (c.strict and o is Ordering.EQ):
                ok = False
                break
        if ok:
            out.add(x)
    return out


def old_retained(t, images: dict, combos, descending: bool = False) -> set:
    """Values ``x`` with ``phi(x) <=lex phi(x^g)`` for every combo (the exact,
    re-sorted comparison the classical method encodes)."""
    out = set()
    for x, img in images.items():
        if all(C.lex_compare(img, images[act(x, g, t)], descending) is not Ordering.GT
               for g in combos):
            out.add(x)
    return out


def _projected(model: ConcreteModel, config: RunConfig) -> set:
    res = solve_all(model, config.node_limit, config.time_limit)
    return set(res.solutions)


def run_verify(abstract: AbstractModel, config: Optional[RunConfig] = None,
               strategies=("consecutive", "allpairs", "all"), descending: bool = False,
               solver_check: bool = True) -> dict:
    """Check symmetry breaking against the brute-force orbit oracle.

    For each generator strategy: every orbit minimum (under the
    representation order) survives the delayed method, and
    ``old <= new <= all`` as sets.  With the whole group the classical
    comparison keeps exactly one value per orbit.  The delayed-application
    condition is checked for the chosen representations.  When the
    representations are supported at constraint level the solver's
    solution sets are compared with the value-level ones as well.
    """
    config = config or RunConfig()
    t, tree = model_value_type(abstract, config.reprs)
    enc = encoder(t, tree)
    values = feasible_values(abstract, config.reprs, config.cap)
    images = {x: enc.encode(x) for x in values}
    sign = -1 if descending else 1
    group = symmetric_group(abstract.tags())
    orbs = orbits(t, group, config.cap, values=values)
    minima = [min(o, key=lambda x: tuple(sign * e for e in images[x])) for o in orbs]
    report = {"type": str(t), "repr": str(tree), "values": len(values), "orbits": len(orbs),
              "strategies": {}, "counterexamples": []}
    ok = True
    by_image = {img: x for x, img in images.items()}
    for strat in strategies:
        try:
            combos = generators(abstract.tags(), GenStrategy(strat), all_cap=config.all_cap)
        except SizeOverflow as e:
            report["strategies"][strat] = {"skipped": str(e)}
            continue
        evalm = compile_model(abstract, resolve_reprs(abstract, config.reprs), "new",
                              combos=combos, structural=False)
        new = retained_by(evalm, images, descending)
        old = old_retained(t, images, combos, descending)
        lost = [m for m in minima if m not in new]
        row = {"combos": len(combos), "new_retained": len(new), "old_retained": len(old),
               "sound": not lost, "old_subset_new": old <= new}
        for m in lost[:5]:
            report["counterexamples"].append(f"{strat}: orbit minimum {m} is excluded")
        if solver_check and not descending:
            row.update(_solver_check(abstract, config, strat, images, new, old, by_image))
        ok &= row["sound"] and row["old_subset_new"] and row.get("solver_agrees") is not False
        report["strategies"][strat] = row
    full = old_retained(t, images, group, descending)
    report["old_full_group_retained"] = len(full)
    report["complete"] = len(full) == len(orbs)
    ok &= report["complete"]
    delayed = check_delayed_condition(t, tree, group, config.cap, descending)
    report["delayed_condition"] = {"checked": delayed.checked, "violations": delayed.num_violations,
                                   "equality_holds": delayed.equality_holds}
    for x, g, lhs, rhs in delayed.violations[:5]:
        report["counterexamples"].append(
            f"delayed condition: x={x}, g={g}: phi(x^g)={list(lhs)} vs phi(x)^g={list(rhs)}")
    ok &= delayed.ok
    report["verdict"] = "PASS" if ok else "FAIL"
    return report


def _solver_check(abstract, config, strat, images, new, old, by_image) -> dict:
    cfg = RunConfig(**{**config.__dict__, "gens": strat})
    out = {}
    try:
        for method, expected in (("none", set(images)), ("new", new), ("old", old)):
            model = compile_for(abstract, RunConfig(**{**cfg.__dict__, "method": method}))
            got = {by_image.get(s) for s in _projected(model, cfg)}
            out[f"solver_{method}"] = len(got)
            if None in got or got != expected:
                out["solver_agrees"] = False
                return out
    except UnsupportedReprAtConstraintLevel:
        out["solver_agrees"] = None
        return out
    out["solver_agrees"] = True
    return out
