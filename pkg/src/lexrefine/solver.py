"""A small deterministic finite-domain solver.

Domains are bitmasks over ``lo..hi``.  Propagators run to a common fixpoint
before each branching decision.  Search branches d-way on the first unfixed
primary variable in flattening order, values ascending, so solutions come
out in ascending lex order of the primary flattening.  Once every primary
variable is fixed, the remaining (auxiliary) variables only need one
completion, found by a secondary search; each solution is reported once.

A node is one branching decision (one value tried for one variable).
Propagation at the root is not counted.
"""

from __future__ import annotations

import sys
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import ResourceLimit
from .refinery import (
    PRIMARY, AllDifferent, ConjunctionVar, IndexedEq, LexLeq, LinearEq, LinearLeq,
    Var, VectorOrdered, View,
)

DEFAULT_NODE_LIMIT = 10 ** 8
DEFAULT_TIME_LIMIT = 600.0


class Fail(Exception):
    """Raised when a domain becomes empty."""


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _single(mask: int) -> bool:
    return mask & (mask - 1) == 0


@dataclass
class SearchStats:
    solutions: int = 0
    nodes: int = 0
    failures: int = 0
    wall_time_s: float = 0.0
    num_vars: int = 0
    num_constraints: int = 0
    num_aux_vars: int = 0

    def as_dict(self) -> dict:
        return {"solutions": self.solutions, "nodes": self.nodes, "failures": self.failures,
                "wall_time_s": round(self.wall_time_s, 6), "num_vars": self.num_vars,
                "num_constraints": self.num_constraints, "num_aux_vars": self.num_aux_vars}


# ---------------------------------------------------------------------------
# Propagators
# ---------------------------------------------------------------------------

class Propagator:
    vars: tuple = ()

    def propagate(self, s: "Solver") -> None:
        raise NotImplementedError


class LexProp(Propagator):
    """``x <=lex y`` (or ``<lex``) over views.

    Let alpha be the first position whose two sides are not fixed to the same
    value.  Equality at alpha is allowed only if the smallest possible suffix
    of ``x`` can still be lex-below the largest possible suffix of ``y``;
    otherwise alpha must be strictly increasing.  When both sides at alpha
    read the same variable the pair relation is filtered value by value.
    """

    def __init__(self, s, lhs, rhs, strict):
        pairs = [(a, b) for a, b in zip(lhs, rhs) if a != b]
        self.x = [s.view(a) for a, _ in pairs]
        self.y = [s.view(b) for _, b in pairs]
        self.strict = strict
        self.vars = tuple({v for v, _ in self.x + self.y})

    def propagate(self, s):
        x, y = self.x, self.y
        n = len(x)
        dom = s.dom
        i = 0
        while True:
            while i < n:
                xv, xs = x[i]
                yv, ys = y[i]
                if _single(dom[xv]) and _single(dom[yv]) and s.vmin(xv, xs) == s.vmin(yv, ys):
                    i += 1
                else:
                    break
            if i == n:
                if self.strict:
                    raise Fail
                return
            eq_ok = not self.strict
            for j in range(i + 1, n):
                a = s.vmin(*x[j])
                b = s.vmax(*y[j])
                if a != b:
                    eq_ok = a < b
                    break
            xv, xs = x[i]
            yv, ys = y[i]
            if xv == yv:
                s.filter_pair(xv, xs, ys, eq_ok)
            else:
                hi = s.vmax(yv, ys) - (0 if eq_ok else 1)
                s.restrict(xv, xs, (1 << (hi - s.off + 1)) - 1 if hi >= s.off else 0)
                lo = s.vmin(xv, xs) + (0 if eq_ok else 1)
                s.restrict(yv, ys, ~((1 << (lo - s.off)) - 1) if lo > s.off else -1)
            dom = s.dom
            if not (_single(dom[xv]) and _single(dom[yv])
                    and s.vmin(xv, xs) == s.vmin(yv, ys)):
                return
            i += 1


class LinearProp(Propagator):
    """Bounds reasoning for ``sum c*x = rhs`` or ``<= rhs``."""

    def __init__(self, s, terms, rhs, equality):
        self.terms = [(c, v) for c, v in terms if c]
        self.rhs = rhs
        self.eq = equality
        self.vars = tuple(v for _, v in self.terms)

    def propagate(self, s):
        rhs = self.rhs
        if self.eq and getattr(rhs, "denominator", 1) != 1:
            raise Fail
        rhs = int(rhs) if self.eq else _floor(rhs)
        changed = True
        while changed:
            changed = False
            bounds = []
            smin = smax = 0
            for c, v in self.terms:
                lo, hi = s.bounds(v)
                a, b = (c * lo, c * hi) if c > 0 else (c * hi, c * lo)
                bounds.append((a, b))
                smin += a
                smax += b
            if smin > rhs or (self.eq and smax < rhs):
                raise Fail
            for (c, v), (a, b) in zip(self.terms, bounds):
                # c*x <= rhs - (smin - a), and for equality c*x >= rhs - (smax - b)
                up = rhs - (smin - a)
                down = rhs - (smax - b) if self.eq else None
                if c > 0:
                    hi_x = up // c
                    lo_x = -((-down) // c) if down is not None else None
                else:
                    lo_x = -(up // -c)
                    hi_x = (down // c) if down is not None else None
                if s.clip(v, lo_x, hi_x):
                    changed = True


def _floor(x):
    return x.numerator // x.denominator if hasattr(x, "denominator") else int(x)


class AllDiffProp(Propagator):
    def __init__(self, s, vars_):
        self.vars = tuple(vars_)

    def propagate(self, s):
        seen = {}
        for v in self.vars:
            d = s.dom[v]
            if _single(d):
                val = s.base[v] + d.bit_length() - 1
                if val in seen:
                    raise Fail
                seen[val] = v
        if not seen:
            return
        for v in self.vars:
            d = s.dom[v]
            if _single(d):
                continue
            for val in seen:
                k = val - s.base[v]
                if 0 <= k and d >> k & 1:
                    d &= ~(1 << k)
            s.set(v, d)


class ElementRowProp(Propagator):
    """``rows[p - 1] == target`` position-wise."""

    def __init__(self, s, rows, index, target):
        self.rows = [tuple(r) for r in rows]
        self.p = index
        self.t = [s.view(w) for w in target]
        self.vars = tuple({v for r in self.rows for v in r} | {index}
                          | {v for v, _ in self.t})

    def propagate(self, s):
        p = self.p
        base = s.base[p]
        keep = 0
        for k in _bits(s.dom[p]):
            row = self.rows[base + k - 1]
            if all(s.absmask(v, None) & s.absmask(*w) for v, w in zip(row, self.t)):
                keep |= 1 << k
        s.set(p, keep)
        ks = list(_bits(keep))
        if len(ks) == 1:
            row = self.rows[base + ks[0] - 1]
            for v, (tv, ts) in zip(row, self.t):
                s.restrict(v, None, s.absmask(tv, ts))
                s.restrict(tv, ts, s.absmask(v, None))
        else:
            rows = [self.rows[base + k - 1] for k in ks]
            for j, (tv, ts) in enumerate(self.t):
                union = 0
                for r in rows:
                    union |= s.absmask(r[j], None)
                s.restrict(tv, ts, union)


class AndProp(Propagator):
    def __init__(self, s, z, x, y):
        self.z, self.x, self.y = z, x, y
        self.vars = (z, x, y)

    def propagate(self, s):
        dom = s.dom
        z, x, y = self.z, self.x, self.y
        if dom[x] == 1 or dom[y] == 1:        # some input is 0
            s.set(z, dom[z] & 1)
        elif dom[x] == 2 and dom[y] == 2:
            s.set(z, dom[z] & 2)
        if dom[z] == 2:
            s.set(x, dom[x] & 2)
            s.set(y, dom[y] & 2)
        elif dom[z] == 1:
            if dom[x] == 2:
                s.set(y, dom[y] & 1)
            elif dom[y] == 2:
                s.set(x, dom[x] & 1)


# ---------------------------------------------------------------------------
# Solver
# ---------------------------------------------------------------------------

class Solver:
    """Domain store, propagation queue and search for one model."""

    def __init__(self, vars_: Sequence[Var], constraints: Sequence, primary=None,
                 domains: Optional[dict] = None):
        self.nvars = len(vars_)
        self.base = [v.lo for v in vars_]
        self.dom = [(1 << (v.hi - v.lo + 1)) - 1 for v in vars_]
        self._consts = {}
        lows = [v.lo for v in vars_] + [0]
        for c in constraints:
            for w in _views_of(c):
                if w.images:
                    lows.append(min(w.images))
                if w.var is None:
                    lows.append(w.const)
        self.off = min(lows)
        if domains:
            for v, values in domains.items():
                self.dom[v] = self._mask(v, values)
        self.props = []
        self.watch = [[] for _ in range(self.nvars)]
        for c in constraints:
            for p in self._compile(c):
                idx = len(self.props)
                self.props.append(p)
                for v in p.vars:
                    self.watch[v].append(idx)
        self.queue = deque()
        self.inq = [False] * len(self.props)
        self.primary = list(range(len(vars_))) if primary is None else list(primary)
        prim = set(self.primary)
        self.secondary = [v for v in range(self.nvars) if v not in prim]
        self.nodes = 0
        self.failures = 0

    # -- views -------------------------------------------------------------

    def _mask(self, v, values) -> int:
        m = 0
        for x in values:
            m |= 1 << (x - self.base[v])
        return m

    def view(self, w: View):
        """``(var, shifts)``: shifts[k] is the offset bit of the value seen at bit k."""
        if w.var is None:
            v = self._consts.get(w.const)
            if v is None:
                v = self.nvars
                self.nvars += 1
                self.base.append(w.const)
                self.dom.append(1)
                self.watch.append([])
                self._consts[w.const] = v
            return (v, None)
        if w.images is None:
            return (w.var, None)
        return (w.var, tuple(x - self.off for x in w.images))

    def absmask(self, v, shifts) -> int:
        d = self.dom[v]
        if shifts is None:
            return d << (self.base[v] - self.off)
        m = 0
        for k in _bits(d):
            m |= 1 << shifts[k]
        return m

    def vmin(self, v, shifts) -> int:
        d = self.dom[v]
        if shifts is None:
            return self.base[v] + (d & -d).bit_length() - 1
        return min(shifts[k] for k in _bits(d)) + self.off

    def vmax(self, v, shifts) -> int:
        d = self.dom[v]
        if shifts is None:
            return self.base[v] + d.bit_length() - 1
        return max(shifts[k] for k in _bits(d)) + self.off

    def restrict(self, v, shifts, allowed: int) -> None:
        """Keep the values whose view value lies in the offset mask ``allowed``."""
        d = self.dom[v]
        if shifts is None:
            sh = self.base[v] - self.off
            self.set(v, d & (allowed >> sh))
            return
        nd = 0
        for k in _bits(d):
            if allowed >> shifts[k] & 1:
                nd |= 1 << k
        self.set(v, nd)

    def filter_pair(self, v, xs, ys, eq_ok: bool) -> None:
        """Same variable on both sides: keep ``v`` with ``x(v) < y(v)`` (or ``<=``)."""
        nd = 0
        for k in _bits(self.dom[v]):
            a = xs[k] if xs else self.base[v] + k - self.off
            b = ys[k] if ys else self.base[v] + k - self.off
            if a < b or (eq_ok and a == b):
                nd |= 1 << k
        self.set(v, nd)

    def bounds(self, v):
        d = self.dom[v]
        return self.base[v] + (d & -d).bit_length() - 1, self.base[v] + d.bit_length() - 1

    def clip(self, v, lo, hi) -> bool:
        d = self.dom[v]
        b = self.base[v]
        nd = d
        if hi is not None:
            k = hi - b + 1
            nd = nd & ((1 << k) - 1) if k > 0 else 0
        if lo is not None and lo > b:
            nd &= ~((1 << (lo - b)) - 1)
        if nd != d:
            self.set(v, nd)
            return True
        return False

    def set(self, v, mask) -> None:
        if mask == self.dom[v]:
            return
        if not mask:
            raise Fail
        self.dom[v] = mask
        inq = self.inq
        for p in self.watch[v]:
            if not inq[p]:
                inq[p] = True
                self.queue.append(p)

    def value(self, v) -> int:
        return self.base[v] + self.dom[v].bit_length() - 1

    # -- compilation -------------------------------------------------------

    def _compile(self, c) -> list:
        if isinstance(c, LexLeq):
            return [LexProp(self, c.lhs, c.rhs, c.strict)]
        if isinstance(c, VectorOrdered):
            rows = [tuple(View(v) for v in r) for r in c.rows]
            return [LexProp(self, a, b, c.strict) for a, b in zip(rows, rows[1:])]
        if isinstance(c, LinearEq):
            return [LinearProp(self, c.terms, c.rhs, True)]
        if isinstance(c, LinearLeq):
            return [LinearProp(self, c.terms, c.rhs, False)]
        if isinstance(c, AllDifferent):
            return [AllDiffProp(self, c.vars_)]
        if isinstance(c, IndexedEq):
            return [ElementRowProp(self, c.rows, c.index, c.target)]
        if isinstance(c, ConjunctionVar):
            return [AndProp(self, c.z, c.x, c.y)]
        raise TypeError(f"no propagator for {c!r}")

    # -- propagation and search -------------------------------------------

    def fixpoint(self) -> None:
        queue, inq, props = self.queue, self.inq, self.props
        try:
            while queue:
                p = queue.popleft()
                inq[p] = False
                props[p].propagate(self)
        except Fail:
            for p in queue:
                inq[p] = False
            queue.clear()
            raise

    def propagate_all(self) -> bool:
        for i in range(len(self.props)):
            if not self.inq[i]:
                self.inq[i] = True
                self.queue.append(i)
        try:
            self.fixpoint()
        except Fail:
            return False
        return True

    def domains(self) -> dict:
        return {v: [self.base[v] + k for k in _bits(self.dom[v])] for v in range(self.nvars)}


def _views_of(c) -> list:
    if isinstance(c, LexLeq):
        return list(c.lhs) + list(c.rhs)
    if isinstance(c, IndexedEq):
        return list(c.target)
    return []


@dataclass
class SolveResult:
    solutions: list = field(default_factory=list)
    stats: SearchStats = field(default_factory=SearchStats)


class _Search:
    def __init__(self, solver: Solver, node_limit, time_limit, keep, max_solutions):
        self.s = solver
        self.node_limit = node_limit
        self.deadline = time.perf_counter() + time_limit if time_limit else None
        self.keep = keep
        self.max_solutions = max_solutions
        self.solutions = []
        self.count = 0

    def _node(self):
        s = self.s
        s.nodes += 1
        if self.node_limit is not None and s.nodes > self.node_limit:
            raise ResourceLimit(f"node limit {self.node_limit} reached")
        if self.deadline is not None and time.perf_counter() > self.deadline:
            raise ResourceLimit("time limit reached")

    def _try(self, v, k, then) -> bool:
        """Fix bit ``k`` of ``v``, propagate and continue with ``then``."""
        s = self.s
        saved = s.dom[:]
        self._node()
        try:
            s.set(v, 1 << k)
            s.fixpoint()
            return then()
        except Fail:
            s.failures += 1
            return False
        finally:
            s.dom = saved

    def run(self, i: int = 0) -> bool:
        s = self.s
        prim = s.primary
        while i < len(prim) and _single(s.dom[prim[i]]):
            i += 1
        if i == len(prim):
            if self._complete(0):
                self.count += 1
                if self.keep:
                    self.solutions.append(tuple(s.value(v) for v in prim))
                return self.max_solutions is not None and self.count >= self.max_solutions
            return False
        v = prim[i]
        for k in _bits(s.dom[v]):
            if self._try(v, k, lambda: self.run(i + 1)):
                return True
        return False

    def _complete(self, i: int) -> bool:
        s = self.s
        sec = s.secondary
        while i < len(sec) and _single(s.dom[sec[i]]):
            i += 1
        if i == len(sec):
            return True
        v = sec[i]
        for k in _bits(s.dom[v]):
            if self._try(v, k, lambda: self._complete(i + 1)):
                return True
        return False


def solve_all(model, node_limit: Optional[int] = DEFAULT_NODE_LIMIT,
              time_limit: Optional[float] = DEFAULT_TIME_LIMIT, keep: bool = True,
              max_solutions: Optional[int] = None) -> SolveResult:
    """Enumerate the solutions of a concrete model, projected onto its primary
    variables (the refined abstract variables, in declaration order)."""
    start = time.perf_counter()
    primary = [v.id for v in model.vars if v.role == PRIMARY]
    solver = Solver(model.vars, model.constraints, primary)
    search = _Search(solver, node_limit, time_limit, keep, max_solutions)
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * solver.nvars + 1000))
    try:
        if solver.propagate_all():
            search.run()
    finally:
        sys.setrecursionlimit(limit)
    stats = SearchStats(search.count, solver.nodes, solver.failures,
                        time.perf_counter() - start, model.num_vars,
                        model.num_constraints, model.num_aux_vars)
    return SolveResult(search.solutions, stats)


def propagate_constraints(vars_: Sequence[Var], constraints: Sequence,
                          domains: Optional[dict] = None) -> Optional[dict]:
    """Run propagation to fixpoint from ``domains`` (var id -> values).

    Returns the pruned domains, or None on failure.
    """
    s = Solver(vars_, constraints, domains=domains)
    if not s.propagate_all():
        return None
    return {v: vals for v, vals in s.domains().items() if v < len(vars_)}


def propagate_lexleq(lhs, rhs, vars_: Sequence[Var], domains: Optional[dict] = None,
                     strict: bool = False) -> Optional[dict]:
    return propagate_constraints(vars_, [LexLeq(tuple(lhs), tuple(rhs), strict)], domains)
