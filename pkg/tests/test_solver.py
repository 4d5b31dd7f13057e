import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from lexrefine.errors import ResourceLimit
from lexrefine.parser import parse_model
from lexrefine.pipeline import RunConfig, compile_for
from lexrefine.refinery import (
    AllDifferent, ConcreteModel, ConjunctionVar, IndexedEq, LexLeq, LinearEq, LinearLeq,
    Var, VectorOrdered, View, bibd_model, compile_model,
)
from lexrefine.solver import propagate_constraints, propagate_lexleq, solve_all
from lexrefine.types import enumerate_values


def _brute(model):
    out = []
    for a in itertools.product(*(range(v.lo, v.hi + 1) for v in model.vars)):
        if model.holds(list(a)):
            out.append(a)
    return out


# ---------------------------------------------------------------------------
# Lex propagator
# ---------------------------------------------------------------------------

def _supports(lhs, rhs, doms, strict):
    sup = [set() for _ in doms]
    for a in itertools.product(*doms):
        x = tuple(w.value(a, 0) for w in lhs)
        y = tuple(w.value(a, 0) for w in rhs)
        if x < y or (x == y and not strict):
            for i, v in enumerate(a):
                sup[i].add(v)
    return sup


@pytest.mark.parametrize("n", [2, 3])
def test_lex_propagation_is_exact_on_distinct_boolean_vectors(n):
    vars_ = [Var(i, f"x{i}", 0, 1) for i in range(2 * n)]
    lhs = tuple(View(i) for i in range(n))
    rhs = tuple(View(n + i) for i in range(n))
    for strict in (False, True):
        for doms in itertools.product([(0,), (1,), (0, 1)], repeat=2 * n):
            got = propagate_lexleq(lhs, rhs, vars_, dict(enumerate(doms)), strict)
            sup = _supports(lhs, rhs, doms, strict)
            if not any(sup):
                assert got is None
            else:
                assert [set(got[i]) for i in range(2 * n)] == sup


def test_lex_propagation_through_value_maps():
    vars_ = [Var(i, f"x{i}", 0, 2) for i in range(2)]
    rev = (2, 1, 0)
    lhs, rhs = (View(0),), (View(1, rev),)          # x0 <= 2 - x1
    got = propagate_lexleq(lhs, rhs, vars_, {0: [2], 1: [0, 1, 2]})
    assert got == {0: [2], 1: [0]}
    assert propagate_lexleq(lhs, rhs, vars_, {0: [2], 1: [1, 2]}) is None
    # constants on either side
    got = propagate_lexleq((View(0),), (View.constant(1),), vars_)
    assert got[0] == [0, 1]


def test_lex_detects_violation_on_fixed_vectors():
    vars_ = [Var(i, f"x{i}", 0, 2) for i in range(3)]
    for a in itertools.product(range(3), repeat=3):
        doms = {i: [a[i]] for i in range(3)}
        for lhs, rhs in [((0, 1), (1, 2)), ((0, 0), (1, 2)), ((0, 1), (1, 0))]:
            ok = (a[lhs[0]], a[lhs[1]]) <= (a[rhs[0]], a[rhs[1]])
            got = propagate_lexleq(tuple(map(View, lhs)), tuple(map(View, rhs)), vars_, doms)
            assert (got is not None) == ok


# ---------------------------------------------------------------------------
# Random models against brute force
# ---------------------------------------------------------------------------

@st.composite
def small_models(draw):
    m = ConcreteModel()
    n = draw(st.integers(2, 5))
    for i in range(n):
        lo = draw(st.integers(0, 1))
        m.new_var(f"v{i}", lo, lo + draw(st.integers(0, 2)))
    ids = st.integers(0, n - 1)
    for _ in range(draw(st.integers(1, 4))):
        kind = draw(st.sampled_from(["lex", "eq", "leq", "alldiff", "ordered", "and", "element"]))
        if kind == "lex":
            k = draw(st.integers(1, 3))
            side = lambda: tuple(View(draw(ids)) for _ in range(k))
            m.problem.append(LexLeq(side(), side(), draw(st.booleans())))
        elif kind in ("eq", "leq"):
            terms = tuple((draw(st.integers(-2, 2)), draw(ids)) for _ in range(draw(st.integers(1, 3))))
            cls = LinearEq if kind == "eq" else LinearLeq
            m.problem.append(cls(terms, draw(st.integers(-2, 5))))
        elif kind == "alldiff":
            m.problem.append(AllDifferent(tuple(draw(st.lists(ids, min_size=2, max_size=3, unique=True)))))
        elif kind == "ordered":
            rows = (tuple(draw(ids) for _ in range(2)), tuple(draw(ids) for _ in range(2)))
            m.problem.append(VectorOrdered(rows, draw(st.booleans())))
        elif kind == "and":
            z = m.new_var("z", 0, 1)
            x = m.new_var("bx", 0, 1)
            y = m.new_var("by", 0, 1)
            m.problem.append(ConjunctionVar(z, x, y))
        else:
            rows = tuple(tuple(draw(ids) for _ in range(2)) for _ in range(2))
            p = m.new_var("p", 1, 2)
            target = tuple(View(draw(ids)) for _ in range(2))
            m.problem.append(IndexedEq(rows, p, target))
    return m


@settings(max_examples=300, deadline=None)
@given(small_models())
def test_solver_matches_brute_force_on_random_models(m):
    expected = _brute(m)
    res = solve_all(m)                  # every var is primary here
    assert sorted(res.solutions) == expected
    assert res.stats.solutions == len(expected)


@settings(max_examples=300, deadline=None)
@given(small_models())
def test_propagation_never_removes_supported_values(m):
    got = propagate_constraints(m.vars, m.constraints)
    sols = _brute(m)
    if got is None:
        assert sols == []
        return
    for a in sols:
        for i, v in enumerate(a):
            assert v in got[i]


def test_fractional_rhs_is_infeasible():
    m = ConcreteModel()
    a, b = m.new_var("a", 0, 3), m.new_var("b", 0, 3)
    m.problem.append(LinearEq(((1, a), (1, b)), Fraction(3, 2)))
    assert solve_all(m).stats.solutions == 0


# ---------------------------------------------------------------------------
# Oracle equivalence with the enumerator
# ---------------------------------------------------------------------------

TINY = [
    ("set (size 3) of set (size 2) of T", 4, None),
    ("function (total) T --> T", 3, None),
    ("function T --> T", 3, None),
    ("relation of (T * T)", 2, None),
    ("mset (size 3) of T", 3, None),
    ("mset (size 3) of T", 3, "mset:ExplicitWithRepetition"),
    ("set (size 2) of mset (size 2) of T", 3, None),
    ("set (size 2) of function (total) T --> bool", 3, None),
    ("matrix indexed by [T, T] of bool", 2, None),
    ("set (size 2) of set (size 2) of T", 4, "set:Explicit(set:Explicit)"),
]


@pytest.mark.parametrize("text,n,r", TINY)
def test_no_symmetry_solutions_are_exactly_the_values(text, n, r):
    abstract = parse_model(f"letting T be new type of size {n}\nfind x : {text}")
    t = abstract.variables[0][1]
    cfg = RunConfig(method="none", reprs={} if r is None else {"x": r})
    model = compile_for(abstract, cfg)
    enc = model.blocks[0].enc
    res = solve_all(model)
    values = enumerate_values(t)
    assert res.stats.solutions == len(values)
    assert {enc.decode(s) for s in res.solutions} == set(values)


# ---------------------------------------------------------------------------
# Search statistics
# ---------------------------------------------------------------------------

SET_OF_SET = "letting T be new type of size 4\nfind x : set (size 3) of set (size 2) of T"


# Regression lock: the search is deterministic, so these counts only change
# when propagation strength or branching changes.
@pytest.mark.parametrize("method,stats", [
    ("none", (20, 66, 14)),
    ("new", (4, 14, 4)),
    ("old", (3, 194, 103)),
])
def test_node_counts_are_locked(method, stats):
    m = compile_model(parse_model(SET_OF_SET), method=method, gens="consecutive")
    s = solve_all(m, keep=False).stats
    assert (s.solutions, s.nodes, s.failures) == stats


def test_bibd_node_counts_are_locked():
    s = solve_all(compile_model(bibd_model(4, 6, 2, "low")), keep=False).stats
    assert (s.solutions, s.nodes, s.failures) == (720, 1482, 22)
    s = solve_all(compile_model(bibd_model(4, 6, 2, "matrix"), method="doublelex")).stats
    assert (s.solutions, s.nodes, s.failures) == (1, 18, 9)


def test_limits_raise():
    m = compile_model(parse_model(SET_OF_SET))
    with pytest.raises(ResourceLimit):
        solve_all(m, node_limit=10)
    assert solve_all(m, max_solutions=2).stats.solutions == 2


def test_stats_schema():
    d = solve_all(compile_model(parse_model(SET_OF_SET))).stats.as_dict()
    assert set(d) == {"solutions", "nodes", "failures", "wall_time_s", "num_vars",
                      "num_constraints", "num_aux_vars"}
