import math
from fractions import Fraction

import pytest

from conftest import T, perm
from lexrefine import concrete as C
from lexrefine.errors import (
    DuplicateName, NotTwoDimensional, UnknownTag, UnsupportedReprAtConstraintLevel,
)
from lexrefine.parser import parse_model
from lexrefine.refinery import (
    SYMBREAK, AbstractModel, AllDifferent, ConcreteModel, IndexedEq, LexLeq, LinearEq,
    VectorOrdered, View, bibd_model, bibd_params, compile_model, gen_double_lex, new_rhs,
    refine_variable,
)
from lexrefine.reprs import encoder
from lexrefine.solver import solve_all
from lexrefine.sweep import sweep_instances
from lexrefine.types import BoolT, MatrixT, SetT, Size, enumerate_values

SET_OF_SET = """
letting T be new type of size 4
find x : set (size 3) of set (size 2) of T
"""


def _kinds(cons):
    return [type(c).__name__ for c in cons]


def test_nested_set_structural_constraints():
    m = compile_model(parse_model(SET_OF_SET))
    assert m.num_vars == 12
    assert all((v.lo, v.hi) == (0, 1) for v in m.vars)
    sums = [c for c in m.structural if isinstance(c, LinearEq)]
    assert [(len(c.terms), c.rhs) for c in sums] == [(4, 2)] * 3
    [order] = [c for c in m.structural if isinstance(c, VectorOrdered)]
    assert order.strict and [len(r) for r in order.rows] == [4, 4, 4]
    assert m.symbreak == [] and m.num_aux_vars == 0


def test_new_method_has_one_lex_per_combo_and_no_auxiliaries():
    m = compile_model(parse_model(SET_OF_SET), method="new", gens="consecutive")
    assert m.num_aux_vars == 0 and m.num_vars == 12
    assert _kinds(m.symbreak) == ["LexLeq"] * 3
    rhs = new_rhs(m, perm(4, (1, 2)))
    # columns 1 and 2 swap inside every row
    assert [w.var for w in rhs] == [1, 0, 2, 3, 5, 4, 6, 7, 9, 8, 10, 11]
    assert all(w.images is None for w in rhs)
    lex = [c for c in m.symbreak if [w.var for w in c.rhs] == [w.var for w in rhs]]
    assert len(lex) == 1 and [w.var for w in lex[0].lhs] == list(range(12))


def test_old_method_counts_per_combo():
    m = compile_model(parse_model(SET_OF_SET), method="old", combos=[perm(4, (1, 2))])
    aux = [v for v in m.vars if v.role == SYMBREAK]
    perms = [v for v in aux if (v.lo, v.hi) == (1, 3)]
    bools = [v for v in aux if (v.lo, v.hi) == (0, 1)]
    assert len(perms) == 3 and len(bools) == 12
    kinds = _kinds(m.symbreak)
    assert kinds.count("LinearEq") == 3 and kinds.count("VectorOrdered") == 1
    assert kinds.count("AllDifferent") == 1 and kinds.count("IndexedEq") == 3
    assert kinds.count("LexLeq") == 1
    full = compile_model(parse_model(SET_OF_SET), method="old", gens="consecutive")
    assert full.num_aux_vars == 3 * 15


def test_old_and_new_agree_when_every_layer_is_exact():
    for form in ("low",):
        a = compile_model(bibd_model(4, 4, 3, form), method="old")
        b = compile_model(bibd_model(4, 4, 3, form), method="new")
        assert a.dump() == b.dump()
    f = parse_model("letting T be new type of size 3\nfind f : function (total) T --> T")
    assert compile_model(f, method="old").dump() == compile_model(f, method="new").dump()


def test_values_are_mapped_for_unnamed_codomains():
    f = parse_model("letting T be new type of size 3\nfind f : function (total) T --> T")
    m = compile_model(f)
    rhs = new_rhs(m, perm(3, (1, 2)))
    # f^g(1) = g(f(2)), so position 0 reads variable 1 through the value map
    assert rhs[0] == View(1, (2, 1, 3))
    assert rhs[2] == View(2, (2, 1, 3))


def test_double_lex_counts_and_errors():
    m = compile_model(bibd_model(4, 6, 2, "matrix"), method="doublelex")
    rows = [c for c in m.symbreak if len(c.lhs) == 6]
    cols = [c for c in m.symbreak if len(c.lhs) == 4]
    assert len(rows) == 3 and len(cols) == 5 and len(m.symbreak) == 8
    with pytest.raises(NotTwoDimensional):
        compile_model(parse_model(SET_OF_SET), method="doublelex")
    cm = ConcreteModel()
    b = refine_variable(cm, "v", MatrixT((T(3),), BoolT()))
    with pytest.raises(NotTwoDimensional):
        gen_double_lex(cm, b)


def test_bibd_parameters_and_models():
    assert bibd_params(4, 4, 3) == {"v": 4, "b": 4, "k": 3, "r": 3, "lambda": 2}
    assert bibd_params(7, 7, 3)["lambda"] == 1
    p = bibd_params(8, 4, 3)
    assert p["r"] == Fraction(3, 2)
    high = bibd_model(4, 4, 3, "high")
    assert high.tags() == [("Obj", 4)]
    assert str(high.variables[0][1]) == "set (size 4) of set (size 3) of Obj"
    low = bibd_model(4, 4, 3, "low")
    assert low.tags() == [("Obj", 4), ("Blocks", 4)]
    with pytest.raises(ValueError):
        bibd_model(3, 4, 4, "low")
    with pytest.raises(ValueError):
        bibd_model(4, 4, 3, "medium")


@pytest.mark.parametrize("v,b,k,count", [(4, 4, 3, 24), (4, 6, 2, 720), (4, 3, 2, 0)])
def test_bibd_low_and_matrix_nosym_count_agree(v, b, k, count):
    low = solve_all(compile_model(bibd_model(v, b, k, "low")), keep=False)
    mat = solve_all(compile_model(bibd_model(v, b, k, "matrix")), keep=False)
    assert low.stats.solutions == mat.stats.solutions == count


def test_abstract_model_errors():
    m = AbstractModel()
    t = m.add_unnamed("T", 3)
    with pytest.raises(DuplicateName):
        m.add_unnamed("T", 3)
    m.add_variable("x", SetT(Size(1), t))
    with pytest.raises(DuplicateName):
        m.add_variable("x", SetT(Size(1), t))
    with pytest.raises(UnknownTag):
        m.add_variable("y", SetT(Size(1), T(3, "U")))


def test_lex_constraint_sides_must_match():
    with pytest.raises(ValueError):
        LexLeq((View(0),), (View(0), View(1)))


def test_value_level_representations_are_rejected_at_constraint_level():
    m = parse_model("letting T be new type of size 3\nfind p : partition from T")
    with pytest.raises(UnsupportedReprAtConstraintLevel):
        compile_model(m)
    assert compile_model(m, structural=False).structural == []


# ---------------------------------------------------------------------------
# Structural constraints characterise exactly the image of phi
# ---------------------------------------------------------------------------

def _constraint_level(t, r):
    try:
        cm = ConcreteModel()
        refine_variable(cm, "x", t, r)
        return cm
    except UnsupportedReprAtConstraintLevel:
        return None


STRUCT_CASES = []
for _t, _r, _ in sweep_instances():
    _enc = encoder(_t, _r)
    _raw = math.prod(s.hi - s.lo + 1 for s in C.scalars(_enc.ctype))
    if _raw <= 5000 and _constraint_level(_t, _r) is not None:
        STRUCT_CASES.append((_t, _r))


@pytest.mark.parametrize("t,r", STRUCT_CASES, ids=lambda x: str(x))
def test_structural_constraints_match_phi_image(t, r):
    cm = _constraint_level(t, r)
    enc = encoder(t, r)
    images = {enc.encode(v) for v in enumerate_values(t)}
    sat = {c for c in C.all_values(enc.ctype) if cm.holds(list(c))}
    assert sat == images


def test_structural_sample_is_broad():
    assert len(STRUCT_CASES) >= 60
    names = {str(r).split("(")[0] for _, r in STRUCT_CASES}
    assert {"set:Occurrence", "set:Explicit", "mset:Occurrence",
            "mset:ExplicitWithRepetition", "function:AsMatrix",
            "relation:AsMatrix"} <= names


def test_dump_is_stable():
    a = compile_model(parse_model(SET_OF_SET), method="old").dump()
    b = compile_model(parse_model(SET_OF_SET), method="old").dump()
    assert a == b
    assert a.splitlines()[0] == "var x0 x[1][1] bool primary"
    assert sum(line.startswith("symbreak lex") for line in a.splitlines()) == 3


def test_old_auxiliary_constraints_use_fresh_permutation_vars():
    m = compile_model(parse_model(SET_OF_SET), method="old", combos=[perm(4, (1, 2))])
    [ad] = [c for c in m.symbreak if isinstance(c, AllDifferent)]
    idx = [c for c in m.symbreak if isinstance(c, IndexedEq)]
    assert sorted(c.index for c in idx) == sorted(ad.vars_)
    assert all(m.vars[v].role == SYMBREAK for v in ad.vars_)
