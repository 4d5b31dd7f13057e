import math

import pytest
from hypothesis import given, settings, strategies as st

from conftest import T, perm, u, us
from lexrefine import concrete as C
from lexrefine.errors import InvalidRepr, ModelSyntaxError, NotInImage
from lexrefine.groups import symmetric_group
from lexrefine.reprs import (
    ALL_REPR_NAMES, check_delayed_condition, complete_repr, concrete_type_of, default_repr,
    encoder, parse_repr, phi, phi_inverse, phi_nested, rep_compare_nested, rep_less,
    structural_ok, transform_concrete,
)
from lexrefine.sweep import covered_reprs, sweep_instances
from lexrefine.types import (
    FunctionT, MSetT, Ordering, PartitionT, SetT, Size, enumerate_values, msetv, setv,
)

SS = SetT(Size(3), SetT(Size(2), T(4)))
EO = "set:Explicit(set:Occurrence)"
X = setv(us(2, 3), us(2, 4), us(1, 3))


# ---------------------------------------------------------------------------
# Worked examples
# ---------------------------------------------------------------------------

def test_set_of_pairs_as_boolean_matrix():
    assert str(concrete_type_of(SS, EO)) == \
        "matrix indexed by [int(1..3)] of matrix indexed by [T] of bool"
    assert phi_nested(X, SS, EO) == [[0, 1, 0, 1], [0, 1, 1, 0], [1, 0, 1, 0]]
    y = setv(us(1, 3), us(1, 4), us(2, 3))
    assert phi_nested(y, SS, EO) == [[0, 1, 1, 0], [1, 0, 0, 1], [1, 0, 1, 0]]
    assert phi_inverse([[0, 1, 0, 1], [0, 1, 1, 0], [1, 0, 1, 0]], SS, EO) == X


def test_delayed_image_swaps_columns_without_resorting():
    c = [[0, 1, 0, 1], [0, 1, 1, 0], [1, 0, 1, 0]]
    got = transform_concrete(c, perm(4, (1, 2)), SS, EO)
    assert C.nest(concrete_type_of(SS, EO), got) == [[1, 0, 0, 1], [1, 0, 1, 0], [0, 1, 1, 0]]
    # the delayed image is not a valid representation (rows unsorted)
    assert not structural_ok(got, SS, EO)


def test_explicit_pair_and_its_delayed_image():
    t = SetT(Size(2), T(5))
    x, g = us(1, 2), perm(5, (1, 3))
    assert phi(x, t, "set:Explicit") == (1, 2)
    assert transform_concrete((1, 2), g, t, "set:Explicit") == (3, 2)
    from lexrefine.types import apply_symmetry
    assert phi(apply_symmetry(x, g, t), t, "set:Explicit") == (2, 3)
    assert C.lex_compare((2, 3), (3, 2)) is Ordering.LT
    # reversed comparison breaks the condition on exactly this pair
    assert C.lex_compare((2, 3), (3, 2), descending=True) is Ordering.GT


def test_delayed_condition_holds_and_descending_hook_fails():
    t = SetT(Size(2), T(5))
    rep = check_delayed_condition(t, "set:Explicit")
    assert rep.ok and rep.checked == 119 * 10 and not rep.equality_holds
    bad = check_delayed_condition(t, "set:Explicit", descending=True, max_violations=10**6)
    assert not bad.ok
    assert any(x == us(1, 2) and list(lhs) == [2, 3] and list(rhs) == [3, 2]
               for x, g, lhs, rhs in bad.violations
               if g == perm(5, (1, 3)))
    assert check_delayed_condition(t, "set:Occurrence").equality_holds


# ---------------------------------------------------------------------------
# Trees
# ---------------------------------------------------------------------------

def test_parse_and_complete_repr():
    tree = parse_repr("set:Explicit( set:Occurrence )")
    assert str(tree) == EO
    assert complete_repr(SS) == parse_repr(EO)
    assert str(default_repr(SetT(Size(2), T(3)))) == "set:Occurrence"
    with pytest.raises(InvalidRepr):
        complete_repr(SS, "mset:Occurrence")
    with pytest.raises(InvalidRepr):
        complete_repr(SetT(None, T(3)), "set:Explicit")     # needs a fixed size
    with pytest.raises(ModelSyntaxError):
        parse_repr("set:Explicit(")


def test_every_named_representation_is_exercised_by_the_sweep():
    assert covered_reprs() == set(ALL_REPR_NAMES)


# ---------------------------------------------------------------------------
# phi is a bijection onto the structural predicate
# ---------------------------------------------------------------------------

def _raw_size(ct):
    return math.prod(s.hi - s.lo + 1 for s in C.scalars(ct))


BIJECTION_CASES = [(t, r) for t, r, _ in sweep_instances()
                   if _raw_size(encoder(t, r).ctype) <= 5000
                   and len(enumerate_values(t)) <= 2000]


@pytest.mark.parametrize("t,r", BIJECTION_CASES, ids=lambda x: str(x))
def test_phi_bijection_onto_structural_predicate(t, r):
    enc = encoder(t, r)
    values = enumerate_values(t)
    images = {enc.encode(v) for v in values}
    assert len(images) == len(values)
    for v in values:
        assert enc.decode(enc.encode(v)) == v
    valid = {c for c in C.all_values(enc.ctype) if enc.valid(c)}
    assert valid == images


def test_bijection_sample_covers_many_cases():
    assert len(BIJECTION_CASES) >= 80


def test_phi_inverse_rejects_non_images():
    with pytest.raises(NotInImage):
        phi_inverse([[0, 1, 1, 0], [0, 1, 0, 1], [1, 0, 1, 0]], SS, EO)   # rows unsorted
    with pytest.raises(NotInImage):
        phi_inverse([[1, 1, 1, 0], [0, 1, 1, 0], [1, 0, 1, 0]], SS, EO)   # row sum 3


# ---------------------------------------------------------------------------
# Representation order
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("t,r", [
    (SS, EO), (SS, "set:Explicit(set:Explicit)"),
    (MSetT(Size(3), T(3)), "mset:ExplicitFlags"),
    (FunctionT(T(3), T(3), False), "function:AsMatrixPartial"),
    (PartitionT(T(4)), "partition:Occurrence"),
], ids=str)
def test_rep_order_is_total_and_nested_agrees(t, r):
    values = enumerate_values(t)
    for a in values:
        for b in values[:40]:
            o = rep_less(a, b, t, r)
            assert o == -rep_less(b, a, t, r)
            assert (o is Ordering.EQ) == (a == b)
            assert o == rep_compare_nested(a, b, t, r)


def test_rep_order_depends_on_representation():
    t = SetT(Size(3), T(4))
    a, b = us(1, 2, 3), us(2, 3, 4)
    assert rep_less(a, b, t, "set:Explicit") is Ordering.LT
    assert rep_less(a, b, t, "set:Occurrence") is Ordering.GT


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(1, 4), min_size=3, max_size=3),
       st.permutations(range(1, 5)))
def test_hypothesis_delayed_condition_for_explicit_multisets(items, images):
    from lexrefine.groups import SymCombo, TaggedPerm
    from lexrefine.types import apply_symmetry
    t = MSetT(Size(3), T(4))
    r = "mset:ExplicitWithRepetition"
    x = msetv(*map(u, items))
    g = SymCombo.of(TaggedPerm("T", tuple(images)))
    lhs = phi(apply_symmetry(x, g, t), t, r)
    rhs = transform_concrete(phi(x, t, r), g, t, r)
    assert C.lex_compare(lhs, rhs) is not Ordering.GT
    assert sorted(lhs) == sorted(rhs)


def test_delayed_condition_on_nested_sets_full_group():
    rep = check_delayed_condition(SS, EO, symmetric_group([("T", 4)]))
    assert rep.ok and rep.checked == 23 * 20
