import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from conftest import T, perm, u, us
from lexrefine.errors import CapExceeded, InfiniteType, UnknownTag
from lexrefine.groups import SymCombo, TaggedPerm, symmetric_group
from lexrefine.types import (
    BoolT, FunctionT, IntT, MatrixT, MSetT, Ordering, PartitionT, RelationT, SequenceT,
    SetT, Size, TupleT, apply_symmetry, tags_of, cardinality, enumerate_values, frequency_vector,
    msetv, setv, static_key, static_less, typecheck,
)


# ---------------------------------------------------------------------------
# Worked examples
# ---------------------------------------------------------------------------

def test_three_subsets_compare_by_negated_frequencies():
    t = SetT(Size(3), T(4))
    a, b = us(1, 2, 3), us(1, 2, 4)
    assert frequency_vector(a, t) == [-1, -1, -1, 0]
    assert frequency_vector(b, t) == [-1, -1, 0, -1]
    assert static_less(a, b, t) is Ordering.LT


def test_image_of_three_subset_under_double_transposition():
    g = perm(4, (1, 2), (3, 4))
    assert apply_symmetry(us(1, 2, 3), g, SetT(Size(3), T(4))) == us(1, 2, 4)


def test_frequency_tuple_of_set_of_pairs():
    t = SetT(Size(3), SetT(Size(2), T(4)))
    v = setv(us(2, 3), us(2, 4), us(1, 3))
    assert frequency_vector(v, t) == [0, -1, 0, -1, -1, 0]


def test_image_of_set_of_pairs_under_transposition():
    t = SetT(Size(3), SetT(Size(2), T(4)))
    v = setv(us(2, 3), us(2, 4), us(1, 3))
    assert apply_symmetry(v, perm(4, (1, 2)), t) == setv(us(1, 3), us(1, 4), us(2, 3))


def test_identity_and_reflexivity():
    t = SetT(Size(3), T(4))
    for v in enumerate_values(t):
        assert apply_symmetry(v, perm(4), t) == v
        assert static_less(v, v, t) is Ordering.EQ


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

def test_enumerate_small_spaces():
    assert len(enumerate_values(SetT(Size(3), T(4)))) == 4
    assert len(enumerate_values(SetT(Size(2), SetT(Size(1), T(3))))) == 3
    assert enumerate_values(IntT(1, 2)) == [1, 2]
    assert enumerate_values(BoolT()) == [False, True]


# Counts are the usual closed forms, derived independently of the enumerator.
COUNT_CASES = [
    (SetT(None, T(4)), 2 ** 4),
    (SetT(Size(2, False), T(4)), 1 + 4 + 6),
    (MSetT(Size(3), T(3)), math.comb(5, 3)),
    (MSetT(Size(3), T(3), 1), 1),
    (FunctionT(T(3), T(2), True), 2 ** 3),
    (FunctionT(T(2), T(3), False), 4 ** 2),
    (RelationT((T(2), T(2))), 2 ** 4),
    (PartitionT(T(4)), 15),
    (PartitionT(T(4), Size(2)), 7),
    (SequenceT(2, BoolT()), 1 + 2 + 4),
    (MatrixT((T(2), BoolT()), IntT(0, 2)), 3 ** 4),
    (TupleT((T(3), BoolT())), 6),
    (SetT(Size(2), SetT(Size(2), T(4))), math.comb(6, 2)),
]


@pytest.mark.parametrize("t,count", COUNT_CASES, ids=lambda x: str(x))
def test_enumeration_count_and_order(t, count):
    values = enumerate_values(t)
    assert len(values) == count == cardinality(t)
    assert len(set(values)) == count
    keys = [static_key(v, t) for v in values]
    assert keys == sorted(keys)
    assert all(typecheck(v, t) for v in values)


def test_enumeration_errors():
    with pytest.raises(CapExceeded):
        enumerate_values(SetT(None, T(30)), cap=1000)
    with pytest.raises(InfiniteType):
        enumerate_values(IntT(None, None))


# ---------------------------------------------------------------------------
# Type checking
# ---------------------------------------------------------------------------

def test_typecheck_cases():
    assert not typecheck(msetv(u(1), u(1)), SetT(Size(2), T(4)))
    f = setv((u(1), u(2)), (u(1), u(3)))
    assert not typecheck(f, FunctionT(T(4), T(4)))
    assert typecheck(us(1, 2, 3), SetT(Size(3), T(4)))
    assert not typecheck(us(1, 2), SetT(Size(3), T(4)))
    assert not typecheck(u(5), T(4))
    assert not typecheck(u(1, "U"), T(4))
    assert not typecheck(True, IntT(0, 1))
    assert typecheck(msetv(u(1), u(1)), MSetT(Size(2), T(2)))
    assert not typecheck(msetv(u(1), u(1)), MSetT(Size(2), T(2), 1))
    assert not typecheck(setv(us(1), us(1, 2)), PartitionT(T(2)))


def test_symmetry_with_unknown_tag_is_rejected():
    with pytest.raises(UnknownTag):
        apply_symmetry(us(1), perm(2, (1, 2), tag="U"), SetT(Size(1), T(2)))


def test_matrix_indexed_by_unnamed_permutes_positions_and_values():
    t = MatrixT((T(3),), T(3))
    v = (u(1), u(1), u(2))          # m[1]=1, m[2]=1, m[3]=2
    g = perm(3, (1, 2, 3))          # 1->2->3->1
    # m^g[i] = m[i^(g^-1)]^g
    assert apply_symmetry(v, g, t) == (u(3), u(2), u(2))


# ---------------------------------------------------------------------------
# Properties
# ---------------------------------------------------------------------------

SMALL_TYPES = [
    SetT(Size(2), T(3)),
    SetT(None, SetT(Size(1), T(3))),
    MSetT(Size(2), T(3)),
    FunctionT(T(3), T(3), True),
    RelationT((T(2), T(3, "U"))),
    PartitionT(T(4)),
    MatrixT((T(2), T(2, "U")), BoolT()),
    SequenceT(2, T(2)),
    TupleT((SetT(Size(1), T(3)), MSetT(Size(2), T(2, "U")))),
]


@pytest.mark.parametrize("t", SMALL_TYPES, ids=str)
def test_group_action_laws_exhaustive(t):
    group = symmetric_group(sorted(tags_of(t).items()))
    values = enumerate_values(t)
    for g, h in itertools.product(group, repeat=2):
        for v in values:
            assert apply_symmetry(apply_symmetry(v, g, t), h, t) == apply_symmetry(v, g * h, t)
    for g in group:
        assert {apply_symmetry(v, g, t) for v in values} == set(values)
        assert all(typecheck(apply_symmetry(v, g, t), t) for v in values)


@pytest.mark.parametrize("t", SMALL_TYPES, ids=str)
def test_static_order_is_total_exhaustive(t):
    values = enumerate_values(t)
    assert len(values) <= 500
    for a, b in itertools.product(values, repeat=2):
        o, r = static_less(a, b, t), static_less(b, a, t)
        assert o == -r
        assert (o is Ordering.EQ) == (a == b)
    for a, b, c in zip(values, values[1:], values[2:]):
        assert static_less(a, b, t) is Ordering.LT and static_less(a, c, t) is Ordering.LT


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(1, 5), min_size=1, max_size=5),
       st.lists(st.integers(1, 5), min_size=1, max_size=5),
       st.permutations(range(1, 6)))
def test_hypothesis_multiset_order_and_action(xs, ys, images):
    t = MSetT(Size(5, False), T(5))
    a, b = msetv(*map(u, xs)), msetv(*map(u, ys))
    g = SymCombo.of(TaggedPerm("T", tuple(images)))
    ga = apply_symmetry(a, g, t)
    assert len(ga) == len(a) and typecheck(ga, t)
    assert apply_symmetry(ga, g.inverse(), t) == a
    assert static_less(a, b, t) == -static_less(b, a, t)
