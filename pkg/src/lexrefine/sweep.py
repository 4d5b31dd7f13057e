"""Desk-scale sweep of the delayed-application condition over every representation.

Instances use unnamed types of size at most 4, container sizes at most 3 and
function/relation arity at most 2.  Each instance is checked under the full
symmetric group of all its unnamed types.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .reprs import DelayedReport, check_delayed_condition, complete_repr
from .types import (
    BoolT, FunctionT, IntT, MatrixT, MSetT, PartitionT, RelationT, SequenceT,
    SetT, Size, TupleT, UnnamedT,
)

T = {n: UnnamedT("T", n) for n in range(1, 5)}
U = {n: UnnamedT("U", n) for n in range(1, 5)}


def _set(k, e, exact=True):
    return SetT(Size(k, exact), e)


def _instances():
    out = []

    def add(t, r, expect_equal=None):
        out.append((t, r, expect_equal))

    # sets
    for n in range(1, 5):
        for k in range(0, min(3, n) + 1):
            add(_set(k, T[n]), "set:Occurrence", True)
            add(_set(k, T[n], False), "set:Occurrence", True)
            add(_set(k, T[n]), "set:Explicit")
            add(_set(k, T[n], False), "set:ExplicitVarSizeMarker")
            add(_set(k, T[n], False), "set:ExplicitVarSizeFlags")
            add(_set(k, T[n], False), "set:ExplicitVarSizeDummy")
    pairs = TupleT((T[2], U[2]))
    add(_set(2, pairs), "set:Occurrence", True)
    add(_set(2, pairs), "set:Explicit")
    add(_set(3, TupleT((T[3], T[3]))), "set:Explicit")
    add(_set(2, IntT(1, 3), False), "set:ExplicitVarSizeDummy")
    add(_set(3, _set(2, T[4])), "set:Explicit(set:Occurrence)")
    add(_set(3, _set(2, T[4])), "set:Explicit(set:Explicit)")
    add(_set(2, _set(2, T[3], False)), "set:Explicit(set:ExplicitVarSizeMarker)")
    add(_set(2, _set(2, T[3], False)), "set:Explicit(set:ExplicitVarSizeDummy)")
    add(_set(2, _set(2, T[4]), False), "set:ExplicitVarSizeMarker(set:Occurrence)")
    add(_set(2, _set(2, T[4]), False), "set:ExplicitVarSizeFlags(set:Explicit)")
    add(_set(2, MatrixT((T[3],), BoolT())), "set:Explicit(matrix)")
    add(_set(2, FunctionT(T[3], U[2])), "set:Explicit(function:AsMatrix)")
    add(_set(2, MSetT(Size(2), T[3])), "set:Explicit(mset:Occurrence)")
    add(_set(2, RelationT((T[2], T[2]))), "set:Explicit(relation:AsMatrix)")
    # multisets
    for n in range(1, 5):
        for k in range(1, 4):
            add(MSetT(Size(k), T[n]), "mset:Occurrence", True)
            add(MSetT(Size(k, False), T[n], 2), "mset:Occurrence", True)
            add(MSetT(Size(k), T[n]), "mset:ExplicitWithRepetition")
            add(MSetT(Size(k), T[n], 2), "mset:ExplicitWithRepetition")
            add(MSetT(Size(k), T[n]), "mset:ExplicitFlags")
            add(MSetT(Size(k, False), T[n], 2), "mset:ExplicitFlags")
    add(MSetT(Size(3), _set(2, T[4])), "mset:ExplicitWithRepetition(set:Occurrence)")
    add(MSetT(Size(2), _set(2, T[3])), "mset:ExplicitWithRepetition(set:Explicit)")
    add(MSetT(Size(3, False), _set(2, T[4])), "mset:ExplicitFlags(set:Occurrence)")
    add(MSetT(Size(2), _set(2, T[3])), "mset:ExplicitFlags(set:Explicit)")
    add(MSetT(Size(2), TupleT((T[2], U[2]))), "mset:Occurrence", True)
    # functions
    for n in range(1, 5):
        add(FunctionT(T[n], T[n]), "function:AsMatrix", True)
        add(FunctionT(T[n], T[n], total=False), "function:AsMatrixDummy", True)
        add(FunctionT(T[n], T[n], total=False), "function:AsMatrixPartial")
        add(FunctionT(T[n], T[n], total=False), "function:AsMatrixDummy")
    add(FunctionT(T[3], U[2]), "function:AsMatrix", True)
    add(FunctionT(T[3], BoolT()), "function:AsMatrix", True)
    add(FunctionT(IntT(1, 3), T[3]), "function:AsMatrix", True)
    add(FunctionT(T[3], U[3], total=False), "function:AsMatrixPartial")
    add(FunctionT(U[2], _set(2, T[3])), "function:AsMatrix(set:Occurrence)", True)
    add(FunctionT(U[2], _set(2, T[3])), "function:AsMatrix(set:Explicit)")
    add(FunctionT(T[3], _set(1, U[2]), total=False), "function:AsMatrixPartial(set:Occurrence)")
    add(FunctionT(TupleT((T[2], U[2])), BoolT()), "function:AsMatrix", True)
    add(FunctionT(T[3], T[3]), "function:AsRelation(relation:AsMatrix)", True)
    add(FunctionT(T[3], T[3], total=False), "function:AsRelation(relation:AsMatrix)", True)
    add(FunctionT(T[3], U[2]),
        "function:AsRelation(relation:AsSet(set:ExplicitVarSizeMarker))")
    add(FunctionT(T[2], U[3], total=False),
        "function:AsRelation(relation:AsSet(set:ExplicitVarSizeFlags))")
    # relations
    for n in range(1, 4):
        add(RelationT((T[n], T[n])), "relation:AsMatrix", True)
        add(RelationT((T[n], T[n])), "relation:AsSet(set:Occurrence)", True)
        add(RelationT((T[n],)), "relation:AsMatrix", True)
    add(RelationT((T[4],)), "relation:AsMatrix", True)
    add(RelationT((T[2], U[3])), "relation:AsMatrix", True)
    add(RelationT((T[4], U[2])), "relation:AsMatrix", True)
    add(RelationT((T[2], T[2])), "relation:AsSet(set:ExplicitVarSizeMarker)")
    add(RelationT((T[2], U[2])), "relation:AsSet(set:ExplicitVarSizeFlags)")
    add(RelationT((T[2], IntT(1, 2))), "relation:AsSet(set:ExplicitVarSizeMarker)")
    # partitions
    for n in range(1, 5):
        add(PartitionT(T[n]), "partition:Occurrence")
        add(PartitionT(T[n], Size(2)), "partition:Occurrence")
        add(PartitionT(T[n]), "partition:AsSet(set:ExplicitVarSizeMarker(set:Occurrence))")
        add(PartitionT(T[n], Size(2, False)),
            "partition:AsSet(set:ExplicitVarSizeFlags(set:ExplicitVarSizeDummy))")
    add(PartitionT(T[4], Size(2)), "partition:AsSet(set:Explicit(set:Occurrence))")
    add(PartitionT(T[4], Size(3)), "partition:AsSet(set:Explicit(set:ExplicitVarSizeDummy))")
    # sequences
    for n in range(1, 5):
        for k in range(0, 4):
            add(SequenceT(k, T[n]), "sequence:ExplicitBounded")
    add(SequenceT(2, _set(2, T[3])), "sequence:ExplicitBounded(set:Occurrence)")
    add(SequenceT(2, _set(2, T[3])), "sequence:ExplicitBounded(set:Explicit)")
    add(SequenceT(3, TupleT((T[2], U[2]))), "sequence:ExplicitBounded")
    # concrete wrappers around abstract parts
    add(MatrixT((T[3],), _set(1, T[3])), "matrix(set:Occurrence)", True)
    add(MatrixT((U[2],), _set(2, T[3])), "matrix(set:Explicit)")
    add(TupleT((_set(2, T[3]), FunctionT(T[3], T[3]))),
        "tuple(set:Explicit, function:AsMatrix)")
    return out


@dataclass
class SweepResult:
    type_text: str
    repr_text: str
    report: DelayedReport
    expect_equal: bool
    seconds: float

    @property
    def passed(self) -> bool:
        return self.report.ok and (not self.expect_equal or self.report.equality_holds)


def sweep_instances():
    """``(type, completed repr tree, expect_equality)`` for the whole sweep."""
    return [(t, complete_repr(t, r), bool(eq)) for t, r, eq in _instances()]


def covered_reprs() -> set:
    names = set()

    def walk(tree):
        if ":" in tree.name:
            names.add(tree.name)
        for c in tree.children:
            walk(c)

    for _, tree, _ in sweep_instances():
        walk(tree)
    return names


def run_sweep(progress=None) -> list:
    results = []
    for t, tree, eq in sweep_instances():
        start = time.perf_counter()
        report = check_delayed_condition(t, tree)
        res = SweepResult(str(t), str(tree), report, eq, time.perf_counter() - start)
        results.append(res)
        if progress:
            progress(res)
    return results

