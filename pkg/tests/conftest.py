"""Shared helpers for the test suite."""

from lexrefine.groups import SymCombo, TaggedPerm
from lexrefine.types import UV, UnnamedT, setv


def T(n, tag="T"):
    return UnnamedT(tag, n)


def u(i, tag="T"):
    return UV(tag, i)


def us(*idx, tag="T"):
    """A set of unnamed values given by their indices."""
    return setv(*(UV(tag, i) for i in idx))


def perm(n, *cycles, tag="T"):
    """A combo acting as the given cycles on one tag of size ``n``."""
    return SymCombo.of(TaggedPerm.from_cycles(tag, n, *cycles))
