"""Concrete types: nested tuples and matrices of bounded integers.

A concrete value is handled through its flattening, a tuple of ints in the
global row-major order.  Booleans are 0/1.  A scalar carrying a ``tag``
encodes a value of that unnamed type as 1..n; anything above n in its range
is a dummy value that every symmetry fixes.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .types import Ordering


@dataclass(frozen=True)
class CScalar:
    lo: int
    hi: int
    tag: Optional[str] = None

    def __str__(self):
        if (self.lo, self.hi) == (0, 1) and self.tag is None:
            return "bool"
        suffix = f"@{self.tag}" if self.tag else ""
        return f"int({self.lo}..{self.hi}){suffix}"


@dataclass(frozen=True)
class CIndex:
    lo: int
    hi: int
    tag: Optional[str] = None

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    def values(self) -> range:
        return range(self.lo, self.hi + 1)

    def __str__(self):
        return self.tag or f"int({self.lo}..{self.hi})"


@dataclass(frozen=True)
class CMatrix:
    dims: tuple
    element: object

    @property
    def cells(self) -> int:
        return math.prod(d.size for d in self.dims)

    def __str__(self):
        return ("matrix indexed by [" + ", ".join(map(str, self.dims))
                + f"] of {self.element}")


@dataclass(frozen=True)
class CTuple:
    parts: tuple
    labels: tuple = ()

    def __str__(self):
        return "tuple (" + ", ".join(map(str, self.parts)) + ")"


@functools.lru_cache(maxsize=None)
def width(ct) -> int:
    if isinstance(ct, CScalar):
        return 1
    if isinstance(ct, CMatrix):
        return ct.cells * width(ct.element)
    return sum(width(p) for p in ct.parts)


@functools.lru_cache(maxsize=None)
def scalars(ct) -> tuple:
    """The scalar type of each flat position."""
    if isinstance(ct, CScalar):
        return (ct,)
    if isinstance(ct, CMatrix):
        return scalars(ct.element) * ct.cells
    return tuple(itertools.chain.from_iterable(scalars(p) for p in ct.parts))


def floor(ct) -> tuple:
    """The smallest flat value of the shape: every entry at its lower bound."""
    return tuple(s.lo for s in scalars(ct))


def names(ct, prefix: str) -> list:
    """Readable scalar names in flat order, e.g. ``m[1][3]`` or ``x.marker``."""
    if isinstance(ct, CScalar):
        return [prefix]
    if isinstance(ct, CMatrix):
        out = []
        for idx in itertools.product(*(d.values() for d in ct.dims)):
            out.extend(names(ct.element, prefix + "[" + ",".join(map(str, idx)) + "]"))
        return out
    out = []
    for i, p in enumerate(ct.parts):
        label = ct.labels[i] if i < len(ct.labels) else str(i + 1)
        out.extend(names(p, f"{prefix}.{label}"))
    return out


def nest(ct, flat: Sequence[int]):
    """Rebuild nested lists from a flattening (matrices nest one list per dim)."""
    flat = list(flat)
    if len(flat) != width(ct):
        raise ValueError(f"expected {width(ct)} entries, got {len(flat)}")

    def build(c, pos):
        if isinstance(c, CScalar):
            return flat[pos], pos + 1
        if isinstance(c, CTuple):
            out = []
            for p in c.parts:
                v, pos = build(p, pos)
                out.append(v)
            return out, pos
        elems = []
        for _ in range(c.cells):
            v, pos = build(c.element, pos)
            elems.append(v)
        for d in reversed(c.dims[1:]):
            elems = [elems[i:i + d.size] for i in range(0, len(elems), d.size)]
        return elems, pos

    return build(ct, 0)[0]


def flatten(ct, nested) -> tuple:
    """Inverse of :func:`nest`."""
    out = []

    def walk(c, v):
        if isinstance(c, CScalar):
            out.append(int(v))
        elif isinstance(c, CTuple):
            for p, x in zip(c.parts, v, strict=True):
                walk(p, x)
        else:
            def cells(x, depth):
                if depth == len(c.dims):
                    yield x
                    return
                if len(x) != c.dims[depth].size:
                    raise ValueError("ragged matrix")
                for y in x:
                    yield from cells(y, depth + 1)
            for x in cells(v, 0):
                walk(c.element, x)

    walk(ct, nested)
    return tuple(out)


@functools.lru_cache(maxsize=4096)
def index_plan(dims: tuple, g) -> tuple:
    """For each output cell of a matrix with ``dims``, the source cell ``i^(g^-1)``."""
    axes = [d.values() for d in dims]
    strides = []
    acc = 1
    for d in reversed(dims):
        strides.append(acc)
        acc *= d.size
    strides.reverse()
    src = []
    for idx in itertools.product(*axes):
        p = 0
        for i, d, s in zip(idx, dims, strides):
            j = g.preimage(d.tag, i) if d.tag else i
            p += (j - d.lo) * s
        src.append(p)
    return tuple(src)


def scalar_map(s: CScalar, g) -> Optional[tuple]:
    """Entry map of ``g`` on a scalar's range, or None when it is the identity."""
    if s.tag is None or g.get(s.tag) is None:
        return None
    perm = g.get(s.tag)
    images = tuple(perm(v) if 1 <= v <= perm.size else v for v in range(s.lo, s.hi + 1))
    if all(x == v for x, v in zip(images, range(s.lo, s.hi + 1))):
        return None
    return images


@functools.lru_cache(maxsize=4096)
def transform_plan(ct, g) -> tuple:
    """``(source position, entry map)`` for every output position of ``c^g``.

    Matrix dimensions indexed by a permuted tag are re-indexed through the
    inverse permutation; tagged scalar entries are mapped through ``g``.
    """
    out = []

    def walk(c, base):
        if isinstance(c, CScalar):
            out.append((base, scalar_map(c, g)))
            return base + 1
        if isinstance(c, CTuple):
            for p in c.parts:
                base = walk(p, base)
            return base
        w = width(c.element)
        sub = transform_plan(c.element, g)
        for s in index_plan(c.dims, g):
            for src, m in sub:
                out.append((base + s * w + src, m))
        return base + c.cells * w

    walk(ct, 0)
    return tuple(out)


def apply_plan(flat: Sequence[int], plan: tuple, ct) -> tuple:
    los = scalars(ct)
    out = []
    for src, m in plan:
        v = flat[src]
        out.append(v if m is None else m[v - los[src].lo])
    return tuple(out)


def transform(ct, flat: Sequence[int], g) -> tuple:
    return apply_plan(flat, transform_plan(ct, g), ct)


def lex_compare(a: Sequence[int], b: Sequence[int], descending: bool = False) -> Ordering:
    """Lexicographic comparison; ``descending`` reverses the entry order."""
    if descending:
        a = [-x for x in a]
        b = [-x for x in b]
    return Ordering.of(tuple(a), tuple(b))


def in_domain(ct, flat: Sequence[int]) -> bool:
    sc = scalars(ct)
    return len(flat) == len(sc) and all(s.lo <= v <= s.hi for s, v in zip(sc, flat))


def all_values(ct):
    """Every flat value in the raw domain of the shape (no structure)."""
    return itertools.product(*(range(s.lo, s.hi + 1) for s in scalars(ct)))
