"""Type language and abstract values.

Types are immutable descriptors.  Abstract values follow the usual
set-theoretic reading of the type constructors:

* ``bool`` and ``int`` values are Python ``bool`` / ``int``;
* a value of an unnamed type is a tagged integer :class:`UV`;
* tuples, sequences and matrices are Python tuples (matrices flattened
  row-major over their index sets, in declaration order);
* sets, multisets, functions, relations and partitions are :class:`MSetV`
  multisets.  Functions and relations hold 2-/k-tuples with multiplicity 1,
  partitions hold their cells (themselves sets).
"""

from __future__ import annotations

import enum
import functools
import itertools
import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterator, Optional

from .errors import CapExceeded, InfiniteType, UnknownTag, ValueOutOfType

DEFAULT_CAP = 1_000_000


class Ordering(enum.IntEnum):
    LT = -1
    EQ = 0
    GT = 1

    @classmethod
    def of(cls, a, b) -> "Ordering":
        if a < b:
            return cls.LT
        if a > b:
            return cls.GT
        return cls.EQ


@dataclass(frozen=True)
class Size:
    """A ``size n`` (exact) or ``maxSize n`` attribute."""

    n: int
    exact: bool = True

    def allows(self, k: int) -> bool:
        return k == self.n if self.exact else 0 <= k <= self.n

    def range(self) -> range:
        return range(self.n, self.n + 1) if self.exact else range(0, self.n + 1)

    def __str__(self):
        return f"size {self.n}" if self.exact else f"maxSize {self.n}"


# ---------------------------------------------------------------------------
# Type descriptors
# ---------------------------------------------------------------------------

class TypeExpr:
    """Base class of all type descriptors."""

    is_abstract = False


@dataclass(frozen=True)
class BoolT(TypeExpr):
    def __str__(self):
        return "bool"


@dataclass(frozen=True)
class IntT(TypeExpr):
    lo: Optional[int]
    hi: Optional[int]

    def __str__(self):
        if self.lo is None or self.hi is None:
            return "int"
        return f"int({self.lo}..{self.hi})"


@dataclass(frozen=True)
class UnnamedT(TypeExpr):
    tag: str
    size: int

    def __post_init__(self):
        if self.size < 1:
            raise ValueError(f"unnamed type {self.tag} needs a positive size")

    def __str__(self):
        return self.tag


@dataclass(frozen=True)
class TupleT(TypeExpr):
    components: tuple

    def __str__(self):
        return "tuple (" + ", ".join(map(str, self.components)) + ")"


@dataclass(frozen=True)
class MatrixT(TypeExpr):
    index: tuple
    element: TypeExpr

    def __post_init__(self):
        for i in self.index:
            if not is_enumerable(i):
                raise ValueError(f"matrix index set {i} is not enumerable")

    def __str__(self):
        return ("matrix indexed by [" + ", ".join(map(str, self.index))
                + f"] of {self.element}")


@dataclass(frozen=True)
class SetT(TypeExpr):
    size: Optional[Size]
    element: TypeExpr
    is_abstract = True

    def __str__(self):
        attr = f" ({self.size})" if self.size else ""
        return f"set{attr} of {self.element}"


@dataclass(frozen=True)
class MSetT(TypeExpr):
    size: Size
    element: TypeExpr
    max_occ: Optional[int] = None
    is_abstract = True

    @property
    def occ_bound(self) -> int:
        return self.size.n if self.max_occ is None else min(self.max_occ, self.size.n)

    def __str__(self):
        attrs = [str(self.size)]
        if self.max_occ is not None:
            attrs.append(f"maxOcc {self.max_occ}")
        return f"mset ({', '.join(attrs)}) of {self.element}"


@dataclass(frozen=True)
class FunctionT(TypeExpr):
    frm: TypeExpr
    to: TypeExpr
    total: bool = True
    is_abstract = True

    def __str__(self):
        attr = " (total)" if self.total else ""
        return f"function{attr} {self.frm} --> {self.to}"


@dataclass(frozen=True)
class RelationT(TypeExpr):
    components: tuple
    is_abstract = True

    def __str__(self):
        return "relation of (" + " * ".join(map(str, self.components)) + ")"


@dataclass(frozen=True)
class PartitionT(TypeExpr):
    frm: TypeExpr
    num_parts: Optional[Size] = None
    is_abstract = True

    def __post_init__(self):
        if not is_enumerable(self.frm):
            raise ValueError(f"partition domain {self.frm} is not enumerable")

    def __str__(self):
        if self.num_parts is None:
            attr = ""
        elif self.num_parts.exact:
            attr = f" (numParts {self.num_parts.n})"
        else:
            attr = f" (maxNumParts {self.num_parts.n})"
        return f"partition{attr} from {self.frm}"


@dataclass(frozen=True)
class SequenceT(TypeExpr):
    max_len: int
    element: TypeExpr
    is_abstract = True

    def __str__(self):
        return f"sequence (maxLen {self.max_len}) of {self.element}"


SET_LIKE = (SetT, MSetT, FunctionT, RelationT, PartitionT)


def is_enumerable(t: TypeExpr) -> bool:
    """Finite scalar types usable as index sets."""
    if isinstance(t, IntT):
        return t.lo is not None and t.hi is not None
    return isinstance(t, (BoolT, UnnamedT))


def is_enumerable_product(t: TypeExpr) -> bool:
    """Enumerable scalars, or tuples of them (multi-dimensional index)."""
    if isinstance(t, TupleT):
        return len(t.components) > 0 and all(is_enumerable(c) for c in t.components)
    return is_enumerable(t)


def is_abstract(t: TypeExpr) -> bool:
    if t.is_abstract:
        return True
    if isinstance(t, TupleT):
        return any(is_abstract(c) for c in t.components)
    if isinstance(t, MatrixT):
        return is_abstract(t.element)
    return False


def element_type(t: TypeExpr) -> TypeExpr:
    """Type of the members of the multiset that stores a set-like value."""
    if isinstance(t, (SetT, MSetT)):
        return t.element
    if isinstance(t, FunctionT):
        return TupleT((t.frm, t.to))
    if isinstance(t, RelationT):
        return TupleT(tuple(t.components))
    if isinstance(t, PartitionT):
        return SetT(None, t.frm)
    raise TypeError(f"{t} is not set-like")


@functools.lru_cache(maxsize=None)
def tags_of(t: TypeExpr) -> dict:
    """Unnamed tags occurring in ``t`` mapped to their sizes."""
    out: dict = {}

    def add(tag, size):
        if out.setdefault(tag, size) != size:
            raise UnknownTag(f"unnamed type {tag} used with sizes {out[tag]} and {size}")

    def walk(u):
        if isinstance(u, UnnamedT):
            add(u.tag, u.size)
        elif isinstance(u, (TupleT, RelationT)):
            for c in u.components:
                walk(c)
        elif isinstance(u, MatrixT):
            for i in u.index:
                walk(i)
            walk(u.element)
        elif isinstance(u, (SetT, MSetT, SequenceT)):
            walk(u.element)
        elif isinstance(u, FunctionT):
            walk(u.frm)
            walk(u.to)
        elif isinstance(u, PartitionT):
            walk(u.frm)

    walk(t)
    return out


# ---------------------------------------------------------------------------
# Values
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class UV:
    """Value ``index`` of unnamed type ``tag`` (1-based)."""

    tag: str
    index: int

    def __repr__(self):
        return f"{self.index}_{self.tag}"


class MSetV:
    """Immutable multiset; sets are multisets with all multiplicities 1."""

    __slots__ = ("_counts", "_hash", "_size")

    def __init__(self, items=()):
        counts = Counter(items)
        self._counts = frozenset(counts.items())
        self._hash = hash(self._counts)
        self._size = sum(counts.values())

    @classmethod
    def from_counts(cls, counts) -> "MSetV":
        return cls(Counter({k: c for k, c in dict(counts).items() if c > 0}).elements())

    def counts(self) -> dict:
        return dict(self._counts)

    def count(self, item) -> int:
        return self.counts().get(item, 0)

    def distinct(self) -> list:
        return [k for k, _ in self._counts]

    def is_set(self) -> bool:
        return all(c == 1 for _, c in self._counts)

    def __iter__(self) -> Iterator:
        for k, c in self._counts:
            for _ in range(c):
                yield k

    def __contains__(self, item):
        return any(k == item for k, _ in self._counts)

    def __len__(self):
        return self._size

    def __eq__(self, other):
        return isinstance(other, MSetV) and self._counts == other._counts

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "{" + ", ".join(sorted(map(repr, self))) + "}"


def setv(*items) -> MSetV:
    if len(set(items)) != len(items):
        raise ValueError("repeated element in a set literal")
    return MSetV(items)


def msetv(*items) -> MSetV:
    return MSetV(items)


# ---------------------------------------------------------------------------
# Cardinality and enumeration
# ---------------------------------------------------------------------------

def _stirling2(n: int, k: int) -> int:
    return sum((-1) ** j * math.comb(k, j) * (k - j) ** n for j in range(k + 1)) // math.factorial(k)


def _bounded_compositions(kinds: int, total: int, bound: int) -> int:
    """Count multisets over ``kinds`` elements of ``total`` size, multiplicity <= bound."""
    ways = [1] + [0] * total
    for _ in range(kinds):
        nxt = [0] * (total + 1)
        for s, w in enumerate(ways):
            if w:
                for c in range(0, min(bound, total - s) + 1):
                    nxt[s + c] += w
        ways = nxt
    return ways[total]


@functools.lru_cache(maxsize=None)
def cardinality(t: TypeExpr) -> int:
    """Exact ``|Val(t)|``."""
    if isinstance(t, BoolT):
        return 2
    if isinstance(t, IntT):
        if t.lo is None or t.hi is None:
            raise InfiniteType(f"{t} has no finite range")
        return max(0, t.hi - t.lo + 1)
    if isinstance(t, UnnamedT):
        return t.size
    if isinstance(t, TupleT):
        return math.prod(cardinality(c) for c in t.components)
    if isinstance(t, MatrixT):
        cells = math.prod(cardinality(i) for i in t.index)
        return cardinality(t.element) ** cells
    if isinstance(t, SetT):
        n = cardinality(t.element)
        if t.size is None:
            return 2 ** n
        return sum(math.comb(n, k) for k in t.size.range())
    if isinstance(t, MSetT):
        n = cardinality(t.element)
        return sum(_bounded_compositions(n, k, t.occ_bound) for k in t.size.range())
    if isinstance(t, FunctionT):
        dom, cod = cardinality(t.frm), cardinality(t.to)
        return cod ** dom if t.total else (cod + 1) ** dom
    if isinstance(t, RelationT):
        return 2 ** math.prod(cardinality(c) for c in t.components)
    if isinstance(t, PartitionT):
        n = cardinality(t.frm)
        ks = t.num_parts.range() if t.num_parts else range(0, n + 1)
        return sum(_stirling2(n, k) for k in ks if k <= n) if n else 1
    if isinstance(t, SequenceT):
        e = cardinality(t.element)
        return sum(e ** k for k in range(t.max_len + 1))
    raise TypeError(f"unknown type {t!r}")


def _check_cap(t: TypeExpr, cap: int) -> None:
    n = cardinality(t)
    if n > cap:
        raise CapExceeded(f"{t} has {n} values, more than the cap of {cap}")


def _restricted_growth(n: int) -> Iterator[list]:
    """All restricted growth strings of length n (0-based labels)."""
    if n == 0:
        yield []
        return
    rgs = [0] * n

    def rec(i, top):
        if i == n:
            yield list(rgs)
            return
        for lab in range(top + 2):
            rgs[i] = lab
            yield from rec(i + 1, max(top, lab))

    rgs[0] = 0
    yield from rec(1, 0)


def _generate(t: TypeExpr) -> Iterator:
    if isinstance(t, BoolT):
        yield from (False, True)
    elif isinstance(t, IntT):
        cardinality(t)
        yield from range(t.lo, t.hi + 1)
    elif isinstance(t, UnnamedT):
        yield from (UV(t.tag, i) for i in range(1, t.size + 1))
    elif isinstance(t, TupleT):
        yield from itertools.product(*(_values(c) for c in t.components))
    elif isinstance(t, MatrixT):
        cells = math.prod(cardinality(i) for i in t.index)
        yield from itertools.product(_values(t.element), repeat=cells)
    elif isinstance(t, SetT):
        inner = _values(t.element)
        sizes = t.size.range() if t.size else range(len(inner) + 1)
        for k in sizes:
            for combo in itertools.combinations(inner, k):
                yield MSetV(combo)
    elif isinstance(t, MSetT):
        inner = _values(t.element)
        bound = t.occ_bound
        for k in t.size.range():
            for combo in itertools.combinations_with_replacement(inner, k):
                if all(c <= bound for c in Counter(combo).values()):
                    yield MSetV(combo)
    elif isinstance(t, FunctionT):
        dom = _values(t.frm)
        cod = list(_values(t.to))
        if not t.total:
            cod.append(None)
        for images in itertools.product(cod, repeat=len(dom)):
            yield MSetV((a, b) for a, b in zip(dom, images) if b is not None)
    elif isinstance(t, RelationT):
        pairs = list(itertools.product(*(_values(c) for c in t.components)))
        for mask in itertools.product((False, True), repeat=len(pairs)):
            yield MSetV(p for p, keep in zip(pairs, mask) if keep)
    elif isinstance(t, PartitionT):
        dom = _values(t.frm)
        for rgs in _restricted_growth(len(dom)):
            k = max(rgs) + 1 if rgs else 0
            if t.num_parts is not None and not t.num_parts.allows(k):
                continue
            cells = [[] for _ in range(k)]
            for x, lab in zip(dom, rgs):
                cells[lab].append(x)
            yield MSetV(MSetV(c) for c in cells)
    elif isinstance(t, SequenceT):
        inner = _values(t.element)
        for n in range(t.max_len + 1):
            yield from itertools.product(inner, repeat=n)
    else:
        raise TypeError(f"unknown type {t!r}")


@functools.lru_cache(maxsize=256)
def _values(t: TypeExpr) -> tuple:
    key = static_key_fn(t)
    return tuple(sorted(_generate(t), key=key))


def enumerate_values(t: TypeExpr, cap: int = DEFAULT_CAP) -> list:
    """All values of ``t`` in ascending static order."""
    _check_cap(t, cap)
    return list(_values(t))


# ---------------------------------------------------------------------------
# Static total order
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def static_key_fn(t: TypeExpr) -> Callable:
    """Sort key realising the static total order on ``Val(t)``.

    Multisets compare by the lexicographic order of their negated frequency
    vectors, indexed by the inner value space in ascending order; the inner
    space is enumerated (and cached) to build that index.
    """
    if isinstance(t, BoolT):
        return int
    if isinstance(t, IntT):
        return lambda v: v
    if isinstance(t, UnnamedT):
        return lambda v: v.index
    if isinstance(t, TupleT):
        keys = [static_key_fn(c) for c in t.components]
        return lambda v: tuple(k(x) for k, x in zip(keys, v))
    if isinstance(t, (MatrixT, SequenceT)):
        k = static_key_fn(t.element)
        return lambda v: tuple(k(x) for x in v)
    if isinstance(t, SET_LIKE):
        inner_t = element_type(t)
        _check_cap(inner_t, DEFAULT_CAP)
        inner = _values(inner_t)
        pos = {x: i for i, x in enumerate(inner)}
        n = len(inner)

        def key(v):
            vec = [0] * n
            for x, c in v.counts().items():
                vec[pos[x]] = -c
            return tuple(vec)

        return key
    raise TypeError(f"unknown type {t!r}")


def static_key(v, t: TypeExpr):
    return static_key_fn(t)(v)


def static_less(a, b, t: TypeExpr, cap: int = DEFAULT_CAP) -> Ordering:
    """Compare two values of ``t`` under the static total order."""
    if isinstance(t, SET_LIKE):
        _check_cap(element_type(t), cap)
    key = static_key_fn(t)
    return Ordering.of(key(a), key(b))


def frequency_vector(v: MSetV, t: TypeExpr) -> list:
    """Negated frequencies of ``v`` over the ascending inner value space."""
    return list(static_key(v, t))


# ---------------------------------------------------------------------------
# Type checking
# ---------------------------------------------------------------------------

def typecheck(v, t: TypeExpr) -> bool:
    """True iff ``v`` is a value of ``t``."""
    if isinstance(t, BoolT):
        return isinstance(v, bool)
    if isinstance(t, IntT):
        if not isinstance(v, int) or isinstance(v, bool):
            return False
        return (t.lo is None or v >= t.lo) and (t.hi is None or v <= t.hi)
    if isinstance(t, UnnamedT):
        return isinstance(v, UV) and v.tag == t.tag and 1 <= v.index <= t.size
    if isinstance(t, TupleT):
        return (isinstance(v, tuple) and len(v) == len(t.components)
                and all(typecheck(x, c) for x, c in zip(v, t.components)))
    if isinstance(t, MatrixT):
        cells = math.prod(cardinality(i) for i in t.index)
        return (isinstance(v, tuple) and len(v) == cells
                and all(typecheck(x, t.element) for x in v))
    if isinstance(t, SequenceT):
        return (isinstance(v, tuple) and len(v) <= t.max_len
                and all(typecheck(x, t.element) for x in v))
    if not isinstance(v, MSetV):
        return False
    inner = element_type(t)
    if not all(typecheck(x, inner) for x in v.distinct()):
        return False
    if isinstance(t, SetT):
        return v.is_set() and (t.size is None or t.size.allows(len(v)))
    if isinstance(t, MSetT):
        return (t.size.allows(len(v))
                and all(c <= t.occ_bound for c in v.counts().values()))
    if isinstance(t, FunctionT):
        firsts = [a for a, _ in v]
        if not v.is_set() or len(set(firsts)) != len(firsts):
            return False
        return not t.total or len(firsts) == cardinality(t.frm)
    if isinstance(t, RelationT):
        return v.is_set()
    if isinstance(t, PartitionT):
        if not v.is_set():
            return False
        seen = []
        for cell in v:
            if len(cell) == 0:
                return False
            seen.extend(cell)
        if sorted(seen, key=static_key_fn(t.frm)) != list(_values(t.frm)):
            return False
        return t.num_parts is None or t.num_parts.allows(len(v))
    return False


def require_value(v, t: TypeExpr) -> None:
    if not typecheck(v, t):
        raise ValueOutOfType(f"{v!r} is not a value of {t}")


# ---------------------------------------------------------------------------
# Induced symmetry action
# ---------------------------------------------------------------------------

def _touches(g, t: TypeExpr) -> bool:
    tags = tags_of(t)
    return any(tag in tags for tag in g.tags())


@functools.lru_cache(maxsize=4096)
def _matrix_source(index: tuple, g) -> tuple:
    """For each flat output position, the flat source position ``i^(g^-1)``."""
    ginv = g.inverse()
    axes = [_values(i) for i in index]
    pos = {idx: p for p, idx in enumerate(itertools.product(*axes))}
    src = []
    for idx in itertools.product(*axes):
        pre = tuple(_act(x, ginv, it) for x, it in zip(idx, index))
        src.append(pos[pre])
    return tuple(src)


def _act(v, g, t: TypeExpr):
    if not _touches(g, t):
        return v
    if isinstance(t, UnnamedT):
        return UV(v.tag, g.image(v.tag, v.index))
    if isinstance(t, TupleT):
        return tuple(_act(x, g, c) for x, c in zip(v, t.components))
    if isinstance(t, SequenceT):
        return tuple(_act(x, g, t.element) for x in v)
    if isinstance(t, MatrixT):
        src = _matrix_source(tuple(t.index), g)
        return tuple(_act(v[s], g, t.element) for s in src)
    if isinstance(t, SET_LIKE):
        inner = element_type(t)
        counts: Counter = Counter()
        for x, c in v.counts().items():
            counts[_act(x, g, inner)] += c
        return MSetV(counts.elements())
    return v


def apply_symmetry(v, g, t: TypeExpr):
    """Image ``v^g`` of ``v`` under the action induced by the combo ``g``.

    Raises UnknownTag if ``g`` moves points of a tag that does not occur in
    ``t``, or if the permutation size disagrees with the declared size.
    """
    tags = tags_of(t)
    for tag in g.tags():
        if tag not in tags:
            raise UnknownTag(f"symmetry moves unnamed type {tag}, absent from {t}")
        if g.size(tag) != tags[tag]:
            raise UnknownTag(f"permutation of {tag} has degree {g.size(tag)}, "
                             f"type declares {tags[tag]}")
    return _act(v, g, t)


def act(v, g, t: TypeExpr):
    """``apply_symmetry`` without the tag check (tags absent from ``t`` act trivially)."""
    return _act(v, g, t)
