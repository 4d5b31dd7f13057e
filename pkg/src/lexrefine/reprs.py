"""Representations of abstract types as concrete matrices.

A representation tree picks one representation per abstract node of a type
and induces a bijection ``phi`` from the abstract values onto the concrete
values that satisfy a structural predicate.  Comparing ``phi`` images
lexicographically gives the representation-dependent order on abstract
values (:func:`rep_less`).

Conventions shared by every encoder:

* element orders are the natural ascending ones, so explicit layouts hold
  their blocks in ascending lexicographic order;
* unused ("don't care") slots hold the floor of their shape, every entry at
  its lower bound;
* auxiliary components (size markers, flags) come before the payload in the
  flattening, except for the multiset ``ExplicitFlags`` layout whose count
  vector follows the values.
"""

from __future__ import annotations

import functools
import itertools
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from . import concrete as C
from .concrete import CIndex, CMatrix, CScalar, CTuple
from .errors import InvalidRepr, ModelSyntaxError, NotInImage
from .groups import symmetric_group
from .types import (
    DEFAULT_CAP, BoolT, FunctionT, IntT, MatrixT, MSetT, MSetV, Ordering,
    PartitionT, RelationT, SequenceT, SetT, Size, TupleT, TypeExpr, UnnamedT,
    UV, act, cardinality, enumerate_values, is_enumerable,
    is_enumerable_product, require_value, tags_of,
)

ABSTRACT_REPRS = {
    "set": ("Occurrence", "Explicit", "ExplicitVarSizeMarker",
            "ExplicitVarSizeFlags", "ExplicitVarSizeDummy"),
    "mset": ("Occurrence", "ExplicitWithRepetition", "ExplicitFlags"),
    "function": ("AsMatrix", "AsMatrixPartial", "AsMatrixDummy", "AsRelation"),
    "relation": ("AsMatrix", "AsSet"),
    "partition": ("Occurrence", "AsSet"),
    "sequence": ("ExplicitBounded",),
}

ALL_REPR_NAMES = tuple(f"{k}:{n}" for k, names in ABSTRACT_REPRS.items() for n in names)


@dataclass(frozen=True)
class ReprTree:
    """Representation choice for one type node plus its children.

    ``name`` is ``kind:Repr`` for abstract nodes, ``tuple`` / ``matrix`` for
    concrete constructors and ``_`` for scalars.
    """

    name: str
    children: tuple = ()

    def __str__(self):
        if not self.children:
            return self.name
        return f"{self.name}(" + ", ".join(map(str, self.children)) + ")"


LEAF = ReprTree("_")

_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*(?::[A-Za-z][A-Za-z0-9]*)?)|(.))")


def parse_repr(text: str) -> ReprTree:
    """Parse ``name ':' Repr [ '(' child, ... ')' ]`` into a tree."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m.group(1):
            tokens.append((m.group(1), m.start(1)))
        elif m.group(2).strip():
            tokens.append((m.group(2), m.start(2)))
        pos = m.end()
    i = 0

    def node():
        nonlocal i
        if i >= len(tokens) or not re.match(r"[A-Za-z_]", tokens[i][0]):
            where = tokens[i][1] if i < len(tokens) else len(text)
            raise ModelSyntaxError(f"representation name expected in {text!r}", 1, where + 1)
        name = tokens[i][0]
        i += 1
        kids = []
        if i < len(tokens) and tokens[i][0] == "(":
            i += 1
            kids.append(node())
            while i < len(tokens) and tokens[i][0] == ",":
                i += 1
                kids.append(node())
            if i >= len(tokens) or tokens[i][0] != ")":
                raise ModelSyntaxError(f"')' expected in {text!r}", 1, len(text) + 1)
            i += 1
        return ReprTree(name, tuple(kids))

    tree = node()
    if i != len(tokens):
        raise ModelSyntaxError(f"trailing input in {text!r}", 1, tokens[i][1] + 1)
    return tree


def _kind(t: TypeExpr) -> str:
    return {SetT: "set", MSetT: "mset", FunctionT: "function", RelationT: "relation",
            PartitionT: "partition", SequenceT: "sequence", TupleT: "tuple",
            MatrixT: "matrix"}.get(type(t), "_")


def relation_inner(t: RelationT) -> SetT:
    n = math.prod(cardinality(c) for c in t.components)
    return SetT(Size(n, exact=False), TupleT(tuple(t.components)))


def partition_inner(t: PartitionT) -> SetT:
    n = cardinality(t.frm)
    cells = t.num_parts or Size(n, exact=False)
    return SetT(cells, SetT(Size(n, exact=False), t.frm))


def _child_types(t: TypeExpr, name: str) -> list:
    """Types that the children of representation ``name`` of ``t`` describe."""
    if isinstance(t, TupleT):
        return list(t.components)
    if isinstance(t, MatrixT):
        return [t.element]
    if name in ("set:Occurrence", "mset:Occurrence", "set:ExplicitVarSizeDummy",
                "function:AsMatrixDummy", "relation:AsMatrix", "partition:Occurrence"):
        return []
    if isinstance(t, (SetT, MSetT, SequenceT)):
        return [t.element]
    if isinstance(t, FunctionT):
        if name == "function:AsRelation":
            return [RelationT((t.frm, t.to))]
        return [t.to]
    if isinstance(t, RelationT):
        return [relation_inner(t)]
    if isinstance(t, PartitionT):
        return [partition_inner(t)]
    return []


def default_repr(t: TypeExpr) -> ReprTree:
    """Default representation: occurrence-style whenever the element type is
    enumerable, sorted explicit layouts otherwise."""
    if isinstance(t, SetT):
        if is_enumerable_product(t.element):
            name = "set:Occurrence"
        elif t.size is not None and t.size.exact:
            name = "set:Explicit"
        else:
            name = "set:ExplicitVarSizeMarker"
    elif isinstance(t, MSetT):
        if is_enumerable_product(t.element):
            name = "mset:Occurrence"
        elif t.size.exact:
            name = "mset:ExplicitWithRepetition"
        else:
            name = "mset:ExplicitFlags"
    elif isinstance(t, FunctionT):
        if not is_enumerable_product(t.frm):
            name = "function:AsRelation"
        elif t.total:
            name = "function:AsMatrix"
        elif is_enumerable(t.to):
            name = "function:AsMatrixDummy"
        else:
            name = "function:AsMatrixPartial"
    elif isinstance(t, RelationT):
        name = ("relation:AsMatrix" if all(is_enumerable(c) for c in t.components)
                else "relation:AsSet")
    elif isinstance(t, PartitionT):
        name = "partition:Occurrence"
    elif isinstance(t, SequenceT):
        name = "sequence:ExplicitBounded"
    else:
        name = _kind(t)
    return ReprTree(name, tuple(default_repr(c) for c in _child_types(t, name)))


def complete_repr(t: TypeExpr, tree: Union[ReprTree, str, None] = None) -> ReprTree:
    """Fill defaults into a possibly partial tree and check it fits ``t``."""
    if tree is None:
        return default_repr(t)
    if isinstance(tree, str):
        tree = parse_repr(tree)
    kind = tree.name.split(":")[0]
    expected = _kind(t)
    if kind != expected:
        raise InvalidRepr(f"representation {tree.name} does not fit {t}")
    if ":" in tree.name:
        rname = tree.name.split(":", 1)[1]
        if rname not in ABSTRACT_REPRS.get(kind, ()):
            raise InvalidRepr(f"unknown representation {tree.name}")
    elif expected not in ("tuple", "matrix", "_"):
        raise InvalidRepr(f"abstract type {t} needs a named representation, got {tree.name}")
    kids = _child_types(t, tree.name)
    if len(tree.children) > len(kids):
        raise InvalidRepr(f"{tree.name} takes {len(kids)} children, got {len(tree.children)}")
    done = [complete_repr(k, c) for k, c in zip(kids, tree.children)]
    done += [default_repr(k) for k in kids[len(tree.children):]]
    out = ReprTree(tree.name, tuple(done))
    encoder(t, out)  # validates the attribute requirements
    return out


# ---------------------------------------------------------------------------
# Encoders
# ---------------------------------------------------------------------------

def cindex(t: TypeExpr) -> CIndex:
    if isinstance(t, BoolT):
        return CIndex(0, 1)
    if isinstance(t, IntT):
        return CIndex(t.lo, t.hi)
    if isinstance(t, UnnamedT):
        return CIndex(1, t.size, t.tag)
    raise InvalidRepr(f"{t} cannot index a matrix")


def cdims(t: TypeExpr) -> tuple:
    if isinstance(t, TupleT):
        return tuple(cindex(c) for c in t.components)
    return (cindex(t),)


def _cells(t: TypeExpr) -> list:
    """Values of an enumerable (product) type in matrix cell order."""
    if isinstance(t, TupleT):
        return list(itertools.product(*(enumerate_values(c) for c in t.components)))
    return enumerate_values(t)


def _blocks(c: Sequence[int], w: int) -> list:
    return [tuple(c[i:i + w]) for i in range(0, len(c), w)] if w else []


class Encoder:
    """``phi`` for one (type, representation) pair.

    ``exact`` is True when ``phi(x^g) == phi(x)^g`` holds for every symmetry,
    i.e. applying a symmetry to the representation needs no re-sorting.
    """

    exact = True
    name = "_"

    def __init__(self, t: TypeExpr, ctype):
        self.t = t
        self.ctype = ctype
        self.width = C.width(ctype)
        self.floor = C.floor(ctype)

    def encode(self, v) -> tuple:
        raise NotImplementedError

    def decode(self, c: Sequence[int]):
        raise NotImplementedError

    def ok(self, c: Sequence[int]) -> bool:
        """Structural predicate, assuming every entry is inside its domain."""
        return True

    def valid(self, c: Sequence[int]) -> bool:
        return C.in_domain(self.ctype, c) and self.ok(c)

    def __repr__(self):
        return f"<{type(self).__name__} {self.t}>"


class BoolEnc(Encoder):
    def __init__(self, t):
        super().__init__(t, CScalar(0, 1))

    def encode(self, v):
        return (int(v),)

    def decode(self, c):
        return bool(c[0])


class IntEnc(Encoder):
    def __init__(self, t):
        super().__init__(t, CScalar(t.lo, t.hi))

    def encode(self, v):
        return (v,)

    def decode(self, c):
        return c[0]


class UnnamedEnc(Encoder):
    def __init__(self, t):
        super().__init__(t, CScalar(1, t.size, t.tag))

    def encode(self, v):
        return (v.index,)

    def decode(self, c):
        return UV(self.t.tag, c[0])


SCALAR_ENCODERS = (BoolEnc, IntEnc, UnnamedEnc)


class TupleEnc(Encoder):
    name = "tuple"

    def __init__(self, t, children):
        self.children = children
        super().__init__(t, CTuple(tuple(ch.ctype for ch in children)))
        self.exact = all(ch.exact for ch in children)
        self._cuts = list(itertools.accumulate([0] + [ch.width for ch in children]))

    def encode(self, v):
        return tuple(itertools.chain.from_iterable(ch.encode(x) for ch, x in zip(self.children, v)))

    def parts(self, c):
        return [tuple(c[a:b]) for a, b in zip(self._cuts, self._cuts[1:])]

    def decode(self, c):
        return tuple(ch.decode(p) for ch, p in zip(self.children, self.parts(c)))

    def ok(self, c):
        return all(ch.ok(p) for ch, p in zip(self.children, self.parts(c)))


class MatrixEnc(Encoder):
    name = "matrix"

    def __init__(self, t, child):
        self.child = child
        super().__init__(t, CMatrix(tuple(cindex(i) for i in t.index), child.ctype))
        self.exact = child.exact

    def encode(self, v):
        return tuple(itertools.chain.from_iterable(self.child.encode(x) for x in v))

    def decode(self, c):
        return tuple(self.child.decode(b) for b in _blocks(c, self.child.width))

    def ok(self, c):
        return all(self.child.ok(b) for b in _blocks(c, self.child.width))


class _OccurrenceBase(Encoder):
    def __init__(self, t, entry: CScalar):
        elem = t.element
        if not is_enumerable_product(elem):
            raise InvalidRepr(f"occurrence representation needs an enumerable element type, not {elem}")
        self.cells = _cells(elem)
        self.pos = {x: i for i, x in enumerate(self.cells)}
        super().__init__(t, CMatrix(cdims(elem), entry))

    def encode(self, v):
        out = [0] * len(self.cells)
        for x, n in v.counts().items():
            out[self.pos[x]] = n
        return tuple(out)

    def decode(self, c):
        return MSetV.from_counts({x: n for x, n in zip(self.cells, c)})

    def ok(self, c):
        return self.t.size is None or self.t.size.allows(sum(c))


class SetOccurrence(_OccurrenceBase):
    name = "set:Occurrence"

    def __init__(self, t):
        super().__init__(t, CScalar(0, 1))


class MSetOccurrence(_OccurrenceBase):
    name = "mset:Occurrence"

    def __init__(self, t):
        super().__init__(t, CScalar(0, t.occ_bound))


def _need_size(t, exact: Optional[bool], name: str) -> int:
    size = t.size
    if size is None:
        raise InvalidRepr(f"{name} needs a size attribute on {t}")
    if exact is True and not size.exact:
        raise InvalidRepr(f"{name} needs an exact size on {t}")
    return size.n


def _ascending(blocks, strict: bool) -> bool:
    if strict:
        return all(a < b for a, b in zip(blocks, blocks[1:]))
    return all(a <= b for a, b in zip(blocks, blocks[1:]))


class SetExplicit(Encoder):
    name = "set:Explicit"
    exact = False

    def __init__(self, t, child):
        self.k = _need_size(t, True, self.name)
        self.child = child
        super().__init__(t, CMatrix((CIndex(1, self.k),), child.ctype))

    def encode(self, v):
        blocks = sorted(self.child.encode(x) for x in v)
        return tuple(itertools.chain.from_iterable(blocks))

    def decode(self, c):
        return MSetV(self.child.decode(b) for b in _blocks(c, self.child.width))

    def ok(self, c):
        blocks = _blocks(c, self.child.width)
        return all(self.child.ok(b) for b in blocks) and _ascending(blocks, True)


class _VarSizeBase(Encoder):
    """Sorted distinct blocks in a prefix, floor blocks in the unused suffix."""

    exact = False

    def _payload(self, v):
        blocks = sorted(self.child.encode(x) for x in v)
        pad = [self.child.floor] * (self.k - len(blocks))
        return tuple(itertools.chain.from_iterable(blocks + pad))

    def _payload_ok(self, payload, used):
        blocks = _blocks(payload, self.child.width)
        head, tail = blocks[:used], blocks[used:]
        return (all(self.child.ok(b) for b in head) and _ascending(head, True)
                and all(b == self.child.floor for b in tail))


class SetExplicitVarSizeMarker(_VarSizeBase):
    name = "set:ExplicitVarSizeMarker"

    def __init__(self, t, child):
        self.k = _need_size(t, None, self.name)
        self.child = child
        super().__init__(t, CTuple((CScalar(0, self.k), CMatrix((CIndex(1, self.k),), child.ctype)),
                                   ("marker", "values")))

    def encode(self, v):
        return (len(v),) + self._payload(v)

    def decode(self, c):
        return MSetV(self.child.decode(b) for b in _blocks(c[1:], self.child.width)[:c[0]])

    def ok(self, c):
        return self.t.size.allows(c[0]) and self._payload_ok(c[1:], c[0])


class SetExplicitVarSizeFlags(_VarSizeBase):
    name = "set:ExplicitVarSizeFlags"

    def __init__(self, t, child):
        self.k = _need_size(t, None, self.name)
        self.child = child
        super().__init__(t, CTuple((CMatrix((CIndex(1, self.k),), CScalar(0, 1)),
                                    CMatrix((CIndex(1, self.k),), child.ctype)),
                                   ("flags", "values")))

    def encode(self, v):
        n = len(v)
        return (1,) * n + (0,) * (self.k - n) + self._payload(v)

    def decode(self, c):
        used = sum(c[:self.k])
        return MSetV(self.child.decode(b) for b in _blocks(c[self.k:], self.child.width)[:used])

    def ok(self, c):
        flags = c[:self.k]
        used = sum(flags)
        return (all(a >= b for a, b in zip(flags, flags[1:])) and self.t.size.allows(used)
                and self._payload_ok(c[self.k:], used))


def _scalar_with_dummy(child: Encoder) -> CScalar:
    if not isinstance(child, SCALAR_ENCODERS):
        raise InvalidRepr(f"dummy representations need a scalar element type, not {child.t}")
    s = child.ctype
    return CScalar(s.lo, s.hi + 1, s.tag)


class SetExplicitVarSizeDummy(Encoder):
    name = "set:ExplicitVarSizeDummy"
    exact = False

    def __init__(self, t):
        self.k = _need_size(t, None, self.name)
        self.child = encoder(t.element, LEAF)
        entry = _scalar_with_dummy(self.child)
        self.dummy = entry.hi
        super().__init__(t, CMatrix((CIndex(1, self.k),), entry))

    def encode(self, v):
        vals = sorted(self.child.encode(x)[0] for x in v)
        return tuple(vals) + (self.dummy,) * (self.k - len(vals))

    def decode(self, c):
        return MSetV(self.child.decode((x,)) for x in c if x != self.dummy)

    def ok(self, c):
        used = [x for x in c if x != self.dummy]
        n = len(used)
        return (self.t.size.allows(n) and all(x == self.dummy for x in c[n:])
                and _ascending(list(c[:n]), True))


class MSetExplicitWithRepetition(Encoder):
    name = "mset:ExplicitWithRepetition"
    exact = False

    def __init__(self, t, child):
        self.k = _need_size(t, True, self.name)
        self.child = child
        super().__init__(t, CMatrix((CIndex(1, self.k),), child.ctype))

    def encode(self, v):
        blocks = sorted(self.child.encode(x) for x in v)
        return tuple(itertools.chain.from_iterable(blocks))

    def decode(self, c):
        return MSetV(self.child.decode(b) for b in _blocks(c, self.child.width))

    def ok(self, c):
        blocks = _blocks(c, self.child.width)
        if not (all(self.child.ok(b) for b in blocks) and _ascending(blocks, False)):
            return False
        m = self.t.occ_bound
        return all(blocks[i] < blocks[i + m] for i in range(len(blocks) - m))


class MSetExplicitFlags(Encoder):
    name = "mset:ExplicitFlags"
    exact = False

    def __init__(self, t, child):
        self.k = _need_size(t, None, self.name)
        self.child = child
        values = CMatrix((CIndex(1, self.k),), child.ctype)
        counts = CMatrix((CIndex(1, self.k),), CScalar(0, t.occ_bound))
        super().__init__(t, CTuple((values, counts), ("values", "counts")))
        self._cut = self.k * child.width

    def encode(self, v):
        counts = Counter(self.child.encode(x) for x in v)
        keys = sorted(counts)
        pad = self.k - len(keys)
        values = tuple(itertools.chain.from_iterable(keys + [self.child.floor] * pad))
        return values + tuple(counts[b] for b in keys) + (0,) * pad

    def decode(self, c):
        blocks = _blocks(c[:self._cut], self.child.width)
        out = Counter()
        for b, n in zip(blocks, c[self._cut:]):
            if n:
                out[self.child.decode(b)] += n
        return MSetV(out.elements())

    def ok(self, c):
        counts = c[self._cut:]
        used = sum(1 for n in counts if n)
        if any(n == 0 for n in counts[:used]) or not self.t.size.allows(sum(counts)):
            return False
        blocks = _blocks(c[:self._cut], self.child.width)
        head, tail = blocks[:used], blocks[used:]
        return (all(self.child.ok(b) for b in head) and _ascending(head, True)
                and all(b == self.child.floor for b in tail))


class _FunctionMatrixBase(Encoder):
    def _setup(self, t):
        if not is_enumerable_product(t.frm):
            raise InvalidRepr(f"{self.name} needs an enumerable domain, not {t.frm}")
        self.cells = _cells(t.frm)
        self.dims = cdims(t.frm)

    def _images(self, v) -> dict:
        return {a: b for a, b in v}


class FunctionAsMatrix(_FunctionMatrixBase):
    name = "function:AsMatrix"

    def __init__(self, t, child):
        if not t.total:
            raise InvalidRepr("function:AsMatrix needs a total function")
        self._setup(t)
        self.child = child
        super().__init__(t, CMatrix(self.dims, child.ctype))
        self.exact = child.exact

    def encode(self, v):
        f = self._images(v)
        return tuple(itertools.chain.from_iterable(self.child.encode(f[a]) for a in self.cells))

    def decode(self, c):
        blocks = _blocks(c, self.child.width)
        return MSetV((a, self.child.decode(b)) for a, b in zip(self.cells, blocks))

    def ok(self, c):
        return all(self.child.ok(b) for b in _blocks(c, self.child.width))


class FunctionAsMatrixPartial(_FunctionMatrixBase):
    name = "function:AsMatrixPartial"
    exact = False

    def __init__(self, t, child):
        self._setup(t)
        self.child = child
        n = len(self.cells)
        super().__init__(t, CTuple((CMatrix(self.dims, CScalar(0, 1)), CMatrix(self.dims, child.ctype)),
                                   ("flags", "values")))
        self.n = n

    def encode(self, v):
        f = self._images(v)
        flags = tuple(int(a in f) for a in self.cells)
        vals = [self.child.encode(f[a]) if a in f else self.child.floor for a in self.cells]
        return flags + tuple(itertools.chain.from_iterable(vals))

    def decode(self, c):
        blocks = _blocks(c[self.n:], self.child.width)
        return MSetV((a, self.child.decode(b)) for a, fl, b in zip(self.cells, c[:self.n], blocks) if fl)

    def ok(self, c):
        flags = c[:self.n]
        if self.t.total and not all(flags):
            return False
        blocks = _blocks(c[self.n:], self.child.width)
        return all(self.child.ok(b) if fl else b == self.child.floor for fl, b in zip(flags, blocks))


class FunctionAsMatrixDummy(_FunctionMatrixBase):
    name = "function:AsMatrixDummy"

    def __init__(self, t):
        self._setup(t)
        self.child = encoder(t.to, LEAF)
        entry = _scalar_with_dummy(self.child)
        self.dummy = entry.hi
        super().__init__(t, CMatrix(self.dims, entry))

    def encode(self, v):
        f = self._images(v)
        return tuple(self.child.encode(f[a])[0] if a in f else self.dummy for a in self.cells)

    def decode(self, c):
        return MSetV((a, self.child.decode((x,))) for a, x in zip(self.cells, c) if x != self.dummy)

    def ok(self, c):
        return not self.t.total or self.dummy not in c


class RelationAsMatrix(Encoder):
    name = "relation:AsMatrix"

    def __init__(self, t):
        if not all(is_enumerable(c) for c in t.components):
            raise InvalidRepr(f"relation:AsMatrix needs enumerable components in {t}")
        self.cells = list(itertools.product(*(enumerate_values(c) for c in t.components)))
        self.pos = {x: i for i, x in enumerate(self.cells)}
        super().__init__(t, CMatrix(tuple(cindex(c) for c in t.components), CScalar(0, 1)))

    def encode(self, v):
        out = [0] * len(self.cells)
        for x in v:
            out[self.pos[x]] = 1
        return tuple(out)

    def decode(self, c):
        return MSetV(x for x, b in zip(self.cells, c) if b)


class _Delegate(Encoder):
    """Representations whose own map is the identity on the set-of-tuples view."""

    def __init__(self, t, child):
        self.child = child
        super().__init__(t, child.ctype)
        self.exact = child.exact

    def encode(self, v):
        return self.child.encode(v)

    def decode(self, c):
        return self.child.decode(c)

    def ok(self, c):
        return self.child.ok(c) and self._semantic(self.child.decode(c))

    def _semantic(self, v) -> bool:
        return True


class FunctionAsRelation(_Delegate):
    name = "function:AsRelation"

    def _semantic(self, v):
        firsts = [a for a, _ in v]
        if len(set(firsts)) != len(firsts):
            return False
        return not self.t.total or len(firsts) == cardinality(self.t.frm)


class RelationAsSet(_Delegate):
    name = "relation:AsSet"


class PartitionAsSet(_Delegate):
    name = "partition:AsSet"

    def _semantic(self, v):
        seen = []
        for cell in v:
            if len(cell) == 0:
                return False
            seen.extend(cell)
        universe = enumerate_values(self.t.frm)
        return len(seen) == len(universe) and set(seen) == set(universe)


class PartitionOccurrence(Encoder):
    name = "partition:Occurrence"
    exact = False

    def __init__(self, t):
        self.cells = enumerate_values(t.frm)
        self.pos = {x: i for i, x in enumerate(self.cells)}
        top = t.num_parts.n if t.num_parts else len(self.cells)
        super().__init__(t, CMatrix((cindex(t.frm),), CScalar(1, max(1, min(top, len(self.cells))))))

    def encode(self, v):
        out = [0] * len(self.cells)
        firsts = sorted((min(self.pos[x] for x in cell), cell) for cell in v)
        for label, (_, cell) in enumerate(firsts, 1):
            for x in cell:
                out[self.pos[x]] = label
        return tuple(out)

    def decode(self, c):
        groups: dict = {}
        for x, label in zip(self.cells, c):
            groups.setdefault(label, []).append(x)
        return MSetV(MSetV(g) for g in groups.values())

    def ok(self, c):
        top = 0
        for label in c:
            if label > top + 1:
                return False
            top = max(top, label)
        return self.t.num_parts is None or self.t.num_parts.allows(top)


class SequenceExplicitBounded(Encoder):
    name = "sequence:ExplicitBounded"
    exact = False

    def __init__(self, t, child):
        self.k = t.max_len
        self.child = child
        super().__init__(t, CTuple((CScalar(0, self.k), CMatrix((CIndex(1, self.k),), child.ctype)),
                                   ("length", "values")))

    def encode(self, v):
        pad = [self.child.floor] * (self.k - len(v))
        blocks = [self.child.encode(x) for x in v] + pad
        return (len(v),) + tuple(itertools.chain.from_iterable(blocks))

    def decode(self, c):
        return tuple(self.child.decode(b) for b in _blocks(c[1:], self.child.width)[:c[0]])

    def ok(self, c):
        blocks = _blocks(c[1:], self.child.width)
        n = c[0]
        return (all(self.child.ok(b) for b in blocks[:n])
                and all(b == self.child.floor for b in blocks[n:]))


_BUILDERS = {
    "set:Occurrence": lambda t, kids: SetOccurrence(t),
    "set:Explicit": lambda t, kids: SetExplicit(t, *kids),
    "set:ExplicitVarSizeMarker": lambda t, kids: SetExplicitVarSizeMarker(t, *kids),
    "set:ExplicitVarSizeFlags": lambda t, kids: SetExplicitVarSizeFlags(t, *kids),
    "set:ExplicitVarSizeDummy": lambda t, kids: SetExplicitVarSizeDummy(t),
    "mset:Occurrence": lambda t, kids: MSetOccurrence(t),
    "mset:ExplicitWithRepetition": lambda t, kids: MSetExplicitWithRepetition(t, *kids),
    "mset:ExplicitFlags": lambda t, kids: MSetExplicitFlags(t, *kids),
    "function:AsMatrix": lambda t, kids: FunctionAsMatrix(t, *kids),
    "function:AsMatrixPartial": lambda t, kids: FunctionAsMatrixPartial(t, *kids),
    "function:AsMatrixDummy": lambda t, kids: FunctionAsMatrixDummy(t),
    "function:AsRelation": lambda t, kids: FunctionAsRelation(t, *kids),
    "relation:AsMatrix": lambda t, kids: RelationAsMatrix(t),
    "relation:AsSet": lambda t, kids: RelationAsSet(t, *kids),
    "partition:Occurrence": lambda t, kids: PartitionOccurrence(t),
    "partition:AsSet": lambda t, kids: PartitionAsSet(t, *kids),
    "sequence:ExplicitBounded": lambda t, kids: SequenceExplicitBounded(t, *kids),
}


@functools.lru_cache(maxsize=None)
def encoder(t: TypeExpr, tree: Optional[ReprTree] = None) -> Encoder:
    """Build (and cache) the encoder for ``t`` under a representation tree."""
    if tree is None:
        tree = default_repr(t)
    if isinstance(t, BoolT):
        return BoolEnc(t)
    if isinstance(t, IntT):
        if t.lo is None or t.hi is None:
            raise InvalidRepr(f"{t} has no finite range")
        return IntEnc(t)
    if isinstance(t, UnnamedT):
        return UnnamedEnc(t)
    kids_t = _child_types(t, tree.name)
    kids_r = list(tree.children) + [None] * (len(kids_t) - len(tree.children))
    kids = [encoder(kt, kr) for kt, kr in zip(kids_t, kids_r)]
    if isinstance(t, TupleT):
        return TupleEnc(t, kids)
    if isinstance(t, MatrixT):
        return MatrixEnc(t, kids[0])
    if tree.name.split(":")[0] != _kind(t):
        raise InvalidRepr(f"representation {tree.name} does not fit {t}")
    try:
        build = _BUILDERS[tree.name]
    except KeyError:
        raise InvalidRepr(f"unknown representation {tree.name}") from None
    return build(t, kids)


def _enc(t: TypeExpr, r) -> Encoder:
    if r is None or isinstance(r, str):
        r = complete_repr(t, r)
    return encoder(t, r)


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def concrete_type_of(t: TypeExpr, r=None):
    return _enc(t, r).ctype


def phi(v, t: TypeExpr, r=None) -> tuple:
    """Flattened representation of ``v``."""
    require_value(v, t)
    return _enc(t, r).encode(v)


def phi_nested(v, t: TypeExpr, r=None):
    enc = _enc(t, r)
    return C.nest(enc.ctype, phi(v, t, r))


def structural_ok(c: Sequence[int], t: TypeExpr, r=None) -> bool:
    """The structural predicate: True iff ``c`` is the image of some value."""
    return _enc(t, r).valid(tuple(c))


def phi_inverse(c, t: TypeExpr, r=None):
    """Abstract value represented by ``c`` (flat tuple or nested lists)."""
    enc = _enc(t, r)
    if not _is_flat(c):
        c = C.flatten(enc.ctype, c)
    c = tuple(c)
    if not enc.valid(c):
        raise NotInImage(f"{list(c)} does not represent a value of {t}")
    return enc.decode(c)


def _is_flat(c) -> bool:
    return all(isinstance(x, int) for x in c)


def rep_less(a, b, t: TypeExpr, r=None) -> Ordering:
    """Representation-dependent order: lex order of the flattened images."""
    enc = _enc(t, r)
    require_value(a, t)
    require_value(b, t)
    return Ordering.of(enc.encode(a), enc.encode(b))


def rep_compare_nested(a, b, t: TypeExpr, r=None) -> Ordering:
    """Same order computed on the nested (unflattened) images."""
    enc = _enc(t, r)

    def cmp(x, y):
        if isinstance(x, list):
            for p, q in zip(x, y):
                o = cmp(p, q)
                if o:
                    return o
            return Ordering.EQ
        return Ordering.of(x, y)

    return cmp(C.nest(enc.ctype, enc.encode(a)), C.nest(enc.ctype, enc.encode(b)))


def transform_concrete(c, g, t: TypeExpr, r=None) -> tuple:
    """Apply ``g`` to a concrete value without re-sorting anything."""
    enc = _enc(t, r)
    if c and not _is_flat(c):
        c = C.flatten(enc.ctype, c)
    if len(c) != enc.width:
        raise ValueError(f"expected {enc.width} entries, got {len(c)}")
    return C.transform(enc.ctype, tuple(c), g)


@dataclass
class DelayedReport:
    """Outcome of checking ``phi(x^g) <=lex phi(x)^g`` over a value space."""

    checked: int = 0
    violations: list = field(default_factory=list)
    num_violations: int = 0
    equality_holds: bool = True

    @property
    def ok(self) -> bool:
        return self.num_violations == 0


def check_delayed_condition(t: TypeExpr, r=None, group=None, cap: int = DEFAULT_CAP,
                            descending: bool = False, max_violations: int = 50) -> DelayedReport:
    """Exhaustively test the delayed-application condition.

    ``group`` defaults to the full symmetric group on every tag of ``t``.
    ``descending`` compares with the entry order reversed; it exists to show
    that the condition depends on using the ascending order.
    """
    enc = _enc(t, r)
    if group is None:
        group = symmetric_group(sorted(tags_of(t).items()))
    group = [g for g in group if not g.is_identity()]
    report = DelayedReport()
    values = enumerate_values(t, cap)
    encoded = {v: enc.encode(v) for v in values}
    for g in group:
        plan = C.transform_plan(enc.ctype, g)
        for x in values:
            lhs = encoded[act(x, g, t)]
            rhs = C.apply_plan(encoded[x], plan, enc.ctype)
            report.checked += 1
            if lhs != rhs:
                report.equality_holds = False
                if C.lex_compare(lhs, rhs, descending) is Ordering.GT:
                    report.num_violations += 1
                    if len(report.violations) < max_violations:
                        report.violations.append((x, g, lhs, rhs))
    return report
