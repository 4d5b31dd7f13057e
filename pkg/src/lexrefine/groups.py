"""Permutations of unnamed-type values and brute-force orbits.

Composition follows the right-action convention used for values: ``g * h``
means "apply ``g``, then ``h``", so ``act(act(v, g), h) == act(v, g * h)``.
"""

from __future__ import annotations

import enum
import functools
import itertools
import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .errors import SizeOverflow
from .types import DEFAULT_CAP, TypeExpr, act, enumerate_values, static_key_fn

DEFAULT_CLOSURE_CAP = 100_000
DEFAULT_ALL_CAP = 40_320  # 8!


@dataclass(frozen=True)
class TaggedPerm:
    """A permutation of ``1_tag .. n_tag``; ``images[i-1]`` is the image of ``i``."""

    tag: str
    images: tuple

    def __post_init__(self):
        if sorted(self.images) != list(range(1, len(self.images) + 1)):
            raise ValueError(f"{self.images} is not a permutation of 1..{len(self.images)}")

    @classmethod
    def identity(cls, tag: str, n: int) -> "TaggedPerm":
        return cls(tag, tuple(range(1, n + 1)))

    @classmethod
    def from_cycles(cls, tag: str, n: int, *cycles) -> "TaggedPerm":
        images = list(range(1, n + 1))
        for cyc in cycles:
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                images[a - 1] = b
        return cls(tag, tuple(images))

    @property
    def size(self) -> int:
        return len(self.images)

    def is_identity(self) -> bool:
        return all(x == i for i, x in enumerate(self.images, 1))

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def inverse(self) -> "TaggedPerm":
        inv = [0] * len(self.images)
        for i, x in enumerate(self.images, 1):
            inv[x - 1] = i
        return TaggedPerm(self.tag, tuple(inv))

    def then(self, other: "TaggedPerm") -> "TaggedPerm":
        return TaggedPerm(self.tag, tuple(other(x) for x in self.images))

    def cycles(self) -> list:
        seen, out = set(), []
        for i in range(1, self.size + 1):
            if i in seen or self(i) == i:
                continue
            cyc, j = [], i
            while j not in seen:
                seen.add(j)
                cyc.append(j)
                j = self(j)
            out.append(tuple(cyc))
        return out

    def __str__(self):
        cyc = self.cycles()
        if not cyc:
            return "()"
        return "".join("(" + " ".join(f"{i}_{self.tag}" for i in c) + ")" for c in cyc)


@dataclass(frozen=True)
class SymCombo:
    """One permutation per unnamed tag; tags not listed are fixed.

    Identity entries are dropped on construction so equal combos compare equal.
    """

    perms: tuple = ()

    def __init__(self, perms: Iterable[TaggedPerm] = ()):
        kept = sorted((p for p in perms if not p.is_identity()), key=lambda p: p.tag)
        if len({p.tag for p in kept}) != len(kept):
            raise ValueError("a combo holds at most one permutation per tag")
        object.__setattr__(self, "perms", tuple(kept))

    @classmethod
    def of(cls, *perms: TaggedPerm) -> "SymCombo":
        return cls(perms)

    def tags(self) -> list:
        return [p.tag for p in self.perms]

    def get(self, tag: str) -> Optional[TaggedPerm]:
        for p in self.perms:
            if p.tag == tag:
                return p
        return None

    def size(self, tag: str) -> Optional[int]:
        p = self.get(tag)
        return p.size if p else None

    def image(self, tag: str, i: int) -> int:
        p = self.get(tag)
        return p(i) if p else i

    def preimage(self, tag: str, i: int) -> int:
        p = self.get(tag)
        return p.inverse()(i) if p else i

    def is_identity(self) -> bool:
        return not self.perms

    def inverse(self) -> "SymCombo":
        return SymCombo(p.inverse() for p in self.perms)

    def __mul__(self, other: "SymCombo") -> "SymCombo":
        tags = sorted(set(self.tags()) | set(other.tags()))
        out = []
        for tag in tags:
            a, b = self.get(tag), other.get(tag)
            if a is None:
                out.append(b)
            elif b is None:
                out.append(a)
            else:
                out.append(a.then(b))
        return SymCombo(out)

    def __str__(self):
        return "".join(str(p) for p in self.perms) or "id"


IDENTITY = SymCombo()


class GenStrategy(enum.Enum):
    CONSECUTIVE = "consecutive"
    ALLPAIRS = "allpairs"
    ALL = "all"


def _transposition(tag: str, n: int, a: int, b: int) -> TaggedPerm:
    return TaggedPerm.from_cycles(tag, n, (a, b))


def generators(tags, strategy, combine: str = "independently",
               all_cap: int = DEFAULT_ALL_CAP) -> list:
    """Symmetry combos to post lex-leader constraints for.

    ``tags`` is a sequence of ``(tag, size)``.  Each combo is non-trivial on
    exactly one tag.  Order: by tag as given, then lexicographic on images.
    """
    strategy = GenStrategy(strategy)
    if combine != "independently":
        raise ValueError(f"unsupported combination {combine!r}")
    out = []
    for tag, n in tags:
        if n < 1:
            raise ValueError(f"unnamed type {tag} has size {n}")
        if strategy is GenStrategy.CONSECUTIVE:
            perms = [_transposition(tag, n, i, i + 1) for i in range(1, n)]
        elif strategy is GenStrategy.ALLPAIRS:
            perms = [_transposition(tag, n, a, b)
                     for a, b in itertools.combinations(range(1, n + 1), 2)]
        else:
            if math.factorial(n) > all_cap:
                raise SizeOverflow(f"{n}! permutations of {tag} exceed the cap {all_cap}")
            perms = [TaggedPerm(tag, p) for p in itertools.permutations(range(1, n + 1))]
        perms = sorted((p for p in perms if not p.is_identity()), key=lambda p: p.images)
        out.extend(SymCombo.of(p) for p in perms)
    return out


def group_closure(gens: Iterable[SymCombo], cap: int = DEFAULT_CLOSURE_CAP) -> list:
    """Every element of the group generated by ``gens``, identity first."""
    gens = list(gens)
    seen = {IDENTITY}
    order = [IDENTITY]
    queue = deque([IDENTITY])
    while queue:
        x = queue.popleft()
        for g in gens:
            y = x * g
            if y not in seen:
                if len(seen) >= cap:
                    raise SizeOverflow(f"group closure exceeds {cap} elements")
                seen.add(y)
                order.append(y)
                queue.append(y)
    return order


def symmetric_group(tags, cap: int = DEFAULT_CLOSURE_CAP) -> list:
    """The direct product of the full symmetric groups on every tag."""
    return group_closure(generators(tags, GenStrategy.CONSECUTIVE), cap)


def orbits(t: TypeExpr, group, cap: int = DEFAULT_CAP, values=None) -> list:
    """Partition values of ``t`` into orbits under ``group``.

    ``group`` may be a whole group or just generators: orbits are grown by
    breadth-first search, which yields the same partition.  ``values``
    restricts the computation to a ``group``-closed subset.
    """
    key = static_key_fn(t)
    if values is None:
        values = enumerate_values(t, cap)
    group = [g for g in group if not g.is_identity()]
    seen = set()
    out = []
    for v in values:
        if v in seen:
            continue
        seen.add(v)
        orbit = [v]
        queue = deque([v])
        while queue:
            x = queue.popleft()
            for g in group:
                y = act(x, g, t)
                if y not in seen:
                    seen.add(y)
                    orbit.append(y)
                    queue.append(y)
        orbit.sort(key=key)
        out.append(orbit)
    out.sort(key=lambda o: key(o[0]))
    return out


def orbit_minimum(orbit, less: Callable):
    """Least element of ``orbit`` under a three-way comparison ``less(a, b)``."""
    return min(orbit, key=functools.cmp_to_key(lambda a, b: int(less(a, b))))
