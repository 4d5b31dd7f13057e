import itertools

import pytest

from conftest import T, perm, us
from lexrefine.errors import SizeOverflow
from lexrefine.groups import (
    IDENTITY, GenStrategy, SymCombo, TaggedPerm, generators, group_closure, orbit_minimum,
    orbits, symmetric_group,
)
from lexrefine.reprs import rep_less
from lexrefine.types import SetT, Size, UV, enumerate_values


def test_tagged_perm_basics():
    p = TaggedPerm.from_cycles("T", 4, (1, 2), (3, 4))
    assert p.images == (2, 1, 4, 3)
    assert p(1) == 2 and p.inverse() == p
    assert TaggedPerm.identity("T", 3).is_identity()
    with pytest.raises(ValueError):
        TaggedPerm("T", (1, 1, 2))


def test_combo_composition_and_inverse():
    g = perm(3, (1, 2))
    h = perm(3, (2, 3))
    gh = g * h                      # first g, then h
    assert gh.image("T", 1) == 3
    assert (gh * gh.inverse()).is_identity()
    assert (g * IDENTITY) == g


@pytest.mark.parametrize("strategy,n,count", [
    ("consecutive", 4, 3), ("allpairs", 4, 6), ("all", 4, 23),
    ("consecutive", 1, 0), ("allpairs", 6, 15), ("all", 3, 5),
])
def test_generator_counts(strategy, n, count):
    gens = generators([("T", n)], strategy)
    assert len(gens) == count
    assert all(not g.is_identity() for g in gens)


def test_generators_are_per_tag_and_ordered():
    gens = generators([("T", 3), ("U", 2)], GenStrategy.CONSECUTIVE)
    assert [g.tags() for g in gens] == [["T"], ["T"], ["U"]]
    # lexicographic on the image tuples
    assert gens[0].get("T").images == (1, 3, 2)
    assert gens[1].get("T").images == (2, 1, 3)


def test_all_strategy_respects_cap():
    with pytest.raises(SizeOverflow):
        generators([("T", 9)], "all")
    assert len(generators([("T", 4)], "all", all_cap=24)) == 23


@pytest.mark.parametrize("strategy", ["consecutive", "allpairs"])
def test_closure_is_full_symmetric_group(strategy):
    assert len(group_closure(generators([("T", 4)], strategy))) == 24
    assert len(group_closure(generators([("T", 3), ("U", 2)], strategy))) == 12
    assert len(symmetric_group([("T", 5)])) == 120


def _canonical(v, n):
    """Orbit representative by brute force over all relabellings."""
    best = None
    for p in itertools.permutations(range(1, n + 1)):
        img = sorted(tuple(sorted(p[x.index - 1] for x in inner)) for inner in v)
        best = img if best is None or img < best else best
    return tuple(best)


def test_orbits_match_independent_canonical_forms():
    t = SetT(Size(3), SetT(Size(2), T(4)))
    orbs = orbits(t, symmetric_group([("T", 4)]))
    values = enumerate_values(t)
    assert sum(map(len, orbs)) == len(values) == 20
    classes = {_canonical(v, 4) for v in values}
    assert len(orbs) == len(classes) == 3
    for o in orbs:
        assert len({_canonical(v, 4) for v in o}) == 1


def test_orbits_from_generators_equal_orbits_from_group():
    t = SetT(Size(2), SetT(Size(2), T(4)))
    a = orbits(t, symmetric_group([("T", 4)]))
    b = orbits(t, generators([("T", 4)], "consecutive"))
    assert a == b


def test_orbit_minimum_depends_on_representation():
    t = SetT(Size(3), T(4))
    [orbit] = orbits(t, symmetric_group([("T", 4)]))
    occ = orbit_minimum(orbit, lambda a, b: rep_less(a, b, t, "set:Occurrence"))
    exp = orbit_minimum(orbit, lambda a, b: rep_less(a, b, t, "set:Explicit"))
    assert occ == us(2, 3, 4)
    assert exp == us(1, 2, 3)


def test_combo_ignores_identity_entries():
    c = SymCombo.of(TaggedPerm.identity("T", 3), TaggedPerm.from_cycles("U", 2, (1, 2)))
    assert c.tags() == ["U"]
    assert c.image("T", 2) == 2
    assert UV("T", 1) != UV("U", 1)
