from itertools import combinations

import pytest

from vindex import (
    BaseTooLarge,
    MinimalFamily,
    SearchOptions,
    brute_force_minimal_initials,
    find_minimal_initials,
    minimal_ones,
    parse_network,
    verify_family,
)
from vindex.minimal import canonical_key, minimal_masks
from vindex.volpert import Closure

from conftest import MAPK_SETS, random_networks


def _sets(family):
    return [set(s) for s in family.names()]


def test_michaelis_menten(mm):
    assert brute_force_minimal_initials(mm).names() == [["C"], ["E", "S"]]
    assert brute_force_minimal_initials(mm, SearchOptions(intermediates={"C"})).names() == [["E", "S"]]


def test_emanuel_knorre_variants(ek):
    for opts in (SearchOptions(), SearchOptions(intermediates=()), SearchOptions(atomic=True)):
        assert _sets(brute_force_minimal_initials(ek, opts)) == [{"Cl2", "CH4"}]


def test_mapk(mapk):
    fam = brute_force_minimal_initials(mapk)
    assert len(fam) == 17
    assert sorted(map(sorted, _sets(fam))) == sorted(map(sorted, MAPK_SETS))


def test_empty_set_family(zero):
    assert brute_force_minimal_initials(zero).names() == [[]]


def test_cap_restricts(mapk):
    fam = brute_force_minimal_initials(mapk, SearchOptions(cap=2))
    assert len(fam) == 14 and all(len(s) == 2 for s in fam)


def test_brute_limit(mapk):
    with pytest.raises(BaseTooLarge):
        brute_force_minimal_initials(mapk, SearchOptions(brute_limit=5))


def test_canonical_order_and_antichain(mm):
    assert minimal_masks([0b110, 0b010, 0b111, 0b001, 0b010]) == [0b001, 0b010]
    assert sorted([0b100, 0b011, 0b001], key=canonical_key) == [0b001, 0b100, 0b011]
    with pytest.raises(ValueError):
        MinimalFamily((mm.species_set(["E"]), mm.species_set(["E", "S"])))
    fam = minimal_ones([mm.species_set(["E", "S"]), mm.species_set(["C"]), mm.species_set(["E", "S", "C"])])
    assert fam.names() == [["C"], ["E", "S"]]


def test_verify_catches_problems(mm):
    bad = MinimalFamily.from_masks(mm, [mm.species_set(["C", "P"]).mask])
    assert any("without P" in p for p in verify_family(mm, bad))
    unsound = MinimalFamily.from_masks(mm, [mm.species_set(["E"]).mask])
    assert verify_family(mm, unsound)
    assert verify_family(mm, brute_force_minimal_initials(mm)) == []


def _unreduced_family(net):
    """Minimal complete sets over ALL species, with no base reduction."""
    closure = Closure(net)
    found = []
    for k in range(net.M + 1):
        for combo in combinations(range(net.M), k):
            mask = sum(1 << m for m in combo)
            if any(f & ~mask == 0 for f in found):
                continue
            if closure.complete(mask):
                found.append(mask)
    return found


def test_base_reduction_loses_nothing():
    # dropping product-only species from the search space is claimed safe;
    # checked here against the unreduced scan
    for net in random_networks(300, seed=11, max_species=8, max_steps=10):
        assert brute_force_minimal_initials(net).masks == minimal_masks(_unreduced_family(net))


def test_dispatch(mm):
    for engine in ("brute", "lex", "ilp"):
        assert find_minimal_initials(mm, SearchOptions(engine=engine)).names() == [["C"], ["E", "S"]]


def test_intermediate_can_remove_all():
    fam = brute_force_minimal_initials(parse_network("A -> B\nB -> A"), SearchOptions(intermediates={"A", "B"}))
    assert len(fam) == 0
