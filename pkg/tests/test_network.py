from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from vindex import (
    NoAtomsError,
    ParseError,
    UnknownSpeciesError,
    atomic_saving,
    atoms_present,
    format_network,
    parse_network,
)
from vindex.generate import GeneratorParams, generate_network
from vindex.minimal import powerset_base
from vindex.network import count_covering_subsets, network_to_json, reactant_species


def test_michaelis_menten_structure(mm):
    assert [sp.name for sp in mm.species] == ["E", "S", "C", "P"]
    assert mm.R == 3
    assert mm.alpha() == [[1, 0, 0], [1, 0, 0], [0, 1, 1], [0, 0, 0]]
    assert mm.beta() == [[0, 1, 1], [0, 1, 0], [1, 0, 0], [0, 0, 1]]


def test_reversible_expands_forward_then_backward():
    net = parse_network("A + B <=> C\n")
    assert [s.source for s in net.steps] == ["A + B -> C", "C -> A + B"]


def test_coefficients_and_zero_complex():
    net = parse_network("2 A + B -> 0\n0 -> A")
    assert net.steps[0].reactants == {0: 2, 1: 1}
    assert net.steps[0].products == {}
    assert net.steps[1].reactants == {}


def test_comments_and_blank_lines():
    net = parse_network("# header\n\nA -> B  # trailing\n")
    assert net.M == 2 and net.R == 1


def test_species_header_fixes_order():
    net = parse_network("species: B, A\nA -> B")
    assert [sp.name for sp in net.species] == ["B", "A"]
    with pytest.raises(ParseError):
        parse_network("species: A\nA -> B")


@pytest.mark.parametrize("text", ["A -> ", "A B -> C", "A + -> B", "A -> B -> C", "0 A -> B", "A => B"])
def test_parse_errors_carry_position(text):
    with pytest.raises(ParseError) as info:
        parse_network(text)
    assert info.value.line == 1


def test_charge_plus_belongs_to_name():
    net = parse_network("H+ + OH- -> H2O")
    assert [sp.name for sp in net.species] == ["H+", "OH-", "H2O"]


def test_unknown_species():
    net = parse_network("A -> B")
    with pytest.raises(UnknownSpeciesError):
        net.species_set(["A", "Z"])


def test_round_trip_bundled(mm, ek, mapk, zero):
    for net in (mm, ek, mapk, zero):
        again = parse_network(format_network(net))
        assert format_network(again) == format_network(net)
        assert again.tag == net.tag


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 9), st.integers(1, 12), st.sampled_from([0, 0, 3]))
def test_round_trip_random(seed, m, r, atoms):
    net = generate_network(GeneratorParams(m, r, atoms=atoms), seed)
    again = parse_network(format_network(net))
    assert network_to_json(again) == network_to_json(net)


def test_species_set_algebra(mm):
    a = mm.species_set(["E", "S"])
    b = mm.species_set(["S", "C"])
    assert (a | b).names() == ["E", "S", "C"]
    assert (a & b).names() == ["S"]
    assert (a - b).names() == ["E"]
    assert mm.species_set(["S"]) < a and not b <= a
    assert "E" in a and 2 not in a
    assert a.bits() == (1, 1, 0, 0)


def test_reactant_species_and_base(mm):
    assert reactant_species(mm).names() == ["E", "S", "C"]
    assert powerset_base(mm, ["C"]).names() == ["E", "S"]


def test_emanuel_knorre_atoms(ek):
    assert ek.atoms == ("C", "Cl", "H")
    assert atoms_present(ek, ["CH4", "Cl2"])
    assert not atoms_present(ek, ["Cl2", "Cl*"])
    # tokens outside the network are read as formulas
    assert atoms_present(ek, ["HCl", "C"])


def _covering_by_scan(net):
    atoms = set(net.atoms)
    count = 0
    for k in range(1, net.M + 1):
        for combo in combinations(net.species, k):
            if set().union(*(sp.composition for sp in combo)) >= atoms:
                count += 1
    return count


def test_saving_emanuel_knorre(ek):
    assert count_covering_subsets(ek) == _covering_by_scan(ek) == 53
    assert atomic_saving(ek) == Fraction(53, 63)


def test_saving_small_cases():
    assert atomic_saving(parse_network("CH4 -> C + 2 H2")) == Fraction(5, 7)
    assert atomic_saving(parse_network("CO2 -> CO2")) == 1
    assert atomic_saving(parse_network("H2 -> O2")) == Fraction(1, 3)
    with pytest.raises(NoAtomsError):
        atomic_saving(parse_network("E -> X1"))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 9))
def test_saving_matches_scan(seed, m):
    net = generate_network(GeneratorParams(m, 6, atoms=3), seed)
    assert count_covering_subsets(net) == _covering_by_scan(net)
