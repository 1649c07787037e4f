import math
import random

from hypothesis import given, settings, strategies as st

from vindex import INF, build_volpert_graph, finite_indices, parse_network, volpert_index
from vindex.generate import GeneratorParams, generate_network
from vindex.volpert import Closure


def _levels(net, names):
    """Reference indexing by repeated relaxation of the defining equations."""
    s = [0 if sp.name in names else math.inf for sp in net.species]
    while True:
        r_idx = [max((s[m] for m in step.reactants), default=0) for step in net.steps]
        new = [
            0 if net.species[m].name in names
            else min((r_idx[r] + 1 for r in range(net.R) if m in net.steps[r].products), default=math.inf)
            for m in range(net.M)
        ]
        if new == s:
            return s, r_idx
        s = new


def test_michaelis_menten_from_e_and_s(mm):
    ix = volpert_index(mm, mm.species_set(["E", "S"]))
    assert dict(zip("ESCP", ix.species_index)) == {"S": 0, "E": 0, "C": 1, "P": 2}
    assert ix.step_index == (0, 1, 1)
    assert ix.all_finite


def test_michaelis_menten_from_p(mm):
    ix = volpert_index(mm, mm.species_set(["P"]))
    assert ix.species_index == (INF, INF, INF, 0)
    assert ix.step_index == (INF, INF, INF)
    assert ix.to_json()["steps"] == ["inf"] * 3


def test_zero_complex(zero):
    ix = volpert_index(zero, zero.species_set())
    assert ix.species_index == (1,) and ix.step_index == (0,)
    assert ix.zero_complex_active


MAPK_SPECIES = {"X10": 0, "X7": 0, "X11": 1, "X5": 1, "X3": 1, "X2": 1, "X4": 1,
                "X9": 2, "X8": 2, "X1": 2, "X6": 3}
MAPK_STEPS = [0, 0, 0, 0, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 3, 3]


def test_mapk_table(mapk):
    ix = volpert_index(mapk, mapk.species_set(["X10", "X7"]))
    assert ix.to_json()["species"] == MAPK_SPECIES
    assert list(ix.step_index) == MAPK_STEPS


def test_graph_edges(mm):
    g = build_volpert_graph(mm)
    assert g.species_out[2] == ((1, 1), (2, 1))
    assert g.step_out[2] == ((0, 1), (3, 1))
    assert len(g.edges()) == 2 + 1 + 1 + 2 + 1 + 2


def test_stoichiometry_in_edges():
    g = build_volpert_graph(parse_network("2 A -> 3 B"))
    assert g.edges() == [("species->step", 0, 0, 2), ("step->species", 0, 1, 3)]


def _random_case(seed):
    rng = random.Random(seed)
    net = generate_network(GeneratorParams(rng.randint(1, 10), rng.randint(1, 15)), seed)
    mask = rng.getrandbits(net.M)
    return rng, net, mask


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_matches_relaxation_oracle(seed):
    _, net, mask = _random_case(seed)
    initial = net.from_mask(mask)
    ix = volpert_index(net, initial)
    s, r = _levels(net, set(initial.names()))
    assert list(ix.species_index) == s
    assert list(ix.step_index) == r


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_monotone_in_initial_set(seed):
    rng, net, mask = _random_case(seed)
    bigger = mask | rng.getrandbits(net.M)
    small = volpert_index(net, net.from_mask(mask)).species_index
    large = volpert_index(net, net.from_mask(bigger)).species_index
    assert all(b <= a for a, b in zip(small, large))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_finite_iff_closure_complete(seed):
    _, net, mask = _random_case(seed)
    assert finite_indices(net, net.from_mask(mask)) == Closure(net).complete(mask)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_level_bounds(seed):
    _, net, mask = _random_case(seed)
    ix = volpert_index(net, net.from_mask(mask))
    finite_s = [v for v in ix.species_index if v != INF]
    finite_r = [v for v in ix.step_index if v != INF]
    if finite_r:
        assert max(finite_r) < net.R
    if mask and finite_s:
        assert max(finite_s) <= min(net.R, net.M - 1)
    # levels are consecutive: every step level below the top is used
    assert set(finite_r) == set(range(len(set(finite_r))))
    # a finite species index is 0 or one more than some producing step
    for m, v in enumerate(ix.species_index):
        if v not in (0, INF):
            assert v - 1 in [ix.step_index[r] for r in net.producing(m)]
