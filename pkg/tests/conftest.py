import random

import pytest

from vindex import bundled
from vindex.generate import generate_network, random_params

# the 17 minimal initial sets of the MAPK cascade
MAPK_SETS = [
    {"X10", "X4"}, {"X10", "X6"}, {"X10", "X7"},
    {"X11", "X4"}, {"X11", "X6"}, {"X11", "X7"},
    {"X4", "X8"}, {"X4", "X9"}, {"X5", "X6"}, {"X5", "X7"},
    {"X6", "X8"}, {"X6", "X9"}, {"X7", "X8"}, {"X7", "X9"},
    {"X1", "X4", "X5"}, {"X2", "X4", "X5"}, {"X3", "X4", "X5"},
]


@pytest.fixture(scope="session")
def mm():
    return bundled("michaelis-menten")


@pytest.fixture(scope="session")
def ek():
    return bundled("emanuel-knorre")


@pytest.fixture(scope="session")
def mapk():
    return bundled("mapk-biomd26")


@pytest.fixture(scope="session")
def zero():
    return bundled("zero-complex")


def random_networks(count, seed, max_species=10, max_steps=15, atoms=0):
    rng = random.Random(seed)
    for i in range(count):
        params = random_params(rng, max_species, max_steps, atoms=atoms)
        yield generate_network(params, seed * 100003 + i)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
