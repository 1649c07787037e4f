"""Seeded random reaction networks for oracle testing and benchmarks."""

from __future__ import annotations

import random
from math import comb
from dataclasses import dataclass

from .network import ReactionNetwork, parse_network

# element symbols handed out in this order when atoms are requested
ALPHABET = ("C", "H", "O", "N", "S", "P", "F", "K", "B", "I")

MAX_TRIES = 1000


@dataclass(frozen=True)
class GeneratorParams:
    species: int
    steps: int
    max_complex: int = 3
    atoms: int = 0
    zero_complex: bool = False

    def __post_init__(self):
        if self.species < 1 or self.steps < 1:
            raise ValueError("need at least one species and one step")
        if not 1 <= self.max_complex <= 3:
            raise ValueError("complex size must be between 1 and 3")
        if not 0 <= self.atoms <= len(ALPHABET):
            raise ValueError(f"atom alphabet has at most {len(ALPHABET)} symbols")
        if self.atoms and self.atoms > 3 * self.species:
            raise ValueError("too few species to carry that many atoms")
        if self.atoms and self.species > name_capacity(self.atoms):
            raise ValueError(f"{self.atoms} atoms give at most {name_capacity(self.atoms)} distinct formulas")


def name_capacity(atoms: int) -> int:
    """Distinct formulas with 1 to 3 elements, each counted 1 to 3 times."""
    return sum(comb(atoms, k) * 3**k for k in range(1, min(3, atoms) + 1))


def _species_names(rng: random.Random, count: int, atoms: int) -> list[str]:
    if not atoms:
        return [f"X{i + 1}" for i in range(count)]
    alphabet = ALPHABET[:atoms]
    while True:
        names: list[str] = []
        while len(names) < count:
            picked = sorted(rng.sample(alphabet, rng.randint(1, min(3, atoms))), key=alphabet.index)
            name = "".join(a + (str(k) if (k := rng.randint(1, 3)) > 1 else "") for a in picked)
            if name not in names:
                names.append(name)
        used = {a for name in names for a in alphabet if a in name}
        if used == set(alphabet):
            return names


def _complex(rng: random.Random, names: list[str], size_cap: int) -> str:
    # canonical term order, so equal complexes give equal text
    picked = sorted(rng.sample(names, rng.randint(1, min(size_cap, len(names)))), key=names.index)
    terms = []
    for name in picked:
        k = rng.choice((1, 1, 1, 2))
        terms.append(name if k == 1 else f"{k} {name}")
    return " + ".join(terms)


def generate_text(params: GeneratorParams, seed: int) -> str:
    """Network text with a species header; the same seed gives the same text.

    ``params.species`` and ``params.steps`` are upper bounds: species no
    step mentions are dropped, and tiny species counts may not admit that
    many distinct steps.  Reactant and product complexes differ, steps are
    not repeated, and at least one species is produced by some step.
    """
    rng = random.Random(seed)
    for _ in range(MAX_TRIES):
        names = _species_names(rng, params.species, params.atoms)
        steps: list[str] = []
        seen = set()
        for _ in range(50 * params.steps):
            if len(steps) == params.steps:
                break
            if params.zero_complex and rng.random() < 0.1:
                left = "0"
            else:
                left = _complex(rng, names, params.max_complex)
            right = _complex(rng, names, params.max_complex)
            if left == right or (left, right) in seen:
                continue
            seen.add((left, right))
            steps.append(f"{left} -> {right}")
        if not steps:
            continue
        used = {sp.name for sp in parse_network("\n".join(steps)).species}
        header = [n for n in names if n in used]
        text = f"# seed {seed}\nspecies: {', '.join(header)}\n" + "\n".join(steps) + "\n"
        if _acceptable(parse_network(text)):
            return text
    raise RuntimeError(f"no acceptable network after {MAX_TRIES} tries")


def _acceptable(net: ReactionNetwork) -> bool:
    return any(net.producing(m) for m in range(net.M))


def generate_network(params: GeneratorParams, seed: int) -> ReactionNetwork:
    return parse_network(generate_text(params, seed))


def random_params(rng: random.Random, max_species: int = 10, max_steps: int = 15, atoms: int = 0) -> GeneratorParams:
    """Sizes drawn uniformly, used by the property suites."""
    return GeneratorParams(rng.randint(1, max_species), rng.randint(1, max_steps), atoms=atoms)
