"""Volpert graph and Volpert indices of species and reaction steps."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .network import ReactionNetwork, SpeciesSet

INF = math.inf


@dataclass(frozen=True)
class VolpertGraph:
    """Bipartite species/step digraph.

    ``species_out[m]`` lists ``(r, multiplicity)`` for edges species m -> step r
    and ``step_out[r]`` lists ``(m, multiplicity)`` for edges step r -> species m,
    both in ascending ordinal order.
    """

    species_out: tuple[tuple[tuple[int, int], ...], ...]
    step_out: tuple[tuple[tuple[int, int], ...], ...]

    def edges(self) -> list[tuple[str, int, int, int]]:
        """Flat edge list of ``(kind, source, target, multiplicity)``."""
        out = [("species->step", m, r, k) for m, adj in enumerate(self.species_out) for r, k in adj]
        out += [("step->species", r, m, k) for r, adj in enumerate(self.step_out) for m, k in adj]
        return out


def build_volpert_graph(net: ReactionNetwork) -> VolpertGraph:
    species_out: list[list[tuple[int, int]]] = [[] for _ in range(net.M)]
    step_out = []
    for step in net.steps:
        for m in sorted(step.reactants):
            species_out[m].append((step.ordinal, step.reactants[m]))
        step_out.append(tuple((m, step.products[m]) for m in sorted(step.products)))
    return VolpertGraph(tuple(tuple(a) for a in species_out), tuple(step_out))


@dataclass(frozen=True)
class VolpertIndexing:
    species_index: tuple[int | float, ...]
    step_index: tuple[int | float, ...]
    initial: SpeciesSet
    zero_complex_active: bool

    @property
    def all_finite(self) -> bool:
        return INF not in self.species_index

    @property
    def max_species_index(self):
        return max(self.species_index)

    @property
    def max_step_index(self):
        return max(self.step_index)

    def to_json(self) -> dict:
        net = self.initial.network
        enc = _encode
        return {
            "species": {sp.name: enc(i) for sp, i in zip(net.species, self.species_index)},
            "steps": [enc(i) for i in self.step_index],
        }


def _encode(value):
    return "inf" if value == INF else value


def volpert_index(net: ReactionNetwork, initial: SpeciesSet) -> VolpertIndexing:
    """Index every species and step by its production distance from ``initial``.

    A step's index is the largest index among its reactants (0 for a step
    leaving the zero complex); a species outside ``initial`` gets one more
    than the smallest index of a step producing it.  Levels are assigned
    layer by layer, so the loop runs at most ``M + R`` times.
    """
    if initial.network.tag != net.tag:
        raise ValueError("initial set belongs to another network")
    species_index: list[int | float] = [INF] * net.M
    step_index: list[int | float] = [INF] * net.R
    for m in initial:
        species_index[m] = 0
    available = initial.mask
    pending = list(range(net.R))
    reac, prod = net.reactant_masks, net.product_masks
    level = 0
    while pending:
        fired = [r for r in pending if reac[r] & ~available == 0]
        if not fired:
            break
        fresh = 0
        for r in fired:
            step_index[r] = level
            fresh |= prod[r]
        fresh &= ~available
        available |= fresh
        m = 0
        while fresh >> m:
            if fresh >> m & 1:
                species_index[m] = level + 1
            m += 1
        pending = [r for r in pending if step_index[r] == INF]
        level += 1
    zero_active = any(mask == 0 for mask in reac)
    return VolpertIndexing(tuple(species_index), tuple(step_index), initial, zero_active)


class Closure:
    """Fast reachability closure on species bit masks for one network.

    Used by the enumeration engines, which only need to know whether every
    species receives a finite index.
    """

    def __init__(self, net: ReactionNetwork):
        self.full = net.full_mask
        self.steps = [(net.reactant_masks[r], net.product_masks[r]) for r in range(net.R)]
        self.calls = 0

    def reach(self, mask: int) -> int:
        available = mask
        pending = self.steps
        while True:
            rest = []
            grew = False
            for step in pending:
                if step[0] & ~available:
                    rest.append(step)
                else:
                    if step[1] & ~available:
                        available |= step[1]
                        grew = True
            if not grew or not rest:
                return available
            pending = rest

    def complete(self, mask: int) -> bool:
        self.calls += 1
        return self.reach(mask) == self.full


def finite_indices(net: ReactionNetwork, initial: SpeciesSet) -> bool:
    """True iff every species gets a finite Volpert index from ``initial``."""
    return volpert_index(net, initial).all_finite
