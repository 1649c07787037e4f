"""Antichains of species sets and the reduced brute-force search."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

from .network import (
    ReactionNetwork,
    SpeciesSet,
    VindexError,
    covers_atoms,
    reactant_species,
)
from .volpert import Closure

DEFAULT_BRUTE_LIMIT = 25


class BaseTooLarge(VindexError):
    pass


class Engine(str, enum.Enum):
    BRUTE = "brute"
    ILP = "ilp"
    LEX = "lex"


def _popcount(x: int) -> int:
    return bin(x).count("1")


def canonical_key(mask: int) -> tuple[int, int]:
    """Sort key: cardinality first, then the mask read as a binary number."""
    return (_popcount(mask), mask)


def minimal_masks(masks: Iterable[int]) -> list[int]:
    """Inclusion-minimal members of ``masks``, deduplicated, canonically sorted."""
    kept: list[int] = []
    for mask in sorted(set(masks), key=canonical_key):
        # anything that could be a subset of mask precedes it in this order
        if not any(k & ~mask == 0 for k in kept):
            kept.append(mask)
    return kept


@dataclass(frozen=True)
class MinimalFamily:
    """A canonically sorted antichain of species sets."""

    sets: tuple[SpeciesSet, ...]

    def __post_init__(self):
        masks = [s.mask for s in self.sets]
        if masks != minimal_masks(masks):
            raise ValueError("not a canonically sorted antichain")

    @classmethod
    def from_masks(cls, net: ReactionNetwork, masks: Iterable[int]) -> MinimalFamily:
        return cls(tuple(SpeciesSet(m, net) for m in minimal_masks(masks)))

    def __len__(self) -> int:
        return len(self.sets)

    def __iter__(self):
        return iter(self.sets)

    def __getitem__(self, i):
        return self.sets[i]

    @property
    def masks(self) -> list[int]:
        return [s.mask for s in self.sets]

    def names(self) -> list[list[str]]:
        return [s.names() for s in self.sets]

    def as_name_sets(self) -> set[frozenset[str]]:
        return {frozenset(s.names()) for s in self.sets}


def minimal_ones(family: Sequence[SpeciesSet]) -> MinimalFamily:
    """Keep the members with no strict subset in ``family``; duplicates collapse."""
    family = list(family)
    if not family:
        return MinimalFamily(())
    net = family[0].network
    for s in family[1:]:
        if s.network.tag != net.tag:
            raise ValueError("species sets belong to different networks")
    return MinimalFamily.from_masks(net, (s.mask for s in family))


@dataclass
class SearchOptions:
    intermediates: frozenset[str] = field(default_factory=frozenset)
    atomic: bool = False
    cap: int | None = None
    engine: Engine = Engine.BRUTE
    # engine specific knobs
    brute_limit: int | None = DEFAULT_BRUTE_LIMIT
    order: str = "revlex"
    reorder: str = "input"
    shards: int = 1
    node_cap: int | None = None

    def __post_init__(self):
        self.intermediates = frozenset(self.intermediates)
        self.engine = Engine(self.engine)
        if self.cap is not None and self.cap < 1:
            raise ValueError("cardinality cap must be positive")


def powerset_base(net: ReactionNetwork, intermediates: SpeciesSet | Iterable[str] = ()) -> SpeciesSet:
    """Reactant species minus the user's intermediates."""
    if not isinstance(intermediates, SpeciesSet):
        intermediates = net.species_set(intermediates)
    return reactant_species(net) - intermediates


def _base_ordinals(mask: int) -> list[int]:
    return [m for m in range(mask.bit_length()) if mask >> m & 1]


def brute_force_minimal_initials(net: ReactionNetwork, opts: SearchOptions | None = None) -> MinimalFamily:
    """Scan subsets of the powerset base by increasing size.

    Supersets of accepted sets are skipped; that prunes work without
    affecting the result.  The empty set is tried first: it only succeeds when
    a zero-complex step generates everything.
    """
    opts = opts or SearchOptions()
    base = _base_ordinals(powerset_base(net, opts.intermediates).mask)
    if opts.brute_limit is not None and len(base) > opts.brute_limit:
        raise BaseTooLarge(f"powerset base has {len(base)} species (limit {opts.brute_limit})")
    closure = Closure(net)
    top = len(base) if opts.cap is None else min(opts.cap, len(base))
    found: list[int] = []
    for k in range(top + 1):
        for combo in combinations(base, k):
            mask = 0
            for m in combo:
                mask |= 1 << m
            if any(f & ~mask == 0 for f in found):
                continue
            if opts.atomic and not covers_atoms(net, mask):
                continue
            if closure.complete(mask):
                found.append(mask)
    return MinimalFamily.from_masks(net, found)


def find_minimal_initials(net: ReactionNetwork, opts: SearchOptions | None = None) -> MinimalFamily:
    """Dispatch to the engine named in ``opts``."""
    opts = opts or SearchOptions()
    if opts.engine is Engine.BRUTE:
        return brute_force_minimal_initials(net, opts)
    if opts.engine is Engine.LEX:
        from .lexenum import enumerate_minimal

        return enumerate_minimal(net, opts)
    from .ilp import ilp_minimal_initials

    return ilp_minimal_initials(net, opts)


def verify_family(net: ReactionNetwork, family: MinimalFamily, atomic: bool = False) -> list[str]:
    """Soundness and minimality problems of ``family``; empty when all is well.

    With ``atomic`` the acceptance test also requires atom coverage, so a
    member is minimal when dropping any species breaks finiteness or coverage.
    """
    closure = Closure(net)

    def ok(mask: int) -> bool:
        if atomic and not covers_atoms(net, mask):
            return False
        return closure.complete(mask)

    problems = []
    for s in family:
        if not ok(s.mask):
            problems.append(f"{s.names()} is not an acceptable initial set")
            continue
        for m in s:
            if ok(s.mask & ~(1 << m)):
                problems.append(f"{s.names()} is still acceptable without {net.species[m].name}")
    return problems
