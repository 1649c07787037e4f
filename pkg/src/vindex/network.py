"""Reaction networks: parsing, serialization and stoichiometric structure."""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Iterable, Iterator, Mapping

from .formula import parse_formula


class VindexError(Exception):
    """Base class of every error raised by this package."""


class ParseError(VindexError, ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class UnknownSpeciesError(VindexError, ValueError):
    def __init__(self, names: Iterable[str]):
        self.names = tuple(names)
        super().__init__("unknown species: " + ", ".join(self.names))


class NoAtomsError(VindexError, ValueError):
    pass


@dataclass(frozen=True)
class Species:
    name: str
    ordinal: int
    composition: Mapping[str, int] = field(default_factory=dict)

    @property
    def opaque(self) -> bool:
        return not self.composition


@dataclass(frozen=True)
class ReactionStep:
    """One irreversible step; coefficient maps are keyed by species ordinal."""

    ordinal: int
    reactants: Mapping[int, int]
    products: Mapping[int, int]
    source: str = ""
    line: int = 0


class SpeciesSet:
    """An immutable subset of a network's species, stored as a bit mask.

    Bit ``m`` of :attr:`mask` is set iff the species with ordinal ``m`` is a
    member.  Sets from different networks never compare equal.
    """

    __slots__ = ("mask", "network")

    def __init__(self, mask: int, network: ReactionNetwork):
        if mask < 0 or mask >> network.M:
            raise ValueError(f"mask {mask:#x} does not fit {network.M} species")
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "network", network)

    def __setattr__(self, name, value):
        raise AttributeError("SpeciesSet is immutable")

    def _check(self, other: SpeciesSet) -> None:
        if self.network.tag != other.network.tag:
            raise ValueError("species sets belong to different networks")

    def __eq__(self, other):
        if not isinstance(other, SpeciesSet):
            return NotImplemented
        return self.mask == other.mask and self.network.tag == other.network.tag

    def __hash__(self):
        return hash((self.mask, self.network.tag))

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __iter__(self) -> Iterator[int]:
        mask = self.mask
        while mask:
            low = mask & -mask
            yield low.bit_length() - 1
            mask ^= low

    def __contains__(self, item) -> bool:
        if isinstance(item, str):
            item = self.network.ordinal(item)
        return bool(self.mask >> item & 1)

    def __le__(self, other: SpeciesSet) -> bool:
        self._check(other)
        return self.mask & ~other.mask == 0

    def __lt__(self, other: SpeciesSet) -> bool:
        return self <= other and self.mask != other.mask

    def __or__(self, other: SpeciesSet) -> SpeciesSet:
        self._check(other)
        return SpeciesSet(self.mask | other.mask, self.network)

    def __and__(self, other: SpeciesSet) -> SpeciesSet:
        self._check(other)
        return SpeciesSet(self.mask & other.mask, self.network)

    def __sub__(self, other: SpeciesSet) -> SpeciesSet:
        self._check(other)
        return SpeciesSet(self.mask & ~other.mask, self.network)

    def bits(self) -> tuple[int, ...]:
        """Characteristic vector in species order."""
        return tuple(self.mask >> m & 1 for m in range(self.network.M))

    def names(self) -> list[str]:
        return [self.network.species[m].name for m in self]

    def __repr__(self) -> str:
        return "SpeciesSet({" + ", ".join(self.names()) + "})"


@dataclass(frozen=True, eq=False)
class ReactionNetwork:
    species: tuple[Species, ...]
    steps: tuple[ReactionStep, ...]

    def __post_init__(self):
        if not self.species or not self.steps:
            raise ValueError("a network needs at least one species and one step")
        for m, sp in enumerate(self.species):
            if sp.ordinal != m:
                raise ValueError(f"species {sp.name!r} has ordinal {sp.ordinal}, expected {m}")
        if len({sp.name for sp in self.species}) != len(self.species):
            raise ValueError("duplicate species names")
        for r, step in enumerate(self.steps):
            if step.ordinal != r:
                raise ValueError(f"step {r} has ordinal {step.ordinal}")
            for side in (step.reactants, step.products):
                for m, coef in side.items():
                    if not 0 <= m < len(self.species):
                        raise ValueError(f"step {r} references unknown species ordinal {m}")
                    if coef <= 0:
                        raise ValueError(f"step {r} has non-positive coefficient {coef}")

    @property
    def M(self) -> int:
        return len(self.species)

    @property
    def R(self) -> int:
        return len(self.steps)

    @cached_property
    def atoms(self) -> tuple[str, ...]:
        return tuple(sorted({a for sp in self.species for a in sp.composition}))

    @cached_property
    def tag(self) -> str:
        """Fingerprint of species order and step structure."""
        digest = hashlib.sha1(format_network(self).encode()).hexdigest()
        return digest[:16]

    @cached_property
    def _index(self) -> dict[str, int]:
        return {sp.name: sp.ordinal for sp in self.species}

    def ordinal(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownSpeciesError([name]) from None

    @cached_property
    def reactant_masks(self) -> tuple[int, ...]:
        return tuple(_mask(step.reactants) for step in self.steps)

    @cached_property
    def product_masks(self) -> tuple[int, ...]:
        return tuple(_mask(step.products) for step in self.steps)

    def reactants(self, r: int) -> frozenset[int]:
        return frozenset(self.steps[r].reactants)

    def products(self, r: int) -> frozenset[int]:
        return frozenset(self.steps[r].products)

    @cached_property
    def _producing(self) -> tuple[tuple[int, ...], ...]:
        table: list[list[int]] = [[] for _ in self.species]
        for step in self.steps:
            for m in step.products:
                table[m].append(step.ordinal)
        return tuple(tuple(rs) for rs in table)

    def producing(self, m: int) -> tuple[int, ...]:
        """Ordinals of the steps with species ``m`` among their products."""
        return self._producing[m]

    @cached_property
    def atom_masks(self) -> dict[str, int]:
        """Atom symbol -> mask of the species containing it."""
        out = {a: 0 for a in self.atoms}
        for sp in self.species:
            for a in sp.composition:
                out[a] |= 1 << sp.ordinal
        return out

    @property
    def full_mask(self) -> int:
        return (1 << self.M) - 1

    @property
    def opaque_species(self) -> list[str]:
        return [sp.name for sp in self.species if sp.opaque]

    def alpha(self) -> list[list[int]]:
        """Reactant coefficient matrix, species by step."""
        return [[step.reactants.get(m, 0) for step in self.steps] for m in range(self.M)]

    def beta(self) -> list[list[int]]:
        """Product coefficient matrix, species by step."""
        return [[step.products.get(m, 0) for step in self.steps] for m in range(self.M)]

    def species_set(self, members: Iterable[str | int] = ()) -> SpeciesSet:
        """Build a :class:`SpeciesSet` from names and/or ordinals."""
        mask = 0
        unknown = []
        for item in members:
            if isinstance(item, str):
                if item not in self._index:
                    unknown.append(item)
                    continue
                item = self._index[item]
            mask |= 1 << item
        if unknown:
            raise UnknownSpeciesError(unknown)
        return SpeciesSet(mask, self)

    def from_mask(self, mask: int) -> SpeciesSet:
        return SpeciesSet(mask, self)

    def all_species(self) -> SpeciesSet:
        return SpeciesSet(self.full_mask, self)

    def scaled(self, factors: Mapping[tuple[str, int, int], int]) -> ReactionNetwork:
        """Copy with coefficients multiplied; keys are ("a"|"b", m, r)."""
        steps = []
        for step in self.steps:
            r = step.ordinal
            reac = {m: c * factors.get(("a", m, r), 1) for m, c in step.reactants.items()}
            prod = {m: c * factors.get(("b", m, r), 1) for m, c in step.products.items()}
            steps.append(ReactionStep(r, reac, prod, _format_step(self.species, reac, prod), step.line))
        return ReactionNetwork(self.species, tuple(steps))

    def __repr__(self) -> str:
        return f"ReactionNetwork(M={self.M}, R={self.R})"


def _mask(side: Mapping[int, int]) -> int:
    out = 0
    for m in side:
        out |= 1 << m
    return out


# --- text format -----------------------------------------------------------

_ARROW = re.compile(r"<=>|->")
_NAME = r"[A-Za-z*(\[][A-Za-z0-9_*+\-^'()\[\]{}.]*"
_TERM = re.compile(rf"(?P<coef>\d+)?(?P<name>{_NAME})")
_COEF = re.compile(r"\d+")
_NAME_RE = re.compile(_NAME)


def _tokens(text: str, offset: int) -> list[tuple[str, int]]:
    return [(m.group(), offset + m.start()) for m in re.finditer(r"\S+", text)]


def _parse_complex(text: str, offset: int, line: int) -> list[tuple[int, str, int]]:
    """Return ``(coefficient, name, column)`` triples; columns are 1-based."""
    toks = _tokens(text, offset)
    if not toks:
        raise ParseError("empty complex (write 0 for the zero complex)", line, offset + 1)
    if len(toks) == 1 and toks[0][0] == "0":
        return []
    terms = []
    i = 0
    expect_term = True
    while i < len(toks):
        tok, col = toks[i]
        if not expect_term:
            if tok != "+":
                raise ParseError(f"expected '+' but found {tok!r}", line, col + 1)
            expect_term = True
            i += 1
            continue
        coef = 1
        if _COEF.fullmatch(tok):
            if i + 1 >= len(toks) or toks[i + 1][0] == "+":
                raise ParseError(f"coefficient {tok} without a species", line, col + 1)
            coef = int(tok)
            i += 1
            tok, name_col = toks[i]
            if not _NAME_RE.fullmatch(tok):
                raise ParseError(f"unknown token {tok!r}", line, name_col + 1)
            name = tok
        else:
            match = _TERM.fullmatch(tok)
            if match is None:
                raise ParseError(f"unknown token {tok!r}", line, col + 1)
            if match.group("coef") is not None:
                coef = int(match.group("coef"))
            name = match.group("name")
        if coef == 0:
            raise ParseError(f"coefficient 0 for {name!r}", line, col + 1)
        terms.append((coef, name, col + 1))
        expect_term = False
        i += 1
    if expect_term:
        raise ParseError("dangling '+'", line, toks[-1][1] + 1)
    return terms


def parse_network(text: str) -> ReactionNetwork:
    """Parse the line-oriented reaction format.

    ``A <=> B`` expands to the two steps ``A -> B`` and ``B -> A`` (in that
    order).  Species are numbered in order of first occurrence unless a
    ``species:`` header lists them explicitly, in which case every species
    used by a step must appear in the header.
    """
    header: list[str] | None = None
    raw_steps: list[tuple[list, list, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("species:"):
            if header is not None:
                raise ParseError("duplicate species header", lineno, 1)
            body_col = line.index("species:") + len("species:")
            header = []
            for part in line[body_col:].split(","):
                name = part.strip()
                col = body_col + line[body_col:].find(part) + 1
                if not _NAME_RE.fullmatch(name):
                    raise ParseError(f"invalid species name {name!r}", lineno, col)
                if name in header:
                    raise ParseError(f"species {name!r} listed twice", lineno, col)
                header.append(name)
            continue
        arrows = list(_ARROW.finditer(line))
        if len(arrows) != 1:
            col = arrows[1].start() + 1 if arrows else len(line) - len(line.lstrip()) + 1
            raise ParseError("expected exactly one '->' or '<=>'", lineno, col)
        arrow = arrows[0]
        left = _parse_complex(line[: arrow.start()], 0, lineno)
        right = _parse_complex(line[arrow.end():], arrow.end(), lineno)
        raw_steps.append((left, right, lineno))
        if arrow.group() == "<=>":
            raw_steps.append((right, left, lineno))
    if not raw_steps:
        raise ParseError("no reaction steps", max(1, len(text.splitlines())), 1)

    names: list[str] = list(header) if header is not None else []
    index = {n: i for i, n in enumerate(names)}
    for left, right, lineno in raw_steps:
        for _, name, col in left + right:
            if name not in index:
                if header is not None:
                    raise ParseError(f"unknown token {name!r} (not in species header)", lineno, col)
                index[name] = len(names)
                names.append(name)

    species = tuple(Species(n, i, parse_formula(n)) for i, n in enumerate(names))
    steps = []
    for r, (left, right, lineno) in enumerate(raw_steps):
        reac: dict[int, int] = {}
        prod: dict[int, int] = {}
        for coef, name, _ in left:
            reac[index[name]] = reac.get(index[name], 0) + coef
        for coef, name, _ in right:
            prod[index[name]] = prod.get(index[name], 0) + coef
        steps.append(ReactionStep(r, reac, prod, _format_step(species, reac, prod), lineno))
    return ReactionNetwork(species, tuple(steps))


def _format_side(species, side: Mapping[int, int]) -> str:
    if not side:
        return "0"
    return " + ".join(
        (f"{c} " if c != 1 else "") + species[m].name for m, c in side.items()
    )


def _format_step(species, reac: Mapping[int, int], prod: Mapping[int, int]) -> str:
    return f"{_format_side(species, reac)} -> {_format_side(species, prod)}"


def format_network(net: ReactionNetwork) -> str:
    """Serialize to the text format; :func:`parse_network` inverts this exactly."""
    lines = ["species: " + ", ".join(sp.name for sp in net.species)]
    lines += [_format_step(net.species, s.reactants, s.products) for s in net.steps]
    return "\n".join(lines) + "\n"


def network_to_json(net: ReactionNetwork) -> dict:
    names = [sp.name for sp in net.species]
    return {
        "species": [{"name": sp.name, "atoms": dict(sp.composition)} for sp in net.species],
        "steps": [
            {
                "reactants": {names[m]: c for m, c in s.reactants.items()},
                "products": {names[m]: c for m, c in s.products.items()},
            }
            for s in net.steps
        ],
    }


def load_network(path) -> ReactionNetwork:
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh.read())


# --- derived sets ------------------------------------------------------------

def reactant_species(net: ReactionNetwork) -> SpeciesSet:
    """Species occurring in at least one reactant complex."""
    mask = 0
    for m in net.reactant_masks:
        mask |= m
    return SpeciesSet(mask, net)


def _atoms_of(net: ReactionNetwork, subset) -> set[str]:
    if isinstance(subset, SpeciesSet):
        return {a for m in subset for a in net.species[m].composition}
    atoms: set[str] = set()
    for item in subset:
        if isinstance(item, int):
            atoms.update(net.species[item].composition)
        elif item in net._index:
            atoms.update(net.species[net._index[item]].composition)
        else:
            # tokens outside the network are read as formulas on the fly
            atoms.update(parse_formula(item))
    return atoms


def atoms_present(net: ReactionNetwork, subset) -> bool:
    """True iff the members of ``subset`` jointly carry every atom of ``net``.

    ``subset`` is a :class:`SpeciesSet` or an iterable of species names;
    names that are not species of ``net`` are decomposed as formulas.
    """
    return _atoms_of(net, subset) >= set(net.atoms)


def covers_atoms(net: ReactionNetwork, mask: int) -> bool:
    return all(mask & carriers for carriers in net.atom_masks.values())


def count_covering_subsets(net: ReactionNetwork) -> int:
    """Number of nonempty species subsets that carry every atom.

    Inclusion-exclusion over sets T of atoms that are forced missing: the
    subsets avoiding every atom of T are the subsets of the species that
    contain no atom of T.
    """
    atoms = net.atoms
    if not atoms:
        raise NoAtomsError("no species has an atomic composition")
    comps = [set(sp.composition) for sp in net.species]
    total = 0
    for k in range(len(atoms) + 1):
        for missing in combinations(atoms, k):
            free = sum(1 for comp in comps if comp.isdisjoint(missing))
            total += (-1) ** k * (1 << free)
    # the empty subset avoids everything and cancels out since atoms is nonempty
    return total


def atomic_saving(net: ReactionNetwork) -> Fraction:
    """Fraction of the nonempty species subsets that carry every atom."""
    return Fraction(count_covering_subsets(net), (1 << net.M) - 1)
