"""Implicit enumeration of minimal initial sets in (reverse) lexicographic order.

Candidates are 0-1 vectors over the powerset base.  In both orderings the
successor of a vector is obtained by adding one to the integer whose binary
digits are the vector, read with the most significant position first (lex)
or last (revlex).  The engine therefore walks integers ("ranks"); bit ``b`` of
a rank is the ``b``-th least significant position of the vector.

Three jumps skip work without losing minimal sets:

* atom jump: a candidate missing atom ``a`` advances to the smallest later
  vector containing the least significant carrier of ``a``;
* minimality jump: a candidate containing a stored minimal set carries its
  lowest block of ones into the next zero above it (``x + (x & -x)``), which
  skips exactly the supersets of the candidate;
* cap jump: the same carry, applied while the candidate has too many ones.
"""

from __future__ import annotations

import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

from .minimal import (
    BaseTooLarge,
    MinimalFamily,
    SearchOptions,
    minimal_masks,
    powerset_base,
)
from .network import ReactionNetwork, VindexError
from .volpert import Closure

log = logging.getLogger(__name__)

ORDERINGS = ("lex", "revlex")
PROGRESS_EVERY = 1 << 20


class Exhausted(VindexError):
    """No vector follows in the current ordering."""


class UncoverableAtom(VindexError):
    """An atom has no carrier among the enumerated species."""


@dataclass(frozen=True)
class CandidateVector:
    """A 0-1 vector over the enumeration order together with that order.

    ``species[i]`` is the network ordinal of the species at position ``i``.
    """

    u: tuple[int, ...]
    ordering: str
    species: tuple[int, ...]

    def mask(self) -> int:
        out = 0
        for bit, m in zip(self.u, self.species):
            if bit:
                out |= 1 << m
        return out


def _check_ordering(ordering: str) -> None:
    if ordering not in ORDERINGS:
        raise ValueError(f"unknown ordering {ordering!r}")


def next_lex(u: Sequence[int]) -> tuple[int, ...]:
    """Successor in lexicographic order: flip the last 0, clear everything after."""
    for m in range(len(u) - 1, -1, -1):
        if u[m] == 0:
            return tuple(u[:m]) + (1,) + (0,) * (len(u) - m - 1)
    raise Exhausted("all-ones vector has no successor")


def next_revlex(u: Sequence[int]) -> tuple[int, ...]:
    """Successor in reverse lexicographic order: flip the first 0, clear everything before."""
    for p, bit in enumerate(u):
        if bit == 0:
            return (0,) * p + (1,) + tuple(u[p + 1:])
    raise Exhausted("all-ones vector has no successor")


def next_vector(u: Sequence[int], ordering: str) -> tuple[int, ...]:
    _check_ordering(ordering)
    return next_lex(u) if ordering == "lex" else next_revlex(u)


def _significance(n: int, ordering: str) -> list[int]:
    """Positions listed from least to most significant."""
    return list(range(n - 1, -1, -1)) if ordering == "lex" else list(range(n))


def vector_to_rank(u: Sequence[int], ordering: str) -> int:
    rank = 0
    for b, pos in enumerate(_significance(len(u), ordering)):
        rank |= u[pos] << b
    return rank


def rank_to_vector(rank: int, n: int, ordering: str) -> tuple[int, ...]:
    u = [0] * n
    for b, pos in enumerate(_significance(n, ordering)):
        u[pos] = rank >> b & 1
    return tuple(u)


@dataclass(frozen=True)
class AtomVectors:
    """Per-atom carrier vectors over the enumeration order.

    ``last[a]`` is the least significant carrier position of atom ``a``: the
    last position for lex, the first one for revlex.  It is ``None`` when no
    enumerated species carries the atom.
    """

    atoms: tuple[str, ...]
    carriers: tuple[tuple[int, ...], ...]
    last: tuple[int | None, ...]
    ordering: str


def atom_vectors(net: ReactionNetwork, species: Sequence[int], ordering: str) -> AtomVectors:
    _check_ordering(ordering)
    carriers = []
    last = []
    for a in net.atoms:
        vec = tuple(int(a in net.species[m].composition) for m in species)
        carriers.append(vec)
        hits = [i for i, c in enumerate(vec) if c]
        if not hits:
            last.append(None)
        else:
            last.append(hits[-1] if ordering == "lex" else hits[0])
    return AtomVectors(net.atoms, tuple(carriers), tuple(last), ordering)


def atomic_jump(u: Sequence[int], av: AtomVectors) -> tuple[int, ...]:
    """Add the least significant carrier of every atom ``u`` misses.

    This is the plain rule: bits already set after the carrier are kept.
    When such bits exist the rule can step over vectors that do carry the
    atom; :func:`enumerate_minimal` therefore uses :func:`safe_atomic_jump`.
    """
    u = list(u)
    for vec, last in zip(av.carriers, av.last):
        if any(c and x for c, x in zip(vec, u)):
            continue
        if last is None:
            raise UncoverableAtom("atom has no carrier in the enumeration order")
        u[last] = 1
    return tuple(u)


def safe_atomic_jump(u: Sequence[int], av: AtomVectors) -> tuple[int, ...]:
    """Smallest vector not preceding ``u`` that carries every atom."""
    n = len(u)
    rank = vector_to_rank(u, av.ordering)
    masks = [vector_to_rank(vec, av.ordering) for vec in av.carriers]
    if any(m == 0 for m in masks):
        raise UncoverableAtom("atom has no carrier in the enumeration order")
    rank = _atom_jump_rank(rank, masks)
    return rank_to_vector(rank, n, av.ordering)


def _atom_jump_rank(x: int, carrier_ranks: Sequence[int]) -> int:
    while True:
        for carriers in carrier_ranks:
            if not x & carriers:
                low = carriers & -carriers
                x = (x & ~(low - 1)) | low
                break
        else:
            return x


def _dominated(x: int, found: Sequence[int]) -> bool:
    return any(v & ~x == 0 for v in found)


def cap_jump_rank(x: int, cap: int) -> int:
    """Smallest rank ``>= x`` with at most ``cap`` ones.

    While there are too many ones, the lowest block of ones carries into the
    zero above it; every rank passed over contains that block plus the
    higher ones, so it has too many ones as well.
    """
    while bin(x).count("1") > cap:
        x += x & -x
    return x


def minimality_jump(u: Sequence[int], family: Sequence[Sequence[int]], ordering: str) -> tuple[int, ...]:
    """Leave the block of vectors that contain a stored set.

    ``family`` holds vectors in the same ordering as ``u``.  When no member is
    contained in ``u`` the vector comes back unchanged.  Otherwise the
    nearest 0 above the lowest 1 (in significance) is set and every less
    significant position is cleared.
    """
    x = vector_to_rank(u, ordering)
    found = [vector_to_rank(v, ordering) for v in family]
    if not _dominated(x, found):
        return tuple(u)
    y = x + (x & -x)
    if x == 0 or y >> len(u):
        raise Exhausted("no vector outside the dominated block follows")
    return rank_to_vector(y, len(u), ordering)


def enumeration_order(net: ReactionNetwork, opts: SearchOptions) -> list[int]:
    """Base species from least to most significant position.

    ``reorder="frequency"`` puts the species occurring in the most reactant
    complexes at the least significant (fastest toggling) end.
    """
    base = list(powerset_base(net, opts.intermediates))
    if opts.reorder == "frequency":
        freq = {m: sum(1 for rm in net.reactant_masks if rm >> m & 1) for m in base}
        return sorted(base, key=lambda m: -freq[m])
    if opts.reorder != "input":
        raise ValueError(f"unknown reorder mode {opts.reorder!r}")
    return base if opts.order == "revlex" else base[::-1]


class _RankDecoder:
    """Translate ranks to species masks via per-byte lookup tables."""

    def __init__(self, by_sig: Sequence[int]):
        self.tables = []
        for start in range(0, len(by_sig), 8):
            chunk = by_sig[start:start + 8]
            table = [0] * (1 << len(chunk))
            for byte in range(1, len(table)):
                low = byte & -byte
                table[byte] = table[byte ^ low] | 1 << chunk[low.bit_length() - 1]
            self.tables.append(table)

    def __call__(self, rank: int) -> int:
        mask = 0
        for table in self.tables:
            if rank == 0:
                break
            mask |= table[rank & 0xFF]
            rank >>= 8
        return mask


Trace = Callable[[str, int, int], None]


def _search_range(
    net: ReactionNetwork,
    by_sig: Sequence[int],
    opts: SearchOptions,
    lo: int,
    hi: int,
    trace: Trace | None = None,
    progress: Callable[[int], None] | None = None,
) -> list[int]:
    """Ranks in ``[lo, hi)`` that pass the test and contain no earlier hit of this range."""
    decode = _RankDecoder(by_sig)
    closure = Closure(net)
    atom_ranks = []
    if opts.atomic:
        for a in net.atoms:
            carriers = 0
            for b, m in enumerate(by_sig):
                if a in net.species[m].composition:
                    carriers |= 1 << b
            if not carriers:
                return []
            atom_ranks.append(carriers)
    cap = opts.cap
    found: list[int] = []
    x = lo
    seen = 0
    while x < hi:
        seen += 1
        if progress is not None and seen % PROGRESS_EVERY == 0:
            progress(seen)
        if atom_ranks:
            y = _atom_jump_rank(x, atom_ranks)
            if y != x:
                if trace:
                    trace("atomic", x, y)
                x = y
                continue
        if found and _dominated(x, found):
            if x == 0 or found[0] == 0:
                # the empty set is a hit, so every later vector is dominated
                if trace:
                    trace("minimality", x, hi)
                break
            y = x + (x & -x)
            if trace:
                trace("minimality", x, y)
            x = y
            continue
        if cap is not None and bin(x).count("1") > cap:
            y = cap_jump_rank(x, cap)
            if trace:
                trace("cap", x, y)
            x = y
            continue
        if trace:
            trace("test", x, x + 1)
        if closure.complete(decode(x)):
            # stored sets precede x, so none can be a superset; kept defensively
            found = [v for v in found if not (x & ~v == 0)]
            found.append(x)
        x += 1
    return found


def _shard_worker(args):
    net, by_sig, opts, lo, hi = args
    return _search_range(net, by_sig, opts, lo, hi)


def enumerate_minimal(
    net: ReactionNetwork,
    opts: SearchOptions | None = None,
    *,
    trace: Trace | None = None,
    progress: Callable[[int], None] | None = None,
) -> MinimalFamily:
    """All minimal initial sets by implicit enumeration over the powerset base.

    ``opts.order`` picks lex or revlex, ``opts.reorder`` the species order,
    ``opts.cap`` bounds the cardinality and ``opts.shards`` splits the rank
    interval into contiguous pieces searched in separate processes.
    ``trace(kind, start, stop)`` receives every visited rank range
    (``kind`` is ``test``, ``atomic``, ``minimality`` or ``cap``).
    """
    opts = opts or SearchOptions(engine="lex")
    _check_ordering(opts.order)
    by_sig = enumeration_order(net, opts)
    n = len(by_sig)
    if n > 62 and opts.cap is None:
        raise BaseTooLarge(f"powerset base has {n} species; set a cardinality cap")
    end = 1 << n
    shards = max(1, min(opts.shards, end))
    if shards == 1:
        ranks = _search_range(net, by_sig, opts, 0, end, trace, progress)
    else:
        bounds = [end * i // shards for i in range(shards + 1)]
        jobs = [(net, by_sig, opts, bounds[i], bounds[i + 1]) for i in range(shards)]
        if trace is not None:
            ranks = [r for job in jobs for r in _search_range(*job, trace=trace)]
        else:
            with ProcessPoolExecutor(max_workers=shards) as pool:
                ranks = [r for part in pool.map(_shard_worker, jobs) for r in part]
    decode = _RankDecoder(by_sig)
    return MinimalFamily.from_masks(net, (decode(r) for r in minimal_masks(ranks)))


def stderr_progress(seen: int) -> None:
    print(f"lex: {seen} candidates examined", file=sys.stderr)
