"""Best-effort decomposition of species names into element counts.

Species names in reaction files are opaque labels (``E``, ``X10``) as often
as they are formulas (``CH3Cl``, ``Mn(OH)2+``).  :func:`parse_formula` reads
the formula-like ones and returns an empty composition for everything else.
"""

from __future__ import annotations

import re
from collections import Counter

ELEMENTS = frozenset(
    """
    H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co Ni
    Cu Zn Ga Ge As Se Br Kr Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb Te I Xe
    Cs Ba La Ce Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb Lu Hf Ta W Re Os Ir Pt Au
    Hg Tl Pb Bi Po At Rn Fr Ra Ac Th Pa U Np Pu Am Cm Bk Cf Es Fm Md No Lr Rf
    Db Sg Bh Hs Mt Ds Rg Cn Nh Fl Mc Lv Ts Og
    """.split()
)

# charge suffixes: "+", "2-", "^-", "^2+", "^{3+}"
_CHARGE = re.compile(r"(\^\{?\d*[+-]*\}?|[+-]+)$")
_TOKEN = re.compile(r"([A-Z][a-z]?)|(\d+)|(\()|(\))")


class FormulaError(ValueError):
    pass


def _strip_decorations(token: str) -> str:
    core = token.replace("*", "")
    return _CHARGE.sub("", core)


def _parse_strict(core: str) -> Counter:
    """Parse an undecorated formula; raise FormulaError on anything unexpected."""
    stack: list[Counter] = [Counter()]
    last: Counter | None = None  # the group a following multiplier applies to
    pos = 0
    while pos < len(core):
        match = _TOKEN.match(core, pos)
        if match is None:
            raise FormulaError(f"unexpected character {core[pos]!r} in {core!r}")
        symbol, digits, opening, closing = match.groups()
        if symbol:
            if symbol not in ELEMENTS:
                raise FormulaError(f"unknown element {symbol!r}")
            last = Counter({symbol: 1})
            stack[-1] += last
        elif digits:
            if last is None:
                raise FormulaError(f"multiplier without a group in {core!r}")
            factor = int(digits)
            if factor == 0:
                raise FormulaError("zero multiplier")
            for atom, count in last.items():
                stack[-1][atom] += count * (factor - 1)
            last = None
        elif opening:
            stack.append(Counter())
            last = None
        else:
            if len(stack) == 1:
                raise FormulaError(f"unbalanced ')' in {core!r}")
            last = stack.pop()
            stack[-1] += last
        pos = match.end()
    if len(stack) != 1:
        raise FormulaError(f"unbalanced '(' in {core!r}")
    if not stack[0]:
        raise FormulaError("no elements")
    return stack[0]


def parse_formula(token: str) -> dict[str, int]:
    """Return the element counts of ``token``, or ``{}`` if it is not a formula.

    Radical markers (``*``) and trailing charges are ignored, so ``*CH3`` and
    ``Mn(OH)2+`` parse as ``{C: 1, H: 3}`` and ``{Mn: 1, O: 2, H: 2}``.
    Labels such as ``E`` or ``X_10`` yield an empty mapping.

    >>> parse_formula("CH3Cl")
    {'C': 1, 'H': 3, 'Cl': 1}
    """
    try:
        counts = _parse_strict(_strip_decorations(token))
    except FormulaError:
        return {}
    return dict(counts)
