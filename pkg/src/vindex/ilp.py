"""0-1 programming formulation of the minimum initial set problem.

Variables are ``y_m_l`` (species ``m`` has Volpert index ``l``) and
``z_r_l`` (step ``r`` has Volpert index ``l - 1``).  Minimizing the sum of
the ``y_m_0`` picks a smallest initial set from which every species and
every step gets a finite index.

The built-in solver is a depth-first branch and bound with bound
propagation on the linear rows.  It is meant for models of a few hundred
binaries; :func:`export_lp` writes CPLEX LP text for anything bigger.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .minimal import MinimalFamily, SearchOptions, powerset_base
from .network import ReactionNetwork, VindexError
from .volpert import Closure

DEFAULT_NODE_CAP = 10**7

SENSES = ("<=", ">=", "=")


class IlpCapped(VindexError):
    """The node cap ran out before the search finished."""


@dataclass(frozen=True)
class Row:
    name: str
    terms: tuple[tuple[int, str], ...]
    sense: str
    rhs: int

    def activity(self, assignment) -> int:
        return sum(c * assignment[v] for c, v in self.terms)

    def satisfied(self, assignment) -> bool:
        act = self.activity(assignment)
        if self.sense == "<=":
            return act <= self.rhs
        if self.sense == ">=":
            return act >= self.rhs
        return act == self.rhs


@dataclass
class IlpModel:
    """Binary variables, linear rows, and a minimization objective."""

    variables: list[str]
    rows: list[Row]
    objective: dict[str, int]
    species: tuple[str, ...] = ()
    y_top: int = 0
    z_top: int = 0

    def __post_init__(self):
        known = set(self.variables)
        for row in self.rows:
            self._check(row, known)

    @staticmethod
    def _check(row: Row, known) -> None:
        if row.sense not in SENSES:
            raise ValueError(f"row {row.name}: bad sense {row.sense!r}")
        for _, v in row.terms:
            if v not in known:
                raise ValueError(f"row {row.name} uses undeclared variable {v}")

    def add_row(self, row: Row) -> None:
        self._check(row, set(self.variables))
        self.rows.append(row)

    def copy(self) -> IlpModel:
        return IlpModel(list(self.variables), list(self.rows), dict(self.objective),
                        self.species, self.y_top, self.z_top)

    def rows_of(self, family: str) -> list[Row]:
        return [r for r in self.rows if r.name.split("_", 1)[0] == family]


def yvar(m: int, level: int) -> str:
    return f"y_{m}_{level}"


def zvar(r: int, level: int) -> str:
    return f"z_{r}_{level}"


def build_model(net: ReactionNetwork, variant: str = "corrected") -> IlpModel:
    """The 0-1 model of finite Volpert indexing with minimum initial set.

    Row families, in output order: ``level`` (one level per species),
    ``step`` (one level per step), ``fire`` (a step fires no later than its
    latest reactant), ``block`` (a step cannot fire before all reactants),
    ``prod`` (products appear by the level after the step), ``finite``
    (every step fires) and ``origin`` (a non-initial species needs a
    producing step below it).

    Species levels run over ``0..H`` with ``H = min(R, M-1)``, or
    ``min(R, M)`` when some step leaves the zero complex (then the initial
    set may be empty).  Step levels run over ``0..min(R-1, H)``, stored as
    ``z_r_1 .. z_r_K``.  A ``fire`` row says that all reactants at level
    ``k`` or below let the step fire at level ``k``, so it sums ``z`` up to
    ``k + 1``.

    ``variant="narrow"`` keeps species levels ``0..R-1``, step variables
    ``z_r_1 .. z_r_R`` and ``fire`` rows summing ``z`` only up to ``k``.
    That version is kept for comparison: it rejects true indexings and puts
    the Michaelis-Menten optimum at 3 instead of 1.
    """
    if variant not in ("corrected", "narrow"):
        raise ValueError(f"unknown model variant {variant!r}")
    M, R = net.M, net.R
    if variant == "narrow":
        H, K, shift = R - 1, R, 0
    else:
        zero = any(mask == 0 for mask in net.reactant_masks)
        H = min(R, M if zero else M - 1)
        K = min(R - 1, H) + 1
        shift = 1
    variables = [yvar(m, l) for m in range(M) for l in range(H + 1)]
    variables += [zvar(r, l) for r in range(R) for l in range(1, K + 1)]
    rows: list[Row] = []

    def add(name, terms, sense, rhs):
        rows.append(Row(name, tuple(terms), sense, rhs))

    for m in range(M):
        add(f"level_m{m}", [(1, yvar(m, l)) for l in range(H + 1)], "=", 1)
    for r in range(R):
        add(f"step_r{r}", [(1, zvar(r, l)) for l in range(1, K + 1)], "=", 1)
    for r in range(R):
        reac = sorted(net.steps[r].reactants)
        for k in range(1 - shift, K + 1 - shift):
            terms = [(1, yvar(m, l)) for m in reac for l in range(min(k, H) + 1)]
            terms += [(-1, zvar(r, l)) for l in range(1, k + shift + 1)]
            add(f"fire_r{r}_k{k}", terms, "<=", len(reac) - 1)
    for r in range(R):
        reac = sorted(net.steps[r].reactants)
        if not reac:
            continue
        for k in range(1, K + 1):
            terms = [(1, yvar(m, l)) for m in reac for l in range(min(k - 1, H) + 1)]
            terms += [(-len(reac), zvar(r, l)) for l in range(1, k + 1)]
            add(f"block_r{r}_k{k}", terms, ">=", 0)
    for r in range(R):
        for k in range(1, K + 1):
            for m in sorted(net.steps[r].products):
                terms = [(-1, yvar(m, l)) for l in range(min(k, H) + 1)]
                terms.append((1, zvar(r, k)))
                add(f"prod_r{r}_k{k}_m{m}", terms, "<=", 0)
    for r in range(R):
        add(f"finite_r{r}", [(1, zvar(r, l)) for l in range(1, K + 1)], ">=", 1)
    for m in range(M):
        producers = net.producing(m)
        for k in range(1, H + 1):
            terms = [(1, yvar(m, l)) for l in range(1, k + 1)]
            terms += [(-1, zvar(r, l)) for r in producers for l in range(1, min(k, K) + 1)]
            add(f"origin_m{m}_k{k}", terms, "<=", 0)

    objective = {yvar(m, 0): 1 for m in range(M)}
    names = tuple(sp.name for sp in net.species)
    return IlpModel(variables, rows, objective, names, H, K)


# --- LP text ---------------------------------------------------------------

_WRAP = 200


def _format_terms(terms) -> str:
    parts = []
    for i, (c, v) in enumerate(terms):
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        body = v if mag == 1 else f"{mag} {v}"
        if i == 0:
            parts.append(body if sign == "+" else f"- {body}")
        else:
            parts.append(f"{sign} {body}")
    return " ".join(parts) if parts else "0 y_0_0"


def _wrap(line: str) -> list[str]:
    out = []
    while len(line) > _WRAP:
        cut = line.rfind(" + ", 0, _WRAP)
        cut2 = line.rfind(" - ", 0, _WRAP)
        cut = max(cut, cut2)
        if cut <= 0:
            break
        out.append(line[:cut])
        line = "   " + line[cut + 1:]
    out.append(line)
    return out


def export_lp(model: IlpModel) -> str:
    """CPLEX LP text: ``Minimize``, ``Subject To``, ``Binary``, ``End``."""
    lines = ["Minimize"]
    lines += _wrap(" obj: " + _format_terms(sorted(
        ((c, v) for v, c in model.objective.items()), key=lambda t: model.variables.index(t[1]))))
    lines.append("Subject To")
    for row in model.rows:
        lines += _wrap(f" {row.name}: {_format_terms(row.terms)} {row.sense} {row.rhs}")
    lines.append("Binary")
    lines += [f" {v}" for v in model.variables]
    lines.append("End")
    return "\n".join(lines) + "\n"


_LP_TERM = re.compile(r"([+-])?\s*(\d+)?\s*([A-Za-z_][\w.]*)")
_LP_ROW = re.compile(r"^\s*([A-Za-z_][\w.]*)\s*:\s*(.*?)\s*(<=|>=|=<|=>|=|<|>)\s*(-?\d+)\s*$")


def _parse_terms(text: str) -> list[tuple[int, str]]:
    terms = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        match = _LP_TERM.match(text, pos)
        if match is None or match.end() == pos:
            raise ValueError(f"cannot parse LP terms near {text[pos:pos + 20]!r}")
        sign, coef, var = match.groups()
        value = int(coef) if coef else 1
        terms.append((-value if sign == "-" else value, var))
        pos = match.end()
        while pos < len(text) and text[pos] == " ":
            pos += 1
    return terms


def read_lp(text: str) -> IlpModel:
    """Read the subset of CPLEX LP written by :func:`export_lp`."""
    section = None
    objective_text = []
    row_texts: list[str] = []
    binaries: list[str] = []
    for raw in text.splitlines():
        line = raw.split("\\", 1)[0].rstrip()
        key = line.strip().lower()
        if not key:
            continue
        if key in ("minimize", "minimise", "min"):
            section = "obj"
            continue
        if key in ("subject to", "st", "s.t."):
            section = "rows"
            continue
        if key in ("binary", "binaries", "bin"):
            section = "bin"
            continue
        if key == "end":
            break
        if section == "obj":
            objective_text.append(line)
        elif section == "rows":
            if re.match(r"^\s*[A-Za-z_][\w.]*\s*:", line) and not line.startswith("    "):
                row_texts.append(line)
            else:
                row_texts[-1] += " " + line.strip()
        elif section == "bin":
            binaries += line.split()
    obj_line = " ".join(s.strip() for s in objective_text)
    obj_line = obj_line.split(":", 1)[1] if ":" in obj_line else obj_line
    objective = {v: c for c, v in _parse_terms(obj_line) if c}
    rows = []
    for text_row in row_texts:
        match = _LP_ROW.match(text_row)
        if match is None:
            raise ValueError(f"cannot parse LP row {text_row!r}")
        name, body, sense, rhs = match.groups()
        sense = {"=<": "<=", "<": "<=", "=>": ">=", ">": ">="}.get(sense, sense)
        terms = tuple((c, v) for c, v in _parse_terms(body) if c)
        rows.append(Row(name, terms, sense, int(rhs)))
    return IlpModel(binaries, rows, objective)


# --- branch and bound ----------------------------------------------------------

class _Search:
    """Depth-first search over binaries with incremental bound propagation.

    Every row is kept as ``sum a_j x_j <= b`` together with its minimum
    activity under the current partial assignment.  A row whose slack drops
    below a coefficient magnitude forces that variable; a negative slack is
    a conflict.
    """

    def __init__(self, model: IlpModel, node_cap: int | None = None):
        self.model = model
        self.names = list(model.variables)
        self.index = {v: i for i, v in enumerate(self.names)}
        n = len(self.names)
        self.value = [-1] * n
        self.trail: list[int] = []
        self.occ: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        self.row_vars: list[list[int]] = []
        self.row_coefs: list[list[int]] = []
        self.rhs: list[int] = []
        self.minact: list[int] = []
        self.maxabs: list[int] = []
        self.dynamic: list[int] = []
        self.node_cap = node_cap
        self.nodes = 0
        for row in model.rows:
            self.add_row(row)
        self.obj = [(self.index[v], c) for v, c in model.objective.items()]
        if any(c < 0 for _, c in self.obj):
            raise ValueError("objective coefficients must be nonnegative")
        obj_vars = {i for i, _ in self.obj}
        self.order = [i for i in range(n) if i in obj_vars] + [i for i in range(n) if i not in obj_vars]
        self.cutoff = self._add_le([i for i, _ in self.obj], [c for _, c in self.obj],
                                   sum(c for _, c in self.obj), dynamic=True)

    # rows

    def add_row(self, row: Row, dynamic: bool = False) -> None:
        acc: dict[int, int] = {}
        for c, v in row.terms:
            acc[self.index[v]] = acc.get(self.index[v], 0) + c
        items = [(i, c) for i, c in acc.items() if c]
        vars_ = [i for i, _ in items]
        coefs = [c for _, c in items]
        if row.sense in ("<=", "="):
            self._add_le(vars_, coefs, row.rhs, dynamic)
        if row.sense in (">=", "="):
            self._add_le(vars_, [-c for c in coefs], -row.rhs, dynamic)

    def _add_le(self, vars_: Sequence[int], coefs: Sequence[int], rhs: int, dynamic: bool = False) -> int:
        rid = len(self.rhs)
        minact = 0
        for i, a in zip(vars_, coefs):
            val = self.value[i]
            if val == -1:
                minact += min(a, 0)
            else:
                minact += a * val
            self.occ[i].append((rid, a))
        self.row_vars.append(list(vars_))
        self.row_coefs.append(list(coefs))
        self.rhs.append(rhs)
        self.minact.append(minact)
        self.maxabs.append(max((abs(a) for a in coefs), default=0))
        if dynamic:
            self.dynamic.append(rid)
        return rid

    def set_rhs(self, rid: int, rhs: int) -> None:
        self.rhs[rid] = rhs

    def _dynamic_violated(self) -> bool:
        return any(self.minact[r] > self.rhs[r] for r in self.dynamic)

    # assignment

    def assign(self, var: int, val: int) -> bool:
        value, occ, minact, rhs, maxabs = self.value, self.occ, self.minact, self.rhs, self.maxabs
        row_vars, row_coefs = self.row_vars, self.row_coefs
        pending = [(var, val)]
        while pending:
            v, x = pending.pop()
            cur = value[v]
            if cur != -1:
                if cur != x:
                    return False
                continue
            value[v] = x
            self.trail.append(v)
            tight = []
            conflict = False
            for rid, a in occ[v]:
                if (a > 0) == (x == 1):
                    ma = minact[rid] + (a if a > 0 else -a)
                    minact[rid] = ma
                    slack = rhs[rid] - ma
                    if slack < 0:
                        conflict = True
                    elif slack < maxabs[rid]:
                        tight.append(rid)
                elif rhs[rid] - minact[rid] < maxabs[rid]:
                    tight.append(rid)
            if conflict:
                return False
            for rid in tight:
                slack = rhs[rid] - minact[rid]
                for j, a in zip(row_vars[rid], row_coefs[rid]):
                    if value[j] == -1:
                        if a > slack:
                            pending.append((j, 0))
                        elif -a > slack:
                            pending.append((j, 1))
        return True

    def undo(self, mark: int) -> None:
        value, occ, minact, trail = self.value, self.occ, self.minact, self.trail
        while len(trail) > mark:
            v = trail.pop()
            x = value[v]
            for rid, a in occ[v]:
                if (a > 0) == (x == 1):
                    minact[rid] -= a if a > 0 else -a
            value[v] = -1

    def _root(self) -> bool:
        self.undo(0)
        if any(self.minact[r] > self.rhs[r] for r in range(len(self.rhs))):
            return False
        for rid in range(len(self.rhs)):
            slack = self.rhs[rid] - self.minact[rid]
            if slack < self.maxabs[rid]:
                for j, a in zip(self.row_vars[rid], self.row_coefs[rid]):
                    if self.value[j] == -1 and (a > slack or -a > slack):
                        if not self.assign(j, 0 if a > slack else 1):
                            return False
                        slack = self.rhs[rid] - self.minact[rid]
        return True

    def _count_node(self) -> None:
        self.nodes += 1
        if self.node_cap is not None and self.nodes > self.node_cap:
            raise IlpCapped(f"node cap {self.node_cap} exhausted")

    def leaves(self) -> Iterator[None]:
        """Yield at every complete feasible assignment, in depth-first order.

        Between yields the caller may add dynamic rows or tighten the
        cutoff; they take effect for the rest of the traversal.
        """
        if not self._root():
            return
        order = self.order
        stack: list[list] = []  # [trail mark, var, alternative or None, order position]
        pos = 0
        while True:
            while pos < len(order) and self.value[order[pos]] != -1:
                pos += 1
            if pos == len(order):
                if not self._dynamic_violated():
                    yield
                backtracked = self._backtrack(stack)
            else:
                var = order[pos]
                self._count_node()
                stack.append([len(self.trail), var, 1, pos])
                if self.assign(var, 0) and not self._dynamic_violated():
                    continue
                backtracked = self._backtrack(stack)
            if backtracked is None:
                return
            pos = backtracked

    def _backtrack(self, stack) -> int | None:
        while stack:
            mark, var, alt, pos = stack.pop()
            self.undo(mark)
            if alt is None or self._dynamic_violated():
                continue
            self._count_node()
            stack.append([mark, var, None, pos])
            if self.assign(var, alt) and not self._dynamic_violated():
                return pos
        return None

    def objective_value(self) -> int:
        return sum(c * self.value[i] for i, c in self.obj)

    def assignment(self) -> dict[str, int]:
        return {name: self.value[i] for i, name in enumerate(self.names)}

    def minimize(self) -> tuple[int, dict[str, int]] | None:
        self.set_rhs(self.cutoff, sum(c for _, c in self.obj))
        best = None
        for _ in self.leaves():
            obj = self.objective_value()
            best = (obj, self.assignment())
            self.set_rhs(self.cutoff, obj - 1)
        return best


@dataclass
class IlpSolution:
    status: str  # "optimal", "infeasible" or "capped"
    objective_value: int | None = None
    assignment: dict[str, int] = field(default_factory=dict)
    nodes: int = 0

    def support(self, model: IlpModel) -> list[int]:
        """Species ordinals with ``y_m_0 = 1``."""
        return [m for m in range(len(model.species)) if self.assignment.get(yvar(m, 0)) == 1]


def node_cap_from_env(default: int = DEFAULT_NODE_CAP) -> int:
    raw = os.environ.get("VINDEX_ILP_NODECAP")
    return int(raw) if raw else default


def solve_min_cardinality(model: IlpModel, node_cap: int | None = None) -> IlpSolution:
    """Minimize the objective by depth-first branch and bound.

    Objective variables are branched first (value 0 before 1), the rest in
    declaration order.  The bound is the objective of the fixed variables,
    enforced as a propagated cutoff row once an incumbent exists.
    """
    if node_cap is None:
        node_cap = node_cap_from_env()
    if node_cap < 1:
        raise ValueError("node cap must be at least 1")
    search = _Search(model, node_cap)
    try:
        best = search.minimize()
    except IlpCapped:
        return IlpSolution("capped", nodes=search.nodes)
    if best is None:
        return IlpSolution("infeasible", nodes=search.nodes)
    return IlpSolution("optimal", best[0], best[1], search.nodes)


def _support_cut(model: IlpModel, support: Sequence[int], tag: str) -> Row:
    return Row(f"cut_{tag}", tuple((1, yvar(m, 0)) for m in support), "<=", len(support) - 1)


def _support(search: _Search, M: int) -> list[int]:
    return [m for m in range(M) if search.value[search.index[yvar(m, 0)]] == 1]


def _layered_supports(search: _Search, net: ReactionNetwork, cap: int | None, stop_after_first: bool):
    found: list[list[int]] = []
    while True:
        best = search.minimize()
        if best is None:
            break
        level = best[0]
        if cap is not None and level > cap:
            break
        # every leaf under the cutoff now has objective == level; each found
        # support is cut off (with its supersets) before the search resumes
        search.set_rhs(search.cutoff, level)
        for _ in search.leaves():
            support = _support(search, net.M)
            found.append(support)
            search.add_row(_support_cut(search.model, support, str(len(found))), dynamic=True)
        if stop_after_first:
            break
    return found


def enumerate_min_cardinality_sets(net: ReactionNetwork, node_cap: int | None = None) -> MinimalFamily:
    """Every initial set of minimum cardinality, via exclusion cuts.

    After the optimum is known, the search resumes with the cut
    ``sum_{m in S} y_m_0 <= |S| - 1`` added for each support ``S`` found,
    until no solution at that objective remains.
    """
    model = build_model(net)
    search = _Search(model, node_cap_from_env() if node_cap is None else node_cap)
    supports = _layered_supports(search, net, None, stop_after_first=True)
    return _checked_family(net, supports)


def _checked_family(net: ReactionNetwork, supports) -> MinimalFamily:
    closure = Closure(net)
    masks = []
    for support in supports:
        mask = sum(1 << m for m in support)
        if not closure.complete(mask):
            raise AssertionError(f"ILP support {support} is not complete")
        masks.append(mask)
    return MinimalFamily.from_masks(net, masks)


def restricted_model(net: ReactionNetwork, opts: SearchOptions) -> IlpModel | None:
    """Base model plus rows fixing non-base species out and, if asked, atom rows.

    Returns ``None`` when atom coverage is impossible within the base.
    """
    model = build_model(net)
    base = powerset_base(net, opts.intermediates)
    for m in range(net.M):
        if m not in base:
            model.add_row(Row(f"fix_m{m}", ((1, yvar(m, 0)),), "=", 0))
    if opts.atomic:
        for a, carriers in net.atom_masks.items():
            inside = [m for m in base if carriers >> m & 1]
            if not inside:
                return None
            model.add_row(Row(f"atom_{a}", tuple((1, yvar(m, 0)) for m in inside), ">=", 1))
    return model


def ilp_minimal_initials(net: ReactionNetwork, opts: SearchOptions | None = None) -> MinimalFamily:
    """Inclusion-minimal initial sets by cardinality layers of the 0-1 model.

    Each layer enumerates all solutions of the current minimum objective.
    The exclusion cut of a found set also forbids its supersets, so every
    later optimum is again inclusion-minimal.  Raises :class:`IlpCapped`
    when the node cap runs out.
    """
    opts = opts or SearchOptions(engine="ilp")
    model = restricted_model(net, opts)
    if model is None:
        return MinimalFamily(())
    cap = opts.node_cap if opts.node_cap is not None else node_cap_from_env()
    search = _Search(model, cap)
    supports = _layered_supports(search, net, opts.cap, stop_after_first=False)
    return _checked_family(net, supports)
