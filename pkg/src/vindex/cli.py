"""Command line interface: ``vindex <command> ...``.

Exit codes: 0 success, 1 ``--verify`` found a problem, 2 parse or usage
error, 3 unknown species, 4 engine guard (base too large, node cap),
5 no atomic compositions.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import statistics
import sys
import time
from contextlib import contextmanager
from typing import Sequence

from . import __version__
from .datasets import resolve_network
from .generate import GeneratorParams, generate_text
from .ilp import IlpCapped, Row, build_model, export_lp, restricted_model
from .lexenum import enumerate_minimal, stderr_progress
from .minimal import BaseTooLarge, Engine, SearchOptions, find_minimal_initials, verify_family
from .network import (
    NoAtomsError,
    ParseError,
    ReactionNetwork,
    UnknownSpeciesError,
    atomic_saving,
    count_covering_subsets,
    parse_network,
)
from .volpert import volpert_index

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_PARSE = 2
EXIT_UNKNOWN = 3
EXIT_GUARD = 4
EXIT_NO_ATOMS = 5


class Report:
    """Accumulates one RunReport; keys are emitted in a fixed order."""

    def __init__(self, argv: Sequence[str], command: str, seed: int | None):
        self.data = {
            "command": {"name": command, "argv": list(argv)},
            "seed": seed,
            "network": None,
            "options": {},
            "results": {},
            "timing_ms": {},
            "warnings": [],
        }

    def network(self, net: ReactionNetwork, source: str) -> None:
        self.data["network"] = {
            "source": source,
            "M": net.M,
            "R": net.R,
            "species": [sp.name for sp in net.species],
            "atoms": list(net.atoms),
        }

    @contextmanager
    def timed(self, phase: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.data["timing_ms"][phase] = round((time.perf_counter() - start) * 1000, 3)

    def warn(self, message: str) -> None:
        self.data["warnings"].append(message)


def _names(raw: Sequence[str] | None) -> list[str]:
    """Accept ``E S``, ``E,S`` or a mix of both."""
    out: list[str] = []
    for item in raw or ():
        out += [p for p in item.split(",") if p]
    return out


def _load(args, report: Report) -> ReactionNetwork:
    with report.timed("parse"):
        net = resolve_network(args.file)
    report.network(net, args.file)
    return net


def _search_options(args, engine: str | None = None) -> SearchOptions:
    return SearchOptions(
        intermediates=frozenset(_names(args.intermediates)),
        atomic=args.atomic,
        cap=args.cap,
        engine=engine or args.engine,
        brute_limit=None if args.brute_limit == 0 else args.brute_limit,
        order=args.ordering,
        reorder=args.order,
        shards=args.shards,
        node_cap=args.node_cap,
    )


def _check_names(net: ReactionNetwork, names: Sequence[str]) -> None:
    net.species_set(names)


def _fmt_index(value) -> str:
    return "inf" if value == float("inf") else str(value)


def _step_label(net: ReactionNetwork, r: int) -> str:
    step = net.steps[r]

    def side(part):
        if not part:
            return "0"
        return " + ".join((f"{c} " if c != 1 else "") + net.species[m].name for m, c in part.items())

    return f"{side(step.reactants)} -> {side(step.products)}"


def _set_line(names: Sequence[str]) -> str:
    return " ".join(names) if names else "{}"


# --- commands ------------------------------------------------------------------

def cmd_index(args, report: Report) -> tuple[int, str]:
    net = _load(args, report)
    initial_names = _names(args.initial)
    initial = net.species_set(initial_names)
    report.data["options"] = {"initial": initial.names()}
    with report.timed("index"):
        ix = volpert_index(net, initial)
    results = ix.to_json()
    results["all_finite"] = ix.all_finite
    results["zero_complex_active"] = ix.zero_complex_active
    report.data["results"] = results
    width = max([len("Species")] + [len(sp.name) for sp in net.species])
    lines = [f"{'Species':<{width}}  Index"]
    lines += [f"{sp.name:<{width}}  {_fmt_index(i)}" for sp, i in zip(net.species, ix.species_index)]
    lines.append("")
    labels = [_step_label(net, r) for r in range(net.R)]
    width = max([len("Reaction step")] + [len(s) for s in labels])
    lines.append(f"{'Reaction step':<{width}}  Index")
    lines += [f"{s:<{width}}  {_fmt_index(i)}" for s, i in zip(labels, ix.step_index)]
    return EXIT_OK, "\n".join(lines)


def _warn_opaque(net: ReactionNetwork, report: Report) -> None:
    opaque = net.opaque_species
    if opaque:
        report.warn("species without atomic composition: " + ", ".join(opaque))


def cmd_minimal(args, report: Report) -> tuple[int, str]:
    net = _load(args, report)
    opts = _search_options(args)
    _check_names(net, opts.intermediates)
    report.data["options"] = {
        "engine": opts.engine.value,
        "intermediates": sorted(opts.intermediates),
        "atomic": opts.atomic,
        "cap": opts.cap,
        "ordering": opts.order,
        "order": opts.reorder,
        "shards": opts.shards,
        "verify": args.verify,
    }
    if opts.atomic:
        _warn_opaque(net, report)
    with report.timed("search"):
        if opts.engine is Engine.LEX and not args.quiet:
            family = enumerate_minimal(net, opts, progress=stderr_progress)
        else:
            family = find_minimal_initials(net, opts)
    report.data["results"] = {"count": len(family), "sets": family.names()}
    code = EXIT_OK
    if args.verify:
        with report.timed("verify"):
            problems = verify_family(net, family, atomic=opts.atomic)
        report.data["results"]["verified"] = not problems
        for p in problems:
            report.warn("verify: " + p)
        if problems:
            code = EXIT_VERIFY
    return code, "\n".join(_set_line(s) for s in family.names())


def cmd_export_ilp(args, report: Report) -> tuple[int, str]:
    net = _load(args, report)
    opts = SearchOptions(intermediates=frozenset(_names(args.intermediates)), atomic=args.atomic, engine="ilp")
    _check_names(net, opts.intermediates)
    report.data["options"] = {"intermediates": sorted(opts.intermediates), "atomic": opts.atomic,
                              "output": args.output}
    with report.timed("build"):
        model = restricted_model(net, opts)
    if model is None:
        report.warn("some atom has no carrier outside the intermediates; model is infeasible")
        # still emit the model, with an explicitly infeasible row
        model = build_model(net)
        model.add_row(Row("atom_none", (), ">=", 1))
    text = export_lp(model)
    report.data["results"] = {"variables": len(model.variables), "rows": len(model.rows)}
    if args.output and args.output != "-":
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        return EXIT_OK, f"wrote {args.output}: {len(model.variables)} variables, {len(model.rows)} rows"
    return EXIT_OK, text.rstrip("\n")


def cmd_saving(args, report: Report) -> tuple[int, str]:
    net = _load(args, report)
    _warn_opaque(net, report)
    with report.timed("count"):
        ratio = atomic_saving(net)
        covering = count_covering_subsets(net)
    report.data["results"] = {
        "covering": covering,
        "nonempty_subsets": (1 << net.M) - 1,
        "ratio": f"{ratio.numerator}/{ratio.denominator}",
        "value": round(float(ratio), 4),
    }
    return EXIT_OK, f"{float(ratio):.4f}"


def cmd_bench(args, report: Report) -> tuple[int, str]:
    if args.random is not None:
        text = generate_text(GeneratorParams(args.random, args.random_steps or args.random + 3), args.seed)
        net = parse_network(text)
        report.network(net, f"random:M={args.random}:seed={args.seed}")
    else:
        net = _load(args, report)
    engines = _names(args.engines) or [e.value for e in Engine]
    report.data["options"] = {"engines": engines, "repetitions": args.repetitions}
    rows = []
    reference = None
    for name in engines:
        opts = SearchOptions(engine=name, brute_limit=None)
        times = []
        family = None
        for _ in range(args.repetitions):
            start = time.perf_counter()
            family = find_minimal_initials(net, opts)
            times.append((time.perf_counter() - start) * 1000)
        if reference is None:
            reference = family.masks
        rows.append({
            "engine": name,
            "median_ms": round(statistics.median(times), 3),
            "sets": len(family),
            "agrees": family.masks == reference,
        })
    report.data["results"] = {"rows": rows, "agree": all(r["agrees"] for r in rows)}
    if args.csv:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=["engine", "median_ms", "sets", "agrees"], lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return EXIT_OK, buf.getvalue().rstrip("\n")
    lines = [f"{r['engine']:<6} {r['median_ms']:>10.3f} ms  {r['sets']} sets  {'agree' if r['agrees'] else 'DIFFER'}"
             for r in rows]
    return EXIT_OK, "\n".join(lines)


def cmd_gen(args, report: Report) -> tuple[int, str]:
    params = GeneratorParams(args.species, args.steps, args.max_complex, args.atoms, args.zero_complex)
    report.data["options"] = {
        "species": params.species, "steps": params.steps, "max_complex": params.max_complex,
        "atoms": params.atoms, "zero_complex": params.zero_complex,
    }
    text = generate_text(params, args.seed)
    net = parse_network(text)
    report.network(net, f"random:seed={args.seed}")
    report.data["results"] = {"text": text}
    if args.output and args.output != "-":
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        return EXIT_OK, f"wrote {args.output}"
    return EXIT_OK, text.rstrip("\n")


# --- parser ------------------------------------------------------------------

def _add_search_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--intermediates", nargs="*", default=[], metavar="NAME",
                   help="species never allowed in an initial set")
    p.add_argument("--atomic", action="store_true", help="require every atom to be present initially")


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    # subcommands repeat the flags with suppressed defaults so that a flag
    # given before the subcommand is not reset by the subparser
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--json", action="store_true", default=d(False), help="print a JSON report")
    p.add_argument("--quiet", action="store_true", default=d(False), help="no progress or warnings on stderr")
    p.add_argument("--seed", type=int, default=d(0), help="seed for anything random (default 0)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)

    parser = argparse.ArgumentParser(prog="vindex", description="Volpert indices and minimal initial species sets.")
    _global_flags(parser, suppress=False)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", parents=[common], help="Volpert indices from an initial set")
    p.add_argument("file", help="network file or bundled network name")
    p.add_argument("initial", nargs="*", help="initial species (space or comma separated)")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("minimal", parents=[common], help="all minimal initial sets")
    p.add_argument("file")
    p.add_argument("--engine", choices=[e.value for e in Engine], default="brute")
    _add_search_flags(p)
    p.add_argument("--cap", type=int, help="largest cardinality to consider")
    p.add_argument("--order", choices=("input", "frequency"), default="input",
                   help="species order for the lex engine")
    p.add_argument("--ordering", choices=("lex", "revlex"), default="revlex",
                   help="vector ordering for the lex engine")
    p.add_argument("--shards", type=int, default=1, help="worker processes for the lex engine")
    p.add_argument("--brute-limit", type=int, default=25, help="largest base for brute force (0: none)")
    p.add_argument("--node-cap", type=int, help="branch and bound node limit (default VINDEX_ILP_NODECAP or 1e7)")
    p.add_argument("--verify", action="store_true", help="re-check every returned set")
    p.set_defaults(func=cmd_minimal)

    p = sub.add_parser("export-ilp", parents=[common], help="write the 0-1 model as CPLEX LP")
    p.add_argument("file")
    _add_search_flags(p)
    p.add_argument("-o", "--output", help="output path (default stdout)")
    p.set_defaults(func=cmd_export_ilp)

    p = sub.add_parser("saving", parents=[common], help="share of subsets carrying every atom")
    p.add_argument("file")
    p.set_defaults(func=cmd_saving)

    p = sub.add_parser("bench", parents=[common], help="time the engines on one network")
    p.add_argument("file", nargs="?")
    p.add_argument("--engines", nargs="*", help="engines to run (default all)")
    p.add_argument("--repetitions", type=int, default=3)
    p.add_argument("--random", type=int, metavar="M", help="benchmark a generated network with M species")
    p.add_argument("--random-steps", type=int, metavar="R")
    p.add_argument("--csv", action="store_true", help="CSV table instead of text")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen", parents=[common], help="emit a random network")
    p.add_argument("--species", type=int, default=8)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--max-complex", type=int, default=3)
    p.add_argument("--atoms", type=int, default=0, help="size of the atom alphabet (0: opaque names)")
    p.add_argument("--zero-complex", action="store_true", help="allow steps starting from the zero complex")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)
    return parser


def _validate(parser, args) -> None:
    if args.command == "bench":
        if (args.file is None) == (args.random is None):
            parser.error("bench needs a network file or --random M")
        if args.repetitions < 1:
            parser.error("--repetitions must be positive")
    if args.command == "minimal":
        if args.shards < 1:
            parser.error("--shards must be positive")
        if args.cap is not None and args.cap < 1:
            parser.error("--cap must be positive")


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate(parser, args)
    report = Report(argv, args.command, args.seed)
    try:
        code, text = args.func(args, report)
    except ParseError as exc:
        return _fail(args, report, EXIT_PARSE, f"parse error: {exc}")
    except FileNotFoundError as exc:
        return _fail(args, report, EXIT_PARSE, str(exc))
    except UnknownSpeciesError as exc:
        return _fail(args, report, EXIT_UNKNOWN, str(exc))
    except (BaseTooLarge, IlpCapped) as exc:
        return _fail(args, report, EXIT_GUARD, f"engine guard: {exc}")
    except NoAtomsError as exc:
        return _fail(args, report, EXIT_NO_ATOMS, str(exc))
    except ValueError as exc:
        return _fail(args, report, EXIT_PARSE, str(exc))
    if args.json:
        print(json.dumps(report.data, indent=2))
    else:
        print(text)
        if not args.quiet:
            for w in report.data["warnings"]:
                print(f"warning: {w}", file=sys.stderr)
    return code


def _fail(args, report: Report, code: int, message: str) -> int:
    report.data["error"] = {"code": code, "message": message}
    if args.json:
        print(json.dumps(report.data, indent=2))
    print(f"vindex: {message}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
