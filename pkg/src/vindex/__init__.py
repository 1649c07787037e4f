"""Volpert indexing of reaction networks and minimal initial species sets."""

from .datasets import bundled, bundled_names, resolve_network
from .formula import FormulaError, parse_formula
from .generate import GeneratorParams, generate_network, generate_text
from .ilp import (
    IlpCapped,
    IlpModel,
    IlpSolution,
    build_model,
    enumerate_min_cardinality_sets,
    export_lp,
    ilp_minimal_initials,
    read_lp,
    solve_min_cardinality,
)
from .lexenum import enumerate_minimal, next_lex, next_revlex
from .minimal import (
    BaseTooLarge,
    Engine,
    MinimalFamily,
    SearchOptions,
    brute_force_minimal_initials,
    find_minimal_initials,
    minimal_ones,
    powerset_base,
    verify_family,
)
from .network import (
    NoAtomsError,
    ParseError,
    ReactionNetwork,
    SpeciesSet,
    UnknownSpeciesError,
    VindexError,
    atomic_saving,
    atoms_present,
    format_network,
    load_network,
    parse_network,
)
from .volpert import INF, VolpertIndexing, build_volpert_graph, finite_indices, volpert_index

__version__ = "0.1.0"
