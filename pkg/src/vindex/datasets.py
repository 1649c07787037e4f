"""Networks shipped with the package."""

from __future__ import annotations

import os
from importlib import resources

from .network import ReactionNetwork, load_network, parse_network


def bundled_names() -> list[str]:
    files = resources.files("vindex") / "data"
    return sorted(p.name[:-4] for p in files.iterdir() if p.name.endswith(".rxn"))


def bundled_text(name: str) -> str:
    name = name[:-4] if name.endswith(".rxn") else name
    if name not in bundled_names():
        raise FileNotFoundError(f"no bundled network named {name!r}")
    return (resources.files("vindex") / "data" / f"{name}.rxn").read_text(encoding="utf-8")


def bundled(name: str) -> ReactionNetwork:
    return parse_network(bundled_text(name))


def resolve_network(source: str) -> ReactionNetwork:
    """Load a file path, falling back to a bundled network of that name."""
    if os.path.exists(source):
        return load_network(source)
    return bundled(os.path.basename(source))
