"""Named graph families, the bundled corpus and the graph shorthand syntax."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Callable

from spinlat.errors import InvalidArgument
from spinlat.lattice.enumerate import enumerate_cubic
from spinlat.lattice.graph import Graph, ladder_on_circle, loads, read_graphs


@dataclass(frozen=True)
class GraphFamily:
    name: str
    sizes: tuple[int, ...]
    build: Callable[[int], Graph]

    def __call__(self, n: int) -> Graph:
        if n not in self.sizes:
            raise InvalidArgument(f"family {self.name} has no member with N={n}; sizes {self.sizes}")
        return self.build(n)


# Non-frustrated ladders have an even number of vertices on each ring.
LADDER_EVEN = GraphFamily("ladder_even", tuple(range(8, 33, 4)), ladder_on_circle)
LADDER_ODD = GraphFamily("ladder_odd", tuple(range(6, 31, 4)), ladder_on_circle)

FAMILIES = {f.name: f for f in (LADDER_EVEN, LADDER_ODD)}


def corpus_names() -> list[str]:
    return sorted(p.name[:-2] for p in resources.files("spinlat.data").iterdir() if p.name.endswith(".g"))


def load_corpus(name: str) -> list[Graph]:
    """Graphs from a bundled corpus file such as ``ladders`` or ``pentagonal``."""
    path = resources.files("spinlat.data") / f"{name}.g"
    if not path.is_file():
        raise InvalidArgument(f"no bundled corpus {name!r}; available: {', '.join(corpus_names())}")
    return loads(path.read_text(encoding="utf-8"))


def corpus_family(name: str) -> GraphFamily:
    graphs = {g.n: g for g in load_corpus(name)}
    return GraphFamily(name, tuple(sorted(graphs)), graphs.__getitem__)


def get_family(name: str) -> GraphFamily:
    if name in FAMILIES:
        return FAMILIES[name]
    return corpus_family(name)


def _pick(graphs, name, where):
    if name is None:
        return graphs
    hits = [g for g in graphs if g.name == name]
    if not hits:
        raise InvalidArgument(f"no graph named {name!r} in {where}")
    return hits


def resolve_graphs(source: str, long_run: bool = False) -> list[Graph]:
    """Expand a graph shorthand into graphs.

    ``ladder:<N>``, ``file:<path>[#<name>]``, ``corpus:<name>[#<graph>]``,
    ``enum:<N>[:planar][:3conn]``.
    """
    kind, _, rest = source.partition(":")
    if kind == "ladder":
        if not rest.isdigit():
            raise InvalidArgument(f"bad ladder size in {source!r}")
        return [ladder_on_circle(int(rest))]
    if kind == "file":
        path, _, name = rest.partition("#")
        return _pick(read_graphs(path), name or None, path)
    if kind == "corpus":
        cname, _, name = rest.partition("#")
        return _pick(load_corpus(cname), name or None, cname)
    if kind == "enum":
        parts = rest.split(":")
        try:
            n = int(parts[0])
        except ValueError:
            raise InvalidArgument(f"bad enumeration size in {source!r}") from None
        flags = set(parts[1:])
        unknown = flags - {"planar", "3conn"}
        if unknown:
            raise InvalidArgument(f"unknown enum flags {sorted(unknown)} in {source!r}")
        return enumerate_cubic(n, planar_only="planar" in flags, long_run=long_run,
                               min_connectivity=3 if "3conn" in flags else 1)
    raise InvalidArgument(f"unrecognised graph source {source!r}")


def resolve_graph(source: str) -> Graph:
    graphs = resolve_graphs(source)
    if len(graphs) != 1:
        raise InvalidArgument(f"{source!r} names {len(graphs)} graphs; select one with #<name>")
    return graphs[0]
