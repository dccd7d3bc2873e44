from spinlat.lattice.blocks import connected_block, ring_block
from spinlat.lattice.canon import canonical_form, canonical_labeling, certificate, is_isomorphic
from spinlat.lattice.enumerate import enumerate_cubic
from spinlat.lattice.families import (
    FAMILIES,
    LADDER_EVEN,
    LADDER_ODD,
    GraphFamily,
    get_family,
    load_corpus,
    resolve_graph,
    resolve_graphs,
)
from spinlat.lattice.frustration import FrustrationReport, frustration
from spinlat.lattice.graph import (
    Graph,
    NonCubicWarning,
    complete_graph,
    dodecahedron,
    dumps,
    k33,
    ladder_on_circle,
    load_graphs,
    loads,
    read_graphs,
    write_graphs,
)
from spinlat.lattice.planarity import is_planar, k33_minor_oracle

__all__ = [
    "FAMILIES",
    "LADDER_EVEN",
    "LADDER_ODD",
    "FrustrationReport",
    "Graph",
    "GraphFamily",
    "NonCubicWarning",
    "canonical_form",
    "canonical_labeling",
    "certificate",
    "complete_graph",
    "connected_block",
    "dodecahedron",
    "dumps",
    "enumerate_cubic",
    "frustration",
    "get_family",
    "is_isomorphic",
    "is_planar",
    "k33",
    "k33_minor_oracle",
    "ladder_on_circle",
    "load_corpus",
    "load_graphs",
    "loads",
    "read_graphs",
    "resolve_graph",
    "resolve_graphs",
    "ring_block",
    "write_graphs",
]
