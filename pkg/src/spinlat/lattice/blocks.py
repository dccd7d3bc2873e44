"""Connected vertex blocks used for bipartite entanglement."""

from __future__ import annotations

import numpy as np

from spinlat.errors import InvalidArgument
from spinlat.lattice.graph import Graph


def ring_block(g: Graph) -> tuple[int, ...]:
    """The inner ring ``0..n/2-1`` of a ladder-on-a-circle graph."""
    half = g.n // 2
    block = tuple(range(half))
    inside = {(u, v) for u, v in g.edges if u < half and v < half}
    if g.n % 2 or len(inside) != half:
        raise InvalidArgument(f"graph {g.name or '<unnamed>'} has no inner ring on vertices 0..{half - 1}")
    return block


def connected_block(g: Graph, size: int, seed: int = 0, ring: bool = False) -> tuple[int, ...]:
    """A connected vertex set of ``size`` vertices, sorted ascending.

    Starts at a random vertex and repeatedly absorbs a uniformly chosen
    frontier vertex. Deterministic in ``(g, size, seed)``. With ``ring``
    the ladder inner ring is returned instead (``size`` must be n/2).
    """
    if not isinstance(size, (int, np.integer)) or not 1 <= size <= g.n:
        raise InvalidArgument(f"block size must lie in [1, {g.n}], got {size!r}")
    if ring:
        if size != g.n // 2:
            raise InvalidArgument(f"ring block has size {g.n // 2}, requested {size}")
        return ring_block(g)
    if not g.is_connected():
        raise InvalidArgument("connected_block needs a connected graph")
    rng = np.random.default_rng(seed)
    adj = g.adjacency()
    start = int(rng.integers(g.n))
    block = {start}
    frontier = set(adj[start])
    while len(block) < size:
        choices = sorted(frontier)
        v = choices[int(rng.integers(len(choices)))]
        block.add(v)
        frontier.discard(v)
        frontier.update(w for w in adj[v] if w not in block)
    return tuple(sorted(block))
