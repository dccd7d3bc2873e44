"""Isomorph-free generation of connected cubic graphs.

Graphs are grown from a single vertex. At every step one unsaturated
vertex of the (connected) partial graph is saturated in all possible ways,
using already placed vertices or fresh isolated ones; fresh vertices are
interchangeable, so only the lowest-numbered ones are used. Every cubic
supergraph of a partial graph is reachable this way whatever vertex is
picked, so partial graphs can be collapsed to one representative per
isomorphism class after each step. With ``planar_only`` a partial graph
that is already non-planar is dropped, since planarity is inherited by
subgraphs.
"""

from __future__ import annotations

import logging
from itertools import combinations

from spinlat.errors import BudgetExceeded, InvalidArgument, budget_override
from spinlat.lattice.canon import canonical_labeling
from spinlat.lattice.graph import Graph
from spinlat.lattice.planarity import is_planar

log = logging.getLogger(__name__)

DEFAULT_MAX_N = 14
LONG_RUN_MAX_N = 18


def _check_n(n, long_run):
    if not isinstance(n, int) or n % 2 or n < 4:
        raise InvalidArgument(f"cubic graphs need an even vertex count >= 4, got {n!r}")
    limit = LONG_RUN_MAX_N if (long_run or budget_override()) else DEFAULT_MAX_N
    if n > limit and not budget_override():
        raise BudgetExceeded(f"enumeration of n={n} exceeds the budget n<={limit}; pass long_run or set SPINLAT_BUDGET_OVERRIDE")


def _key(c, edges):
    sub = Graph(c, tuple(edges)) if edges else Graph(c, ())
    cert, perm = canonical_labeling(sub)
    return cert, perm


def _children(n, c, edges, deg):
    unsat = [v for v in range(c) if deg[v] < 3]
    # saturate the most constrained vertex first
    v = max(unsat, key=lambda u: (deg[u], -u))
    need = 3 - deg[v]
    adj_v = {w for e in edges for w in e if v in e}
    cands = [w for w in unsat if w != v and w not in adj_v]
    for nfresh in range(need + 1):
        if c + nfresh > n:
            break
        fresh = list(range(c, c + nfresh))
        for old in combinations(cands, need - nfresh):
            new_edges = list(edges)
            new_deg = deg + [0] * nfresh
            for w in (*old, *fresh):
                new_edges.append((v, w) if v < w else (w, v))
                new_deg[w] += 1
            new_deg[v] = 3
            yield c + nfresh, new_edges, new_deg


def enumerate_cubic(n: int, planar_only: bool = False, long_run: bool = False,
                    min_connectivity: int = 1) -> list[Graph]:
    """All connected simple cubic graphs on ``n`` vertices up to isomorphism.

    Args:
        n: even vertex count, 4 <= n <= 14 (18 with ``long_run``).
        planar_only: keep planar graphs only.
        long_run: unlock n = 16, 18.
        min_connectivity: 3 keeps only 3-connected graphs (with
            ``planar_only`` these are the polyhedral ones).

    Returns:
        Canonically labelled graphs sorted by canonical certificate.
    """
    _check_n(n, long_run)
    if min_connectivity not in (1, 2, 3):
        raise InvalidArgument(f"min_connectivity must be 1, 2 or 3, got {min_connectivity!r}")

    level = {(1, ()): (1, [], [0])}
    done = {}
    step = 0
    while level:
        step += 1
        nxt = {}
        for c, edges, deg in level.values():
            for c2, e2, d2 in _children(n, c, edges, deg):
                saturated = all(x == 3 for x in d2)
                if saturated and c2 < n:
                    continue  # closed component, cannot stay connected
                if planar_only and len(e2) >= 9 and not is_planar(Graph(c2, tuple(e2)), check_connected=False):
                    continue
                cert, perm = _key(c2, e2)
                if saturated:
                    if cert not in done:
                        done[cert] = Graph(n, tuple(e2)).relabel(perm)
                    continue
                if cert in nxt:
                    continue
                relabeled = sorted((min(perm[a], perm[b]), max(perm[a], perm[b])) for a, b in e2)
                new_deg = [0] * c2
                for a, b in relabeled:
                    new_deg[a] += 1
                    new_deg[b] += 1
                nxt[cert] = (c2, relabeled, new_deg)
        log.debug("n=%d step %d: %d partial classes", n, step, len(nxt))
        level = nxt

    out = [done[k] for k in sorted(done)]
    if min_connectivity > 1:
        import networkx as nx

        out = [g for g in out if nx.node_connectivity(g.to_networkx()) >= min_connectivity]
    return [Graph(g.n, g.edges, f"cubic{n}_{i}") for i, g in enumerate(out)]
