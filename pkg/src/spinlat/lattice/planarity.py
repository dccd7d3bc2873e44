"""Planarity predicate and an exhaustive K3,3-subdivision oracle."""

from __future__ import annotations

import networkx as nx

from spinlat.errors import BudgetExceeded, InvalidArgument
from spinlat.lattice.graph import Graph

K33_MAX_N = 14


def is_planar(g: Graph, check_connected: bool = True) -> bool:
    """Left-right planarity test (networkx implementation)."""
    if check_connected and not g.is_connected():
        raise InvalidArgument("is_planar expects a connected graph; test components separately")
    planar, _ = nx.check_planarity(g.to_networkx())
    return bool(planar)


def _smooths_to_k33(g_adj, branch, kept):
    """Follow degree-2 chains of the kept subgraph from each branch vertex."""
    pairs = set()
    for b in branch:
        for first in g_adj[b]:
            if (min(b, first), max(b, first)) not in kept:
                continue
            prev, cur = b, first
            while cur not in branch:
                step = [w for w in g_adj[cur] if w != prev and (min(cur, w), max(cur, w)) in kept]
                prev, cur = cur, step[0]
            if cur == b:
                return False
            pairs.add((min(b, cur), max(b, cur)))
    if len(pairs) != 9:
        return False
    # nine distinct branch pairs on six degree-3 vertices: K3,3 iff bipartite 3+3
    adj = {b: set() for b in branch}
    for a, c in pairs:
        adj[a].add(c)
        adj[c].add(a)
    b0 = branch[0]
    side_b = adj[b0]
    side_a = set(branch) - side_b
    return len(side_a) == 3 and all(adj[x] == side_b for x in side_a) and all(adj[y] == side_a for y in side_b)


def k33_minor_oracle(g: Graph) -> bool:
    """True iff ``g`` contains a subdivision of K3,3.

    Searches every edge subset whose vertex degrees lie in {0, 2, 3} with
    exactly six degree-3 vertices, and smooths the degree-2 chains. Only
    meant for small graphs of maximum degree 3, where a K5 subdivision is
    impossible and so this decides planarity independently.
    """
    if g.n > K33_MAX_N:
        raise BudgetExceeded(f"K3,3 search is limited to n <= {K33_MAX_N}, got {g.n}")
    deg = g.degrees()
    if max(deg, default=0) > 3:
        raise InvalidArgument("K3,3 oracle expects maximum degree 3")
    if not g.is_connected():
        raise InvalidArgument("K3,3 oracle expects a connected graph")
    if sum(1 for d in deg if d == 3) < 6 or g.m < 9:
        return False
    adj = g.adjacency()
    edges = g.edges
    m = len(edges)
    remaining = list(deg)  # undecided incident edges per vertex
    kept_deg = [0] * g.n
    kept = []

    def feasible(v):
        k, r = kept_deg[v], remaining[v]
        return any(k <= t <= k + r for t in (0, 2, 3))

    def rec(i):
        if i == m:
            if any(d == 1 for d in kept_deg):
                return False
            branch = [v for v in range(g.n) if kept_deg[v] == 3]
            if len(branch) != 6:
                return False
            return _smooths_to_k33(adj, branch, set(kept))
        u, v = edges[i]
        remaining[u] -= 1
        remaining[v] -= 1
        for take in (True, False):
            if take:
                kept_deg[u] += 1
                kept_deg[v] += 1
                kept.append(edges[i])
            ok = feasible(u) and feasible(v)
            if ok and remaining[u] == 0 and kept_deg[u] not in (0, 2, 3):
                ok = False
            if ok and remaining[v] == 0 and kept_deg[v] not in (0, 2, 3):
                ok = False
            if ok and sum(1 for d in kept_deg if d == 3) <= 6 and rec(i + 1):
                return True
            if take:
                kept_deg[u] -= 1
                kept_deg[v] -= 1
                kept.pop()
        remaining[u] += 1
        remaining[v] += 1
        return False

    return rec(0)
