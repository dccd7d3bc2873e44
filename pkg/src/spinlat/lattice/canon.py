"""Canonical labelling by colour refinement plus individualization.

The search tree is built from label-invariant choices only (degree-seeded
colours, refinement to an equitable partition, branching on the first
smallest non-singleton cell), so the lexicographically largest leaf
certificate is an isomorphism invariant. No automorphism pruning: the
graphs handled here are small and subcubic, where the number of leaves
stays modest.
"""

from __future__ import annotations

from spinlat.lattice.graph import Graph


def _refine(adj, colors):
    """Refine a colouring to the coarsest equitable one.

    Colours are dense ints 0..k-1; new colour names are ranks of the
    (old colour, sorted neighbour colours) signatures, which keeps the
    naming label-invariant and preserves the old cell order.
    """
    n = len(adj)
    ncolors = len(set(colors))
    while True:
        sigs = [(colors[v], tuple(sorted(colors[w] for w in adj[v]))) for v in range(n)]
        ranks = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [ranks[s] for s in sigs]
        if len(ranks) == ncolors:
            return new
        colors, ncolors = new, len(ranks)


def _individualize(colors, v):
    # v gets a fresh colour ordered just before the rest of its cell
    c = colors[v]
    out = [2 * x + (1 if x == c else 0) for x in colors]
    out[v] = 2 * c
    ranks = {x: i for i, x in enumerate(sorted(set(out)))}
    return [ranks[x] for x in out]


def _certificate(edges, colors):
    return tuple(sorted((min(colors[u], colors[v]), max(colors[u], colors[v])) for u, v in edges))


def canonical_labeling(g: Graph, initial_colors=None):
    """Return ``(certificate, perm)``.

    ``perm[v]`` is the canonical position of vertex ``v``. Two graphs are
    isomorphic iff their certificates (sorted relabelled edge tuples, with
    the vertex count) are equal.
    """
    adj = g.adjacency()
    if initial_colors is None:
        initial_colors = [len(a) for a in adj]
    ranks = {x: i for i, x in enumerate(sorted(set(initial_colors)))}
    root = _refine(adj, [ranks[x] for x in initial_colors])

    best_cert = None
    best_perm = None
    stack = [root]
    while stack:
        colors = stack.pop()
        k = len(set(colors))
        if k == g.n:
            cert = _certificate(g.edges, colors)
            if best_cert is None or cert > best_cert:
                best_cert, best_perm = cert, colors
            continue
        sizes = {}
        for c in colors:
            sizes[c] = sizes.get(c, 0) + 1
        target = min((s, c) for c, s in sizes.items() if s > 1)[1]
        for v in range(g.n):
            if colors[v] == target:
                stack.append(_refine(adj, _individualize(colors, v)))
    return (g.n, best_cert), list(best_perm)


def certificate(g: Graph):
    return canonical_labeling(g)[0]


def canonical_form(g: Graph) -> Graph:
    """The canonical relabelling of ``g`` (equal for isomorphic graphs)."""
    _, perm = canonical_labeling(g)
    return g.relabel(perm)


def is_isomorphic(a: Graph, b: Graph) -> bool:
    return a.n == b.n and a.m == b.m and certificate(a) == certificate(b)
