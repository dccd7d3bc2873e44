"""Shared independent oracles for the test suite."""

import itertools
import sys
import os

import networkx as nx
import numpy as np
import pytest

LONG_RUN = os.environ.get("SPINLAT_LONG_RUN") == "1"


def dense_hamiltonian(g, b, gamma):
    """H built entry by entry from the definition, for small n."""
    dim = 1 << g.n
    H = np.zeros((dim, dim))
    for s in range(dim):
        z = [1 - 2 * ((s >> i) & 1) for i in range(g.n)]
        H[s, s] = sum(z[u] * z[v] for u, v in g.edges) + b * sum(z)
        for i in range(g.n):
            H[s ^ (1 << i), s] += gamma
    return H


def brute_partial_trace(psi, block, n):
    """rho_A[a, a'] = sum over all (s, s') pairs that agree off the block."""
    dim = 1 << n
    s = np.arange(dim)
    rest = [v for v in range(n) if v not in block]
    a = sum(((s >> v) & 1) << j for j, v in enumerate(sorted(block)))
    c = sum(((s >> v) & 1) << j for j, v in enumerate(rest))
    outer = np.outer(psi, psi) * (c[:, None] == c[None, :])
    rho = np.zeros((1 << len(block), 1 << len(block)))
    np.add.at(rho, (a[:, None], a[None, :]), outer)
    return rho


def labeled_cubic_graphs(n):
    """Every labelled simple cubic graph on n vertices (backtracking)."""
    out = []
    deg = [0] * n
    edges = []

    def rec():
        v = next((i for i in range(n) if deg[i] < 3), None)
        if v is None:
            out.append(tuple(edges))
            return
        last = max((w for (u, w) in edges if u == v), default=v)
        for w in range(last + 1, n):
            if deg[w] < 3 and (v, w) not in edges:
                deg[v] += 1
                deg[w] += 1
                edges.append((v, w))
                rec()
                edges.pop()
                deg[v] -= 1
                deg[w] -= 1

    rec()
    return out


def iso_classes(edge_lists, n):
    """Representatives of the isomorphism classes, by networkx VF2."""
    reps = []
    for edges in edge_lists:
        g = nx.Graph(list(edges))
        g.add_nodes_from(range(n))
        if not any(nx.is_isomorphic(g, r) for r in reps):
            reps.append(g)
    return reps


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240607)


def random_state(rng, n):
    psi = rng.standard_normal(1 << n)
    return psi / np.linalg.norm(psi)


def all_blocks(n):
    for r in range(1, n):
        yield from itertools.combinations(range(n), r)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
