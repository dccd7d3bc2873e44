"""Classical antiferromagnetic frustration by exhaustive spin scan."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from spinlat.errors import BudgetExceeded
from spinlat.lattice.graph import Graph

MAX_SCAN_N = 26
_CHUNK_BITS = 20


@dataclass(frozen=True)
class FrustrationReport:
    bipartite: bool
    min_violations: int
    classical_degeneracy: int
    min_energy: float
    field: float = 0.0


def _chunks(n):
    total = 1 << n
    step = 1 << min(n, _CHUNK_BITS)
    for start in range(0, total, step):
        yield np.arange(start, min(start + step, total), dtype=np.int64)


def classical_energies(g: Graph, states, field: float = 0.0):
    """Energies sum_<ij> z_i z_j + field * sum_i z_i for basis indices.

    Bit i of the index is spin i, bit value 0 meaning z = +1.
    """
    viol = np.zeros(states.shape, dtype=np.int64)
    for u, v in g.edges:
        viol += ((states >> u) & 1) == ((states >> v) & 1)
    energy = (2 * viol - g.m).astype(float)
    if field:
        ones = np.zeros(states.shape, dtype=np.int64)
        for i in range(g.n):
            ones += (states >> i) & 1
        energy += field * (g.n - 2 * ones)
    return energy, viol


def frustration(g: Graph, field: float = 0.0) -> FrustrationReport:
    """Minimum number of unsatisfied antiferromagnetic edges.

    An edge is unsatisfied when its endpoints carry equal spins. With a
    non-zero ``field`` the scan minimizes the classical energy including
    the longitudinal term instead; ``min_violations`` is then the fewest
    unsatisfied edges among the energy minimizers.
    """
    if g.n > MAX_SCAN_N:
        raise BudgetExceeded(f"exhaustive frustration scan limited to n <= {MAX_SCAN_N}, got {g.n}")
    best_e = np.inf
    best_v = None
    count = 0
    for states in _chunks(g.n):
        energy, viol = classical_energies(g, states, field)
        e = energy.min()
        at_min = energy == e
        if e < best_e - 1e-9:
            best_e, best_v, count = e, int(viol[at_min].min()), int(at_min.sum())
        elif abs(e - best_e) <= 1e-9:
            best_v = min(best_v, int(viol[at_min].min()))
            count += int(at_min.sum())
    return FrustrationReport(
        bipartite=g.is_bipartite(),
        min_violations=best_v,
        classical_degeneracy=count,
        min_energy=float(best_e),
        field=float(field),
    )
