"""Matrix-free transverse-field Ising operator on the 2^N spin basis.

    H = sum_<ij> Z_i Z_j + B sum_i Z_i + Gamma sum_i X_i

Bit i of a basis index is spin i; bit value 0 is z = +1. In this basis H
is real symmetric, so everything is done in float64.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from spinlat.errors import BudgetExceeded, InvalidArgument, budget_override
from spinlat.lattice.graph import Graph

MAX_SPINS = 24


@dataclass(frozen=True)
class FieldParams:
    b: float
    gamma: float

    def __post_init__(self):
        if not (np.isfinite(self.b) and np.isfinite(self.gamma)):
            raise InvalidArgument(f"field strengths must be finite, got B={self.b}, Gamma={self.gamma}")


@dataclass(frozen=True)
class ScheduleDerivative:
    """Rates dB/ds and dGamma/ds along an interpolation path."""

    db: float
    dgamma: float

    def __post_init__(self):
        if not (np.isfinite(self.db) and np.isfinite(self.dgamma)):
            raise InvalidArgument("schedule derivative must be finite")


def spin_values(n: int, i: int) -> np.ndarray:
    """z_i(s) for every basis index s, as int8."""
    s = np.arange(1 << n, dtype=np.int64)
    return (1 - 2 * ((s >> i) & 1)).astype(np.int8)


def magnetization(n: int) -> np.ndarray:
    """sum_i z_i(s) for every basis index."""
    s = np.arange(1 << n, dtype=np.int64)
    ones = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        ones += (s >> i) & 1
    return (n - 2 * ones).astype(np.float64)


def _flip_sum(x: np.ndarray, n: int) -> np.ndarray:
    """sum_i x[s XOR 2^i], for a vector or a (2^n, p) block of vectors."""
    x = np.ascontiguousarray(x)
    tail = x.shape[1:]
    out = np.zeros(x.shape)
    for i in range(n):
        view = x.reshape((1 << (n - 1 - i), 2, 1 << i) + tail)
        out.reshape(view.shape)[...] += view[:, ::-1]
    return out


@dataclass(frozen=True, eq=False)
class HamiltonianOperator:
    graph: Graph
    params: FieldParams
    diag: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def dim(self) -> int:
        return 1 << self.graph.n

    def __matmul__(self, x):
        return apply(self, x)

    def dense(self) -> np.ndarray:
        """Dense matrix, for small N only."""
        return self @ np.eye(self.dim)


def build(g: Graph, p: FieldParams, max_spins: int | None = None) -> HamiltonianOperator:
    limit = MAX_SPINS if max_spins is None else max_spins
    if g.n > limit and not budget_override():
        raise BudgetExceeded(f"N={g.n} exceeds the {limit}-spin budget; set SPINLAT_BUDGET_OVERRIDE to force")
    s = np.arange(1 << g.n, dtype=np.int64)
    diag = np.zeros(1 << g.n, dtype=np.float64)
    for u, v in g.edges:
        diag += 1.0 - 2.0 * (((s >> u) ^ (s >> v)) & 1)
    if p.b:
        diag += p.b * magnetization(g.n)
    diag.setflags(write=False)
    return HamiltonianOperator(g, p, diag)


def _check(h, x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (1, 2) or x.shape[0] != h.dim:
        raise InvalidArgument(f"state has shape {x.shape}, operator acts on dimension {h.dim}")
    return x


def apply(h: HamiltonianOperator, x) -> np.ndarray:
    """y[s] = diag[s] x[s] + Gamma sum_i x[s XOR 2^i]. Accepts (2^N,) or (2^N, p)."""
    x = _check(h, x)
    d = h.diag if x.ndim == 1 else h.diag[:, None]
    y = d * x
    if h.params.gamma:
        y += h.params.gamma * _flip_sum(x, h.n)
    return y


def apply_derivative(h: HamiltonianOperator, d: ScheduleDerivative, x) -> np.ndarray:
    """dH/ds x = db sum_i Z_i x + dgamma sum_i X_i x."""
    x = _check(h, x)
    y = np.zeros_like(x)
    if d.db:
        mag = magnetization(h.n)
        y += d.db * (mag if x.ndim == 1 else mag[:, None]) * x
    if d.dgamma:
        y += d.dgamma * _flip_sum(x, h.n)
    return y

