"""Quantities computed from eigenstates: reduced density matrices, entropy,
Schmidt rank, majorization cumulants and the adiabatic ratio.

Block bits are packed in ascending vertex order into the row index of a
reduced density matrix (lowest block vertex = least significant bit), the
same convention as the full basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from spinlat.eigensolver import SpectrumResult
from spinlat.errors import DegenerateGapError, InvalidArgument, NumericalValidityError
from spinlat.hamiltonian import HamiltonianOperator, ScheduleDerivative, apply_derivative

NORM_TOL = 1e-8
EIG_FLOOR = -1e-10
DEFAULT_M = 5


@dataclass(frozen=True, eq=False)
class ReducedDensityMatrix:
    block: tuple[int, ...]
    matrix: np.ndarray

    @property
    def size(self) -> int:
        return len(self.block)

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues in descending order."""
        return np.linalg.eigvalsh(self.matrix)[::-1]


@dataclass(frozen=True, eq=False)
class CumulantSeries:
    values: np.ndarray

    @property
    def m(self) -> int:
        return len(self.values)

    def __getitem__(self, l):
        # 1-based, c_1 is the largest probability
        return self.values[l - 1]


def _state(psi, n=None):
    psi = np.asarray(psi, dtype=np.float64)
    if psi.ndim != 1:
        raise InvalidArgument(f"state must be a vector, got shape {psi.shape}")
    if n is not None and psi.shape[0] != 1 << n:
        raise InvalidArgument(f"state has length {psi.shape[0]}, expected 2^{n}")
    if abs(np.linalg.norm(psi) - 1.0) > NORM_TOL:
        raise InvalidArgument(f"state is not normalized (norm {np.linalg.norm(psi):.12g})")
    return psi


def reduced_density(psi, block, n: int) -> ReducedDensityMatrix:
    """Partial trace of |psi><psi| over the complement of ``block``."""
    psi = _state(psi, n)
    block = tuple(sorted(int(v) for v in block))
    if not block or len(block) >= n:
        raise InvalidArgument(f"block must be a non-empty proper subset of the {n} spins, got {block}")
    if len(set(block)) != len(block) or block[0] < 0 or block[-1] >= n:
        raise InvalidArgument(f"block {block} has repeated or out-of-range vertices")
    rest = [v for v in range(n) if v not in set(block)]
    # C-order reshape puts vertex v on axis n-1-v; most significant bit first
    axes = [n - 1 - v for v in reversed(block)] + [n - 1 - v for v in reversed(rest)]
    M = psi.reshape((2,) * n).transpose(axes).reshape(1 << len(block), -1)
    rho = M @ M.T
    rho = 0.5 * (rho + rho.T)
    return ReducedDensityMatrix(block, rho)


def _spectrum(rho: ReducedDensityMatrix) -> np.ndarray:
    lam = rho.eigenvalues()
    if lam[-1] < EIG_FLOOR:
        raise NumericalValidityError(f"reduced density matrix has eigenvalue {lam[-1]:.3e} below {EIG_FLOOR:g}")
    return np.clip(lam, 0.0, None)


def entropy(rho: ReducedDensityMatrix) -> float:
    """Von Neumann entropy in bits."""
    lam = _spectrum(rho)
    lam = lam[lam > 0]
    return float(max(0.0, -np.sum(lam * np.log2(lam))))


def schmidt_rank(rho: ReducedDensityMatrix, tol: float = 1e-10) -> int:
    if not tol > 0:
        raise InvalidArgument(f"tol must be positive, got {tol!r}")
    return int(np.count_nonzero(rho.eigenvalues() > tol))


def _cumulants(p: np.ndarray, m: int) -> CumulantSeries:
    if not isinstance(m, (int, np.integer)) or not 1 <= m <= len(p):
        raise InvalidArgument(f"m must lie in [1, {len(p)}], got {m!r}")
    if m < len(p):
        top = np.partition(p, len(p) - m)[len(p) - m:]
    else:
        top = p
    c = np.cumsum(np.sort(top)[::-1])
    return CumulantSeries(np.minimum(c, 1.0))


def ground_cumulants(psi, m: int = DEFAULT_M) -> CumulantSeries:
    """c_l = sum of the l largest basis probabilities |psi_i|^2."""
    psi = _state(psi)
    return _cumulants(psi * psi, m)


def rho_cumulants(rho: ReducedDensityMatrix, m: int = DEFAULT_M) -> CumulantSeries:
    """Cumulants of the descending eigenvalues of ``rho``."""
    return _cumulants(_spectrum(rho), m)


def transition_element(h: HamiltonianOperator, d: ScheduleDerivative, s: SpectrumResult, target: int) -> float:
    """|<e_target| dH/ds |e_1>|, with ``target`` 1-based."""
    if not isinstance(target, (int, np.integer)) or not 2 <= target <= s.k:
        raise InvalidArgument(f"target must lie in [2, {s.k}], got {target!r}")
    e1 = s.eigenvectors[:, 0]
    et = s.eigenvectors[:, target - 1]
    return float(abs(et @ apply_derivative(h, d, e1)))


def adiabatic_ratio(h: HamiltonianOperator, d: ScheduleDerivative, s: SpectrumResult, target: int) -> float:
    """|<e_target| dH/ds |e_1>| / (E_target - E_1)^2."""
    num = transition_element(h, d, s, target)
    gap = float(s.eigenvalues[target - 1] - s.eigenvalues[0])
    tol = s.degeneracy_tol * max(1.0, abs(float(s.eigenvalues[0])))
    if gap <= tol:
        raise DegenerateGapError(f"gap E_{target} - E_1 = {gap:.3e} is below the degeneracy tolerance {tol:.1e}")
    return num / gap**2
