"""Lowest eigenpairs of the spin Hamiltonian.

Block Lanczos with full reorthogonalization and thick restarts. The block
size defaults to the number of requested eigenpairs, so exactly degenerate
levels (common on symmetric lattices) are resolved instead of being
silently skipped as in single-vector Lanczos.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from spinlat.errors import BudgetExceeded, ConvergenceFailure, InvalidArgument
from spinlat.hamiltonian import HamiltonianOperator, apply

DEFAULT_TOL = 1e-10
DEGENERACY_RTOL = 1e-8
DENSE_MAX_SPINS = 12
MAX_K = 16
MAX_BLOCK = 64
MAX_SEEDS = 64
STALL_WINDOW = 30  # Davidson iterations without a 2x residual drop
BASIS_BYTES = 1 << 30  # Krylov basis memory before capping its size


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    eigenvalues: np.ndarray  # ascending, shape (k,)
    eigenvectors: np.ndarray  # columns, shape (2^N, k)
    residuals: np.ndarray  # ||H v - e v||, verified with an explicit matvec
    iterations: int  # matvecs spent
    degeneracy_classes: tuple[tuple[int, ...], ...]  # 0-based index groups
    degeneracy_tol: float = DEGENERACY_RTOL

    @property
    def k(self) -> int:
        return len(self.eigenvalues)

    def ground_class_size(self) -> int:
        return len(self.degeneracy_classes[0])


def degeneracy_classes(eigenvalues, rtol: float = DEGENERACY_RTOL):
    """Group ascending eigenvalues whose neighbours differ by at most rtol*max(1,|E|)."""
    classes = []
    cur = [0]
    for i in range(1, len(eigenvalues)):
        prev = eigenvalues[i - 1]
        if abs(eigenvalues[i] - prev) <= rtol * max(1.0, abs(prev)):
            cur.append(i)
        else:
            classes.append(tuple(cur))
            cur = [i]
    if len(eigenvalues):
        classes.append(tuple(cur))
    return tuple(classes)


def _fix_sign(v):
    i = int(np.argmax(np.abs(v)))
    return -v if v[i] < 0 else v


def canonicalize(vectors, classes):
    """Gram-Schmidt each degeneracy class in solver order, then fix signs.

    The sign of each vector is chosen so its largest-magnitude amplitude is
    positive. Within a degenerate class the basis is still arbitrary; this
    only makes it reproducible.
    """
    out = np.array(vectors, dtype=np.float64, copy=True)
    for cls in classes:
        idx = list(cls)
        if len(idx) > 1:
            q, r = np.linalg.qr(out[:, idx])
            q *= np.sign(np.where(np.diag(r) == 0, 1.0, np.diag(r)))
            out[:, idx] = q
        for i in idx:
            out[:, i] = _fix_sign(out[:, i])
    return out


def _project_out(w, basis, passes=2):
    # classical Gram-Schmidt as matrix products; two passes restore orthogonality
    if basis.shape[1]:
        for _ in range(passes):
            w -= basis @ (basis.T @ w)
    return w


def _cluster_end(theta, k):
    """Index just past the Ritz cluster that contains the k-th value."""
    spread = 0.0
    for j in range(k, len(theta)):
        step = theta[j] - theta[j - 1]
        if step > 100 * spread + 1e-3:
            return j
        spread = theta[j] - theta[k - 1]
    return len(theta)


def _orthonormalize(w, basis, rng, room, passes=2):
    """Orthonormalize the columns of ``w`` against ``basis`` and each other.

    Columns that collapse (an invariant subspace was reached) are replaced
    by random directions while there is room left in the space; otherwise
    dropped. Returns ``(q, r)`` with ``w ~= basis @ (...) + q @ r``.
    """
    dim, p = w.shape
    scale = max(np.linalg.norm(w, axis=0).max(initial=0.0), 1.0)
    w = _project_out(np.array(w, dtype=np.float64, order="F", copy=True), basis, passes)
    Q = np.zeros((dim, p), order="F")
    qs = []
    r = np.zeros((p, p))
    for j in range(p):
        v = w[:, j]
        for _ in range(2):
            if qs:
                c = Q[:, : len(qs)].T @ v
                r[: len(qs), j] += c
                v = v - Q[:, : len(qs)] @ c
        nrm = np.linalg.norm(v)
        if nrm > 1e-12 * scale:
            r[len(qs), j] = nrm
            Q[:, len(qs)] = v / nrm
            qs.append(Q[:, len(qs)])
            continue
        if basis.shape[1] + len(qs) >= room:
            continue
        for _attempt in range(3):
            v = _project_out(rng.standard_normal((dim, 1)), basis)[:, 0]
            for _ in range(2):
                for q in qs:
                    v -= (q @ v) * q
            nrm = np.linalg.norm(v)
            if nrm > 1e-8:
                Q[:, len(qs)] = v / nrm
                qs.append(Q[:, len(qs)])
                break
    return Q[:, : len(qs)], r[: len(qs)]


def lowest_eigenpairs(
    h: HamiltonianOperator,
    k: int = 4,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    v0=None,
    block_size: int | None = None,
    basis_size: int | None = None,
    max_matvecs: int | None = None,
    degeneracy_rtol: float = DEGENERACY_RTOL,
    method: str = "davidson",
) -> SpectrumResult:
    """The ``k`` lowest eigenpairs of ``h``.

    Args:
        h: operator from :func:`spinlat.hamiltonian.build`.
        k: number of eigenpairs, 1..16.
        tol: residual norm every returned pair must satisfy.
        seed: seeds the random start block.
        v0: optional warm-start vector, used as the first start column.
        block_size: block width; defaults to ``k``.
        basis_size: subspace size before a thick restart.
        max_matvecs: budget; defaults to ``200 k sqrt(N)`` matvecs (at least 1000).
        method: ``"davidson"`` expands with diagonally preconditioned
            residuals; ``"lanczos"`` is plain block Lanczos (unpreconditioned
            Krylov expansion); it is much slower inside near-degenerate
            clusters at small transverse field and can run out of budget there.

    Raises:
        ConvergenceFailure: budget exhausted; carries the best residuals.
    """
    dim = h.dim
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= MAX_K:
        raise InvalidArgument(f"k must lie in [1, {MAX_K}], got {k!r}")
    if k > dim:
        raise InvalidArgument(f"k={k} exceeds the Hilbert space dimension {dim}")
    if not tol > 0:
        raise InvalidArgument(f"tol must be positive, got {tol!r}")
    p = min(block_size or k, dim)
    budget = max_matvecs or max(1000, math.ceil(200 * k * math.sqrt(h.n)))
    rng = np.random.default_rng(seed)

    start = rng.standard_normal((dim, p))
    if v0 is not None:
        v0 = np.asarray(v0, dtype=np.float64)
        if v0.shape != (dim,):
            raise InvalidArgument(f"warm-start vector has shape {v0.shape}, expected ({dim},)")
        if np.linalg.norm(v0) > 0:
            start[:, 0] = v0 / np.linalg.norm(v0)

    if h.params.gamma == 0:
        # diagonal operator: exact by sorting; iterative methods would only
        # see the basis states present in the start block
        idx = np.argsort(h.diag, kind="stable")[:k]
        vecs = np.zeros((dim, k))
        vecs[idx, np.arange(k)] = 1.0
        return _finish(h, h.diag[idx], vecs, 0, degeneracy_rtol)

    if method == "davidson":
        # the preconditioner barely mixes distant diagonal levels at small
        # Gamma, so a random start can lock onto an excited cluster; put
        # every basis state of the lowest diagonal levels into the subspace
        order = np.argsort(h.diag, kind="stable")
        cut = h.diag[order[k - 1]] + 1e-9
        nseed = int(min(MAX_SEEDS, dim // 2, max(2 * k, np.searchsorted(h.diag[order], cut, side="right"))))
        seeds = np.zeros((dim, nseed))
        seeds[order[:nseed], np.arange(nseed)] = 1.0
        init = np.concatenate([start[:, :1], seeds, start[:, 1:]], axis=1) if v0 is not None else np.concatenate([seeds, start], axis=1)
        m = basis_size or min(k + max(6 * p, 40), max(BASIS_BYTES // (16 * dim), k + 2 * p))
        m = min(dim, max(m, init.shape[1] + p + k))
        out = _davidson(h, init, k, tol, m, budget, rng, p)
        matvecs = out["matvecs"]
        best = out["best"]
        if out["converged"]:
            return _finish(h, out["theta"], out["vectors"], matvecs, degeneracy_rtol)
        # stagnation: hand the Ritz vectors to block Lanczos
        X = out["vectors"]
        start = np.concatenate([X[:, :p], rng.standard_normal((dim, max(0, p - X.shape[1])))], axis=1)
    elif method == "lanczos":
        matvecs = 0
        best = np.full(k, np.inf)
    else:
        raise InvalidArgument(f"unknown eigensolver method {method!r}")

    while True:
        m = basis_size or min(k + max(8 * p, 60), max(BASIS_BYTES // (8 * dim), k + 2 * p))
        m = min(dim, max(m, k + p))
        out = _thick_restart(h, start, k, tol, m, budget - matvecs, rng)
        matvecs += out["matvecs"]
        best = np.minimum(best, out["best"])
        if out["converged"]:
            return _finish(h, out["theta"], out["vectors"], matvecs, degeneracy_rtol)
        if out["exhausted"] or matvecs >= budget or p >= min(MAX_BLOCK, dim // 2):
            raise ConvergenceFailure(
                f"no convergence after {matvecs} matvecs (max residual {best.max():.3e}, tol {tol:.1e})",
                residuals=best, eigenvalues=out["theta"],
            )
        # stagnation inside a near-degenerate cluster: widen the block and
        # restart from the current Ritz vectors
        p = min(max(2 * p, _cluster_end(out["ritz_values"], k) + 2), MAX_BLOCK, dim // 2)
        ritz = out["ritz"]
        start = np.concatenate([ritz[:, :p], rng.standard_normal((dim, max(0, p - ritz.shape[1])))], axis=1)


def _finish(h, theta, Y, matvecs, degeneracy_rtol):
    classes = degeneracy_classes(theta, degeneracy_rtol)
    vecs = canonicalize(Y, classes)
    res = np.linalg.norm(apply(h, vecs) - vecs * theta, axis=0)
    return SpectrumResult(np.array(theta, copy=True), vecs, res, matvecs + len(theta), classes, degeneracy_rtol)


def _davidson(h, start, k, tol, m, budget, rng, p, shift_floor=1e-2):
    """Block expansion by diagonally preconditioned residuals.

    Each unconverged Ritz pair (theta, x) contributes (theta - D)^-1 r, with
    D the Hamiltonian diagonal and r = Hx - theta x. A correction that is
    already in the basis (exactly diagonal H) is replaced by r itself, which
    is the plain Lanczos direction.
    """
    dim = h.dim
    d = h.diag
    V = np.zeros((dim, m), order="F")
    AV = np.zeros((dim, m), order="F")
    T = np.zeros((m, m))
    new, _ = _orthonormalize(start, V[:, :0], rng, dim)
    nv = 0
    matvecs = 0
    best = np.full(k, np.inf)
    history = []
    while True:
        w = new.shape[1]
        V[:, nv:nv + w] = new
        AV[:, nv:nv + w] = apply(h, new)
        matvecs += w
        T[:nv + w, nv:nv + w] = V[:, :nv + w].T @ AV[:, nv:nv + w]
        T[nv:nv + w, :nv] = T[:nv, nv:nv + w].T
        nv += w
        theta, S = np.linalg.eigh(T[:nv, :nv])
        # refine the whole cluster the k-th value sits in; a lone vector in
        # a degenerate pair keeps rotating inside it
        kk = min(nv, k)
        if nv > k:
            # Ritz values closer to theta_k than the residual level can swap
            # with it; window from the previous iterate's residuals
            window = 10.0 * (history[-1] if history else np.inf) + 1e-6
            kk = int(np.searchsorted(theta, theta[k - 1] + window, side="right"))
            kk = min(max(kk, k), max(k, (m - p) // 2))
        X = V[:, :nv] @ S[:, :kk]
        R = AV[:, :nv] @ S[:, :kk] - X * theta[:kk]
        res = np.linalg.norm(R, axis=0)
        if kk >= k:
            best = np.minimum(best, res[:k])
            history.append(res[:k].max())
            if np.all(res[:k] <= tol):
                # confirm with an explicit matvec, AV may have drifted
                Xk = X[:, :k]
                res = np.linalg.norm(apply(h, Xk) - Xk * theta[:k], axis=0)
                matvecs += k
                if np.all(res <= tol):
                    return {"converged": True, "theta": theta[:k], "vectors": Xk, "matvecs": matvecs, "best": best}
        stalled = len(history) > STALL_WINDOW and history[-1] > 0.5 * history[-1 - STALL_WINDOW]
        if stalled or matvecs >= budget // 2 or nv >= dim:
            return {"converged": False, "theta": theta[:k], "vectors": X[:, :k], "matvecs": matvecs, "best": best}

        todo = [i for i in range(kk) if res[i] > 0.5 * tol] or list(range(kk))
        todo = todo[:max(p, min(MAX_BLOCK, m - 2 * kk))]
        corr = np.empty((dim, len(todo)), order="F")
        for j, i in enumerate(todo):
            den = theta[i] - d
            small = np.abs(den) < shift_floor
            den[small] = np.where(den[small] < 0, -shift_floor, shift_floor)
            corr[:, j] = R[:, i] / den

        if nv + len(todo) > m:
            keep = min(nv, max(2 * kk, (m + kk) // 2), m - len(todo))
            V[:, :keep] = V[:, :nv] @ S[:, :keep]
            AV[:, :keep] = AV[:, :nv] @ S[:, :keep]
            T[:] = 0.0
            T[np.arange(keep), np.arange(keep)] = theta[:keep]
            nv = keep
        new, _ = _orthonormalize(corr, V[:, :nv], rng, 0)
        if new.shape[1] < len(todo):
            extra, _ = _orthonormalize(R[:, todo], np.concatenate([V[:, :nv], new], axis=1), rng, 0)
            new = np.concatenate([new, extra[:, : len(todo) - new.shape[1]]], axis=1)
        if new.shape[1] == 0:
            new, _ = _orthonormalize(rng.standard_normal((dim, 1)), V[:, :nv], rng, dim)


def _thick_restart(h, start, k, tol, m, budget, rng):
    dim = h.dim
    V = np.zeros((dim, m), order="F")
    T = np.zeros((m, m))
    q, _ = _orthonormalize(start, V[:, :0], rng, dim)
    nv = q.shape[1]
    V[:, :nv] = q
    p = nv
    active = 0  # first column of the block awaiting a matvec
    matvecs = 0
    best = np.full(k, np.inf)
    history = []

    def result(converged, theta, Y=None, exhausted=False, ritz=None, ritz_values=None):
        return {"converged": converged, "theta": theta, "vectors": Y, "matvecs": matvecs,
                "best": best, "exhausted": exhausted, "ritz": ritz, "ritz_values": ritz_values}

    while True:
        while True:
            W = apply(h, V[:, active:nv])
            matvecs += nv - active
            coef = V[:, :nv].T @ W
            T[:nv, active:nv] = coef
            T[active:nv, :nv] = coef.T
            blk = T[active:nv, active:nv]
            T[active:nv, active:nv] = 0.5 * (blk + blk.T)
            W -= V[:, :nv] @ coef
            qn, r = _orthonormalize(W, V[:, :nv], rng, dim, passes=1)
            if nv + qn.shape[1] > m or qn.shape[1] == 0:
                break
            width = qn.shape[1]
            V[:, nv:nv + width] = qn
            T[nv:nv + width, active:nv] = r
            T[active:nv, nv:nv + width] = r.T
            active, nv = nv, nv + width

        theta, S = np.linalg.eigh(T[:nv, :nv])
        if qn.shape[1]:
            est = np.linalg.norm(r @ S[active:nv, :], axis=0)
        else:
            est = np.zeros(nv)
        if nv >= k:
            best = np.minimum(best, est[:k])
            if np.all(est[:k] <= 0.5 * tol):
                # confirm with an explicit matvec before accepting
                Y = V[:, :nv] @ S[:, :k]
                res = np.linalg.norm(apply(h, Y) - Y * theta[:k], axis=0)
                matvecs += k
                if np.all(res <= tol):
                    return result(True, theta[:k], Y)
        if nv >= dim:
            return result(False, theta[:k], exhausted=True)
        history.append(est[:k].max() if nv >= k else np.inf)
        stalled = len(history) > 4 and history[-1] > 0.3 * history[-5]
        if matvecs >= budget or stalled:
            keep = min(nv, MAX_BLOCK)
            return result(False, theta[:k], ritz=V[:, :nv] @ S[:, :keep], ritz_values=theta)

        # thick restart: keep the lowest Ritz vectors plus the residual block
        width = qn.shape[1]
        keep = min(nv, max(k + p, (m - width + k) // 2), m - width)
        Y = V[:, :nv] @ S[:, :keep]
        V[:, :keep] = Y
        T[:] = 0.0
        T[np.arange(keep), np.arange(keep)] = theta[:keep]
        coupling = r @ S[active:nv, :keep]
        V[:, keep:keep + width] = qn
        T[keep:keep + width, :keep] = coupling
        T[:keep, keep:keep + width] = coupling.T
        active, nv = keep, keep + width


def dense_spectrum(h: HamiltonianOperator):
    """All eigenpairs by dense diagonalization (test oracle, N <= 12)."""
    if h.n > DENSE_MAX_SPINS:
        raise BudgetExceeded(f"dense diagonalization limited to N <= {DENSE_MAX_SPINS}, got {h.n}")
    mat = h.dense()
    return np.linalg.eigh(0.5 * (mat + mat.T))


def gaps(s: SpectrumResult) -> tuple[float, float]:
    """(E2 - E1, E3 - E1)."""
    if s.k < 3:
        raise InvalidArgument(f"gaps need at least 3 eigenvalues, got {s.k}")
    e = s.eigenvalues
    return max(0.0, float(e[1] - e[0])), max(0.0, float(e[2] - e[0]))
