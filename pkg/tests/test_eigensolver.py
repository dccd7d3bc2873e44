import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinlat.eigensolver import (
    SpectrumResult,
    canonicalize,
    degeneracy_classes,
    dense_spectrum,
    gaps,
    lowest_eigenpairs,
)
from spinlat.errors import BudgetExceeded, ConvergenceFailure, InvalidArgument
from spinlat.hamiltonian import FieldParams, build
from spinlat.lattice import Graph, enumerate_cubic, ladder_on_circle

CUBIC = enumerate_cubic(4) + enumerate_cubic(6) + enumerate_cubic(8) + enumerate_cubic(10, planar_only=True)


def _check(s, h, tol=1e-10):
    assert np.all(np.diff(s.eigenvalues) >= 0)
    assert np.all(s.residuals <= tol)
    V = s.eigenvectors
    assert np.abs(V.T @ V - np.eye(s.k)).max() <= 1e-8
    assert np.allclose(np.linalg.norm(h @ V - V * s.eigenvalues, axis=0), s.residuals, atol=1e-12)


def test_two_spins_diagonal():
    h = build(Graph(2, ((0, 1),)), FieldParams(0, 0))
    s = lowest_eigenpairs(h, 2)
    assert list(s.eigenvalues) == [-1, -1]
    assert s.degeneracy_classes == ((0, 1),)


@pytest.mark.parametrize("b, gamma", [(0.3, 0.4), (-1.0, 2.0), (0.0, 1.0), (1.5, 0.0)])
def test_single_spin_closed_form(b, gamma):
    h = build(Graph(1, ()), FieldParams(b, gamma))
    s = lowest_eigenpairs(h, 2)
    r = np.hypot(b, gamma)
    assert np.allclose(s.eigenvalues, [-r, r], atol=1e-12)


def test_two_spin_dense_closed_form():
    gamma = 0.7
    e, _ = dense_spectrum(build(Graph(2, ((0, 1),)), FieldParams(0, gamma)))
    q = np.sqrt(1 + 4 * gamma**2)
    # symmetric sector gives +-q, the singlet -1 and the odd triplet state +1
    assert np.allclose(e, [-q, -1, 1, q], atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(CUBIC), st.floats(0, 2), st.floats(0, 2), st.integers(0, 1000))
def test_matches_dense(g, b, gamma, seed):
    h = build(g, FieldParams(b, gamma))
    s = lowest_eigenpairs(h, 6, seed=seed)
    e, _ = dense_spectrum(h)
    assert np.abs(s.eigenvalues - e[:6]).max() <= 1e-9
    _check(s, h)


@pytest.mark.parametrize("gamma", [0.0, 1e-3, 0.02, 0.1])
@pytest.mark.parametrize("method", ["davidson", "lanczos"])
def test_small_gamma_clusters(gamma, method):
    # near-degenerate manifolds are where iterative solvers go wrong
    for g in (enumerate_cubic(8)[4], ladder_on_circle(10)):
        h = build(g, FieldParams(0.09, gamma))
        for k in (1, 3, 6):
            s = lowest_eigenpairs(h, k, seed=3, method=method)
            e = np.linalg.eigvalsh(h.dense())[:k]
            assert np.abs(s.eigenvalues - e).max() <= 1e-9
            _check(s, h)


def test_lanczos_matches_dense():
    h = build(ladder_on_circle(10), FieldParams(1.0, 1.5))
    s = lowest_eigenpairs(h, 5, method="lanczos")
    assert np.allclose(s.eigenvalues, dense_spectrum(h)[0][:5], atol=1e-9)


def test_gamma_zero_is_sorted_diagonal():
    h = build(ladder_on_circle(8), FieldParams(0.3, 0))
    s = lowest_eigenpairs(h, 6)
    assert np.array_equal(s.eigenvalues, np.sort(h.diag)[:6])
    e, _ = dense_spectrum(h)
    assert np.array_equal(e, np.sort(h.diag))


def test_trace_zero_at_zero_field():
    mat = build(ladder_on_circle(8), FieldParams(0, 1.2)).dense()
    assert np.trace(mat) == 0


def test_seed_stability():
    h = build(ladder_on_circle(12), FieldParams(1.0, 1.6))
    runs = [lowest_eigenpairs(h, 4, seed=s) for s in (0, 1, 2)]
    for r in runs[1:]:
        assert np.allclose(r.eigenvalues, runs[0].eigenvalues, atol=1e-8)
        # E4 = E5 here, so only the first three vectors are pinned down
        assert np.allclose(r.eigenvectors[:, :3], runs[0].eigenvectors[:, :3], atol=1e-6)


def test_deterministic():
    h = build(ladder_on_circle(12), FieldParams(1.0, 0.5))
    a, b = lowest_eigenpairs(h, 4, seed=5), lowest_eigenpairs(h, 4, seed=5)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert np.array_equal(a.eigenvectors, b.eigenvectors)


def test_warm_start_agrees():
    g = ladder_on_circle(12)
    prev = lowest_eigenpairs(build(g, FieldParams(1.0, 1.55)), 4)
    h = build(g, FieldParams(1.0, 1.5))
    warm = lowest_eigenpairs(h, 4, v0=prev.eigenvectors[:, 0])
    cold = lowest_eigenpairs(h, 4)
    assert np.allclose(warm.eigenvalues, cold.eigenvalues, atol=1e-9)
    assert warm.iterations <= cold.iterations + 50


def test_variational_bound():
    for g in CUBIC[:10]:
        h = build(g, FieldParams(0.5, 0.8))
        s = lowest_eigenpairs(h, 1)
        assert s.eigenvalues[0] >= dense_spectrum(h)[0][0] - 1e-10


def test_ladder16_regressions():
    g = ladder_on_circle(16)
    deep = lowest_eigenpairs(build(g, FieldParams(1, 3.0)), 3)
    crit = lowest_eigenpairs(build(g, FieldParams(1, 1.8)), 3)
    low = lowest_eigenpairs(build(g, FieldParams(1, 0.2)), 3)
    d12_deep, _ = gaps(deep)
    d12_crit, _ = gaps(crit)
    assert d12_deep > 5 * d12_crit > 0
    assert gaps(low)[0] < 1e-3
    assert low.degeneracy_classes[0] == (0, 1)
    # reference values from a dense-verified run
    assert deep.eigenvalues[0] == pytest.approx(-51.31923215, abs=1e-7)
    assert crit.eigenvalues[0] == pytest.approx(-34.21707467, abs=1e-7)
    assert low.eigenvalues[0] == pytest.approx(-24.12000064, abs=1e-7)


def test_gaps():
    s = SpectrumResult(np.array([-5.0, -5.0, -3.0]), np.eye(3), np.zeros(3), 0, ((0, 1), (2,)))
    assert gaps(s) == (0.0, 2.0)
    with pytest.raises(InvalidArgument):
        gaps(SpectrumResult(np.array([-1.0, 0.0]), np.eye(2), np.zeros(2), 0, ((0,), (1,))))


def test_degeneracy_classes():
    assert degeneracy_classes(np.array([-3.0, -3.0 + 1e-12, -2.0, -1.0, -1.0])) == ((0, 1), (2,), (3, 4))
    assert degeneracy_classes(np.array([-100.0, -100.0 + 5e-7])) == ((0, 1),)
    assert degeneracy_classes(np.array([-1.0, -1.0 + 1e-7])) == ((0,), (1,))


def test_canonicalize_fixes_sign_and_rotation(rng):
    q, _ = np.linalg.qr(rng.standard_normal((16, 2)))
    rot = np.array([[np.cos(0.3), -np.sin(0.3)], [np.sin(0.3), np.cos(0.3)]])
    a = canonicalize(q, ((0, 1),))
    b = canonicalize(-q, ((0, 1),))
    assert np.allclose(a, b)
    for col in a.T:
        assert col[np.argmax(np.abs(col))] > 0
    assert np.allclose(a.T @ a, np.eye(2))
    # a rotated basis of the same plane spans the same space
    c = canonicalize(q @ rot, ((0, 1),))
    assert np.allclose(c @ c.T, a @ a.T)


def test_argument_errors():
    h = build(ladder_on_circle(6), FieldParams(0, 1))
    for kwargs in ({"k": 0}, {"k": 17}, {"tol": 0}, {"method": "power"}, {"v0": np.ones(3)}):
        with pytest.raises(InvalidArgument):
            lowest_eigenpairs(h, **{"k": 2, **kwargs})
    with pytest.raises(InvalidArgument):
        lowest_eigenpairs(build(Graph(1, ()), FieldParams(0, 1)), 3)
    with pytest.raises(BudgetExceeded):
        dense_spectrum(build(ladder_on_circle(14), FieldParams(0, 1)))


@pytest.mark.parametrize("method", ["davidson", "lanczos"])
def test_budget_exhaustion(method):
    h = build(ladder_on_circle(12), FieldParams(1.0, 1.0))
    with pytest.raises(ConvergenceFailure) as e:
        lowest_eigenpairs(h, 4, max_matvecs=20, method=method)
    assert e.value.residuals is not None and len(e.value.residuals) == 4
