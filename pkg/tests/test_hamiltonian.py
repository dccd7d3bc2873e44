import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dense_hamiltonian
from spinlat.errors import BudgetExceeded, InvalidArgument
from spinlat.hamiltonian import FieldParams, ScheduleDerivative, apply, apply_derivative, build, magnetization
from spinlat.lattice import Graph, enumerate_cubic, frustration, ladder_on_circle

SMALL = enumerate_cubic(4) + enumerate_cubic(6) + enumerate_cubic(8, planar_only=True) + [ladder_on_circle(10)]
fields = st.floats(-2.5, 2.5, allow_nan=False)


def test_two_spin_diagonal():
    h = build(Graph(2, ((0, 1),)), FieldParams(0, 0))
    assert list(h.diag) == [1, -1, -1, 1]


def test_field_only_diagonal():
    h = build(Graph(3, ()), FieldParams(1, 0))
    assert list(h.diag) == [3, 1, 1, -1, 1, -1, -1, -3]


def test_ladder16_ground_diagonal_is_classical_minimum():
    g = ladder_on_circle(16)
    h = build(g, FieldParams(1, 0))
    assert h.diag.min() == frustration(g, field=1.0).min_energy


@pytest.mark.parametrize("g", SMALL, ids=lambda g: g.name)
def test_matches_entry_by_entry_oracle(g, rng):
    b, gamma = rng.uniform(-2, 2, 2)
    h = build(g, FieldParams(b, gamma))
    H = dense_hamiltonian(g, b, gamma)
    x = rng.standard_normal((h.dim, 3))
    assert np.abs(apply(h, x) - H @ x).max() <= 1e-12
    assert np.abs(apply(h, x[:, 0]) - H @ x[:, 0]).max() <= 1e-12
    assert np.abs(h.dense() - H).max() == 0


def test_gamma_zero_is_elementwise(rng):
    h = build(ladder_on_circle(8), FieldParams(0.7, 0))
    x = rng.standard_normal(h.dim)
    assert np.array_equal(apply(h, x), h.diag * x)


def test_uniform_state_is_x_eigenstate():
    h = build(Graph(5, ()), FieldParams(0, 0.3))
    x = np.ones(h.dim)
    assert np.allclose(apply(h, x), 5 * 0.3 * x, atol=1e-14)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(SMALL), fields, fields, st.integers(0, 2**32 - 1))
def test_symmetric_and_linear(g, b, gamma, seed):
    r = np.random.default_rng(seed)
    h = build(g, FieldParams(b, gamma))
    x, y = r.standard_normal((2, h.dim))
    lhs, rhs = x @ apply(h, y), apply(h, x) @ y
    assert abs(lhs - rhs) <= 1e-10 * np.linalg.norm(x) * np.linalg.norm(y)
    a, c = r.standard_normal(2)
    combo = apply(h, a * x + c * y)
    assert np.allclose(combo, a * apply(h, x) + c * apply(h, y), rtol=1e-12, atol=1e-12 * np.abs(combo).max())


def test_hermitian_at_n20():
    h = build(ladder_on_circle(20), FieldParams(1.0, 1.3))
    r = np.random.default_rng(3)
    x, y = r.standard_normal((2, h.dim))
    assert abs(x @ apply(h, y) - apply(h, x) @ y) <= 1e-10 * np.linalg.norm(x) * np.linalg.norm(y)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(SMALL), fields, st.integers(0, 2**32 - 1))
def test_parity_symmetry_at_zero_field(g, gamma, seed):
    h = build(g, FieldParams(0.0, gamma))
    x = np.random.default_rng(seed).standard_normal(h.dim)
    # global spin flip maps index s to its bit complement, which reverses the array
    assert np.array_equal(apply(h, x[::-1]), apply(h, x)[::-1])


@pytest.mark.parametrize("g", SMALL[:6], ids=lambda g: g.name)
def test_spectrum_invariant_under_field_reversal(g):
    a = np.linalg.eigvalsh(build(g, FieldParams(0.8, 1.1)).dense())
    b = np.linalg.eigvalsh(build(g, FieldParams(-0.8, 1.1)).dense())
    assert np.allclose(a, b, atol=1e-10)


@pytest.mark.parametrize("g", SMALL[:6], ids=lambda g: g.name)
def test_spectrum_bound(g):
    b, gamma = 1.3, -0.9
    e = np.linalg.eigvalsh(build(g, FieldParams(b, gamma)).dense())
    bound = 1.5 * g.n + abs(b) * g.n + abs(gamma) * g.n
    assert -bound <= e.min() and e.max() <= bound


def test_derivative(rng):
    g = ladder_on_circle(8)
    h = build(g, FieldParams(1.0, 1.0))
    e0 = np.zeros(h.dim)
    e0[0] = 1.0
    assert np.array_equal(apply_derivative(h, ScheduleDerivative(1, 0), e0), g.n * e0)
    x = rng.standard_normal(h.dim)
    free = build(Graph(g.n, ()), FieldParams(0, 1))
    assert np.allclose(apply_derivative(h, ScheduleDerivative(0, 1), x), apply(free, x), atol=1e-14)
    db, dg = 0.4, -1.7
    D = dense_hamiltonian(Graph(g.n, ()), db, dg)
    assert np.abs(apply_derivative(h, ScheduleDerivative(db, dg), x) - D @ x).max() <= 1e-12
    assert not apply_derivative(h, ScheduleDerivative(0, 0), x).any()


def test_magnetization():
    assert list(magnetization(2)) == [2, 0, 0, -2]


def test_errors(monkeypatch):
    with pytest.raises(InvalidArgument):
        FieldParams(float("nan"), 1)
    with pytest.raises(InvalidArgument):
        ScheduleDerivative(0, float("inf"))
    h = build(ladder_on_circle(6), FieldParams(0, 1))
    with pytest.raises(InvalidArgument):
        apply(h, np.zeros(10))
    with pytest.raises(InvalidArgument):
        apply_derivative(h, ScheduleDerivative(1, 0), np.zeros((3, 3, 3)))
    monkeypatch.delenv("SPINLAT_BUDGET_OVERRIDE", raising=False)
    with pytest.raises(BudgetExceeded):
        build(ladder_on_circle(26), FieldParams(0, 1))
    with pytest.raises(BudgetExceeded):
        build(ladder_on_circle(8), FieldParams(0, 1), max_spins=6)
    monkeypatch.setenv("SPINLAT_BUDGET_OVERRIDE", "1")
    assert build(ladder_on_circle(8), FieldParams(0, 1), max_spins=6).n == 8
