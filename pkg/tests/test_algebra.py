import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from d2dsecrecy.algebra import NotPositiveDefiniteError, hpd_solve, inner, sq_norm


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def test_inner_examples():
    assert inner([1, 1j], [1, 1j]) == pytest.approx(2)
    assert inner([1, 0], [0, 1]) == 0
    assert inner([1j], [1]) == pytest.approx(-1j)


def test_inner_length_mismatch():
    with pytest.raises(ValueError):
        inner([1, 2], [1, 2, 3])


def test_sq_norm_examples():
    assert sq_norm([3, 4j]) == pytest.approx(25)
    assert sq_norm(np.zeros(3)) == 0
    assert sq_norm([0, 1, 0]) == 1
    assert isinstance(sq_norm([1 + 1j]), float)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_inner_conjugate_symmetry(n, seed):
    rng = np.random.default_rng(seed)
    a, b = crandn(rng, n), crandn(rng, n)
    assert inner(a, b) == pytest.approx(np.conj(inner(b, a)), abs=1e-12)
    assert abs(inner(a, a).imag) <= 1e-14


def test_hpd_solve_diagonal():
    x = hpd_solve(2 * np.eye(2), np.array([4, 2j]))
    np.testing.assert_allclose(x, [2, 1j], atol=1e-15)


def test_hpd_solve_rank_one_basis():
    e1 = np.array([1, 0, 0], dtype=complex)
    A = np.eye(3) + np.outer(e1, e1.conj())
    np.testing.assert_allclose(hpd_solve(A, e1), e1 / 2, atol=1e-15)


@pytest.mark.parametrize("seed", range(20))
def test_hpd_solve_random_residual(seed):
    rng = np.random.default_rng(seed)
    X = crandn(rng, 4, 4)
    A = X @ X.conj().T + 0.1 * np.eye(4)
    b = crandn(rng, 4)
    x = hpd_solve(A, b)
    assert np.linalg.norm(A @ x - b) <= 1e-10 * np.linalg.norm(b)


def test_hpd_solve_batched_matches_loop():
    rng = np.random.default_rng(7)
    X = crandn(rng, 5, 3, 3)
    A = X @ np.swapaxes(X.conj(), -1, -2) + np.eye(3)
    b = crandn(rng, 5, 3)
    xs = hpd_solve(A, b)
    for i in range(5):
        np.testing.assert_allclose(xs[i], hpd_solve(A[i], b[i]), atol=1e-14)


def test_hpd_solve_rejects_non_pd_and_non_finite():
    with pytest.raises(NotPositiveDefiniteError):
        hpd_solve(np.diag([1.0, -1.0]), np.ones(2))
    with pytest.raises(ValueError):
        hpd_solve(np.eye(2), np.array([np.nan, 1]))
    with pytest.raises(ValueError):
        hpd_solve(np.eye(2), np.ones(3))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8), st.integers(0, 3), st.floats(-16, 2), st.integers(0, 2**32 - 1))
def test_hpd_solve_on_covariance_family(B, rank, log_n0, seed):
    # only matrices of the form sum p_i v_i v_i^H + N0 I are ever formed
    rng = np.random.default_rng(seed)
    N0 = 10.0**log_n0
    A = N0 * np.eye(B, dtype=complex)
    for _ in range(rank):
        v = crandn(rng, B) * 10 ** rng.uniform(-6, 0)
        A += 10 ** rng.uniform(-2, 2) * np.outer(v, v.conj())
    x = hpd_solve(A, crandn(rng, B))
    assert np.all(np.isfinite(x))


@pytest.mark.parametrize("seed", range(10))
def test_sherman_morrison_direction(seed):
    rng = np.random.default_rng(seed)
    g = crandn(rng, 4)
    P, N0 = 3.0, 0.5
    x = hpd_solve(P * np.outer(g, g.conj()) + N0 * np.eye(4), g)
    # x must be parallel to g: remove the g component and check what is left
    along = inner(g, x) / sq_norm(g) * g
    assert np.linalg.norm(x - along) <= 1e-10 * np.linalg.norm(x)
