import numpy as np
import pytest

from d2dsecrecy.algebra import sq_norm
from d2dsecrecy.model import dbm_to_watt
from d2dsecrecy.rates import (
    chi_tilde,
    mmse_filter,
    mmse_of_link,
    phi_no_d2d,
    secrecy_bits,
    secrecy_rate,
    sinr_bs,
    sinr_eve_mrc,
)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_link(rng, B=None, E=None):
    B = B or int(rng.integers(1, 9))
    E = E or int(rng.integers(1, 9))
    return dict(
        g=crandn(rng, B), h=crandn(rng, B), g_me=crandn(rng, E), h_ne=crandn(rng, E),
        P=10 ** rng.uniform(-1, 1), q=10 ** rng.uniform(-1, 1), N0=10 ** rng.uniform(-1, 0),
    )


def test_mmse_filter_examples():
    assert mmse_filter([1.0], None, 1.0, 0.0, 1.0) == pytest.approx([0.5])
    w = mmse_filter([1, 0], [0, 1], 1.0, 1.0, 1.0)
    np.testing.assert_allclose(w, [0.5, 0], atol=1e-15)


def test_mmse_filter_dimension_mismatch():
    with pytest.raises(ValueError):
        mmse_filter([1, 0], [1, 0, 0], 1.0, 1.0, 1.0)


def _max_sinr_power_iteration(g, h, P, q, N0, iters=500):
    # dominant eigenvalue of P R^-1 g g^H with R = q h h^H + N0 I
    R = q * np.outer(h, h.conj()) + N0 * np.eye(len(g))
    Mx = P * np.linalg.inv(R) @ np.outer(g, g.conj())
    x = np.ones(len(g), dtype=complex)
    lam = 0.0
    for _ in range(iters):
        y = Mx @ x
        lam = np.linalg.norm(y) / np.linalg.norm(x)
        x = y / np.linalg.norm(y)
    return lam


@pytest.mark.parametrize("seed", range(30))
def test_mmse_filter_attains_max_sinr(seed):
    rng = np.random.default_rng(seed)
    d = random_link(rng)
    w = mmse_filter(d["g"], d["h"], d["P"], d["q"], d["N0"])
    eta = sinr_bs(w, d["g"], d["h"], d["P"], d["q"], d["N0"])
    oracle = _max_sinr_power_iteration(d["g"], d["h"], d["P"], d["q"], d["N0"])
    assert eta == pytest.approx(oracle, rel=1e-8)


def test_sinr_bs_examples():
    assert sinr_bs([1], [1], None, 2, 0, 1) == pytest.approx(2)
    assert sinr_bs([1], [1], [1], 2, 3, 1) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        sinr_bs([0, 0], [1, 0], None, 1, 0, 1)


def test_sinr_bs_scale_invariant():
    rng = np.random.default_rng(1)
    for _ in range(100):
        d = random_link(rng)
        w = crandn(rng, len(d["g"]))
        c = crandn(rng, 1)[0] * 10 ** rng.uniform(-3, 3)
        a = sinr_bs(w, d["g"], d["h"], d["P"], d["q"], d["N0"])
        b = sinr_bs(c * w, d["g"], d["h"], d["P"], d["q"], d["N0"])
        assert b == pytest.approx(a, rel=1e-12)


def test_sinr_eve_examples():
    assert sinr_eve_mrc([1], None, 2, 0, 1) == pytest.approx(2)
    assert sinr_eve_mrc([1, 0], [1, 0], 1, 1, 1) == pytest.approx(0.5)
    assert sinr_eve_mrc([1, 0], [0, 1], 3, 7, 1) == pytest.approx(sinr_eve_mrc([1, 0], None, 3, 0, 1))
    with pytest.raises(ValueError):
        sinr_eve_mrc([0, 0], None, 1, 0, 1)


def test_secrecy_rate_examples():
    assert secrecy_rate(3, 1, 1, 1).secrecy_rate == pytest.approx(1.0)
    assert secrecy_rate(2, 2, 1, 1).secrecy_rate == 0
    assert secrecy_rate(1, 3, 1, 1).secrecy_rate == 0
    assert secrecy_rate(3, 1, 2, 4).secrecy_rate == pytest.approx(0.5)
    assert secrecy_bits(1, 3) == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        secrecy_rate(-1, 0, 1, 1)


def test_phi_examples():
    e = np.array([1.0, 0.0])
    assert phi_no_d2d(e, e, 1.0, 1e-3, 1, 1) == 0
    g_mb = np.array([2.0, 0.0])  # ||g_mb||^2 = 4, ||g_me||^2 = 1
    assert phi_no_d2d(g_mb, e, 1e12, 1.0, 1, 1) == pytest.approx(2.0, abs=1e-9)


@pytest.mark.parametrize("seed", range(30))
def test_phi_matches_explicit_filter(seed):
    rng = np.random.default_rng(seed)
    d = random_link(rng)
    w = mmse_filter(d["g"], None, d["P"], 0.0, d["N0"])
    eta = sinr_bs(w, d["g"], None, d["P"], 0.0, d["N0"])
    gamma = sinr_eve_mrc(d["g_me"], None, d["P"], 0.0, d["N0"])
    V, K = 2.0, 3
    explicit = secrecy_rate(eta, gamma, V, K).secrecy_rate
    assert phi_no_d2d(d["g"], d["g_me"], d["P"], d["N0"], V, K) == pytest.approx(explicit, abs=1e-10)


def test_mmse_of_link_zero_filter_is_one():
    assert mmse_of_link(np.zeros(3), np.ones(3), np.ones(3), 2.0, 1.0, 0.5) == pytest.approx(1.0)


@pytest.mark.parametrize("B", [1, 2, 4, 8])
def test_mmse_identity(B):
    rng = np.random.default_rng(B)
    for _ in range(250):
        d = random_link(rng, B=B)
        w = mmse_filter(d["g"], d["h"], d["P"], d["q"], d["N0"])
        mse = mmse_of_link(w, d["g"], d["h"], d["P"], d["q"], d["N0"])
        eta = sinr_bs(w, d["g"], d["h"], d["P"], d["q"], d["N0"])
        assert abs(mse * (1 + eta) - 1) <= 1e-9


def test_random_filters_never_beat_mmse():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        d = random_link(rng)
        args = (d["g"], d["h"], d["P"], d["q"], d["N0"])
        w_opt = mmse_filter(*args)
        w = crandn(rng, len(d["g"]))
        assert sinr_bs(w, *args) <= sinr_bs(w_opt, *args) * (1 + 1e-9)
        assert mmse_of_link(w, *args) >= mmse_of_link(w_opt, *args) - 1e-12


def test_chi_tilde_at_zero_jammer_equals_phi():
    rng = np.random.default_rng(8)
    hits = 0
    for _ in range(200):
        d = random_link(rng)
        w = mmse_filter(d["g"], None, d["P"], 0.0, d["N0"])
        chans = (d["g"], d["g_me"], d["h"], d["h_ne"])
        chi = chi_tilde(w, 0.0, chans, d["P"], d["N0"])
        phi = phi_no_d2d(d["g"], d["g_me"], d["P"], d["N0"], 1, 1)
        if phi > 0:
            hits += 1
            assert chi == pytest.approx(phi, abs=1e-10)
        else:
            assert chi <= 1e-12
    assert hits > 20


def test_chi_tilde_two_ways():
    rng = np.random.default_rng(9)
    for _ in range(500):
        d = random_link(rng)
        w = mmse_filter(d["g"], d["h"], d["P"], d["q"], d["N0"])
        chans = (d["g"], d["g_me"], d["h"], d["h_ne"])
        via_mmse = chi_tilde(w, d["q"], chans, d["P"], d["N0"])
        eta = sinr_bs(w, d["g"], d["h"], d["P"], d["q"], d["N0"])
        gamma = sinr_eve_mrc(d["g_me"], d["h_ne"], d["P"], d["q"], d["N0"])
        assert via_mmse == pytest.approx(secrecy_bits(eta, gamma), abs=1e-9)


def test_vectorized_matches_scalar():
    rng = np.random.default_rng(10)
    g, h = crandn(rng, 7, 3), crandn(rng, 7, 3)
    P, q = 10 ** rng.uniform(-1, 1, 7), 10 ** rng.uniform(-1, 1, 7)
    W = mmse_filter(g, h, P, q, 0.3)
    eta = sinr_bs(W, g, h, P, q, 0.3)
    for i in range(7):
        w = mmse_filter(g[i], h[i], P[i], q[i], 0.3)
        np.testing.assert_allclose(W[i], w, atol=1e-14)
        assert eta[i] == pytest.approx(sinr_bs(w, g[i], h[i], P[i], q[i], 0.3), rel=1e-13)


def test_solo_rate_sign_follows_norms():
    rng = np.random.default_rng(12)
    for _ in range(500):
        E = int(rng.integers(1, 5))
        g_mb, g_me = crandn(rng, E), crandn(rng, E)
        if rng.random() < 0.1:
            g_mb = g_me * np.exp(1j * rng.uniform(0, 2 * np.pi))  # exact norm tie
        a, b = sq_norm(g_mb), sq_norm(g_me)
        for P in 10.0 ** rng.uniform(-3, 3, 4):
            phi = phi_no_d2d(g_mb, g_me, P, 1.0, 1, 1)
            if a > b * (1 + 1e-12):
                assert phi > 0
            elif a <= b:
                assert phi == 0


def test_solo_rate_monotone_and_saturating():
    rng = np.random.default_rng(13)
    N0 = 1e-13
    grid = dbm_to_watt(np.linspace(-20, 60, 81))
    checked = 0
    while checked < 100:
        g_mb, g_me = crandn(rng, 4) * 1e-4, crandn(rng, 4) * 1e-4
        a, b = sq_norm(g_mb), sq_norm(g_me)
        if a <= b:
            continue
        checked += 1
        vals = phi_no_d2d(g_mb, g_me, grid, N0, 1, 6)
        assert np.all(np.diff(vals) >= -1e-12)
        limit = (1 / 6) * 2 * np.log2(np.sqrt(a / b))
        assert vals[-1] <= limit + 1e-12
        p50 = phi_no_d2d(g_mb, g_me, dbm_to_watt(50.0), N0, 1, 6)
        assert vals[-1] - p50 <= 1e-3 * limit

