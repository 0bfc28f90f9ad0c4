"""Quick oracle checks runnable without pytest (``d2dsec selftest``)."""

from __future__ import annotations

import itertools

import numpy as np

from .algorithms import pac_d2d, pac_no_d2d, phi_table
from .assignment import hungarian
from .model import SystemConfig, make_rng, sample_channels, sample_topology
from .power_control import JammerConstants, chi_from_constants, cu_power_rule, optimal_jammer_power
from .rates import mmse_filter, mmse_of_link, phi_no_d2d, sinr_bs


def _crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def check_hungarian(rng, trials=200):
    for _ in range(trials):
        n = int(rng.integers(2, 7))
        c = rng.random((n, n))
        best = min(sum(c[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n)))
        if not np.isclose(hungarian(c).total_cost, best, rtol=0, atol=1e-12):
            return False
    return True


def check_jammer_power(rng, trials=100):
    for _ in range(trials):
        c = JammerConstants(*(10.0 ** rng.uniform(-2, 2, 5)))
        Q = 10.0 ** rng.uniform(-2, 2)
        grid = np.linspace(0.0, Q, 10_001)
        sol = optimal_jammer_power(c, Q)
        if chi_from_constants(c, sol.q_star) < chi_from_constants(c, grid).max() - 1e-6:
            return False
    return True


def check_mmse_identity(rng, trials=200):
    for _ in range(trials):
        B = int(rng.choice([1, 2, 4, 8]))
        g, h = _crandn(rng, B), _crandn(rng, B)
        P, q, N0 = 10.0 ** rng.uniform(-1, 1, 3)
        w = mmse_filter(g, h, P, q, N0)
        val = mmse_of_link(w, g, h, P, q, N0) * (1 + sinr_bs(w, g, h, P, q, N0))
        if abs(val - 1) > 1e-9:
            return False
    return True


def check_power_rule(rng, trials=200):
    for _ in range(trials):
        B, E = rng.integers(1, 5, 2)
        g_mb, g_me = _crandn(rng, B), _crandn(rng, E)
        P, N0 = 1.0, 0.1
        w = mmse_filter(g_mb, None, P, 0.0, N0)
        p = cu_power_rule(w, g_mb, g_me, None, None, 0.0, N0, P)
        stronger = np.linalg.norm(g_mb) > np.linalg.norm(g_me)
        if (p == P) != stronger or (phi_no_d2d(g_mb, g_me, P, N0, 1, 1) > 0) != stronger:
            return False
    return True


def check_end_to_end(rng, trials=20):
    cfg = SystemConfig(num_cus=3, num_d2d=3, bs_antennas=2, eve_antennas=2)
    for _ in range(trials):
        ch = sample_channels(cfg, sample_topology(cfg, rng), rng)
        phi = phi_table(cfg, ch)
        best = max(sum(phi[m, p[m]] for m in range(3)) for p in itertools.permutations(range(3)))
        nd = pac_no_d2d(cfg, ch)
        if not np.isclose(nd.sum_sr, best, rtol=1e-12, atol=0) or pac_d2d(cfg, ch).sum_sr < nd.sum_sr - 1e-9:
            return False
    return True


CHECKS = {
    "hungarian vs brute force": check_hungarian,
    "jammer power vs grid search": check_jammer_power,
    "MMSE x (1 + SINR) = 1": check_mmse_identity,
    "CU power rule vs channel norms": check_power_rule,
    "end-to-end vs brute force": check_end_to_end,
}


def run_selftest(seed: int = 0, out=print) -> bool:
    ok = True
    for name, fn in CHECKS.items():
        passed = bool(fn(make_rng(seed)))
        ok &= passed
        out(f"[{'PASS' if passed else 'FAIL'}] {name}")
    return ok
