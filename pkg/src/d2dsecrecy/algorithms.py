"""End-to-end allocation schemes.

``pac_no_d2d``
    Optimal RB assignment without D2D help: per-(CU, RB) secrecy rates with
    the MMSE receiver, then a Hungarian assignment.
``pac_d2d``
    Keeps the RB map of ``pac_no_d2d``, optimizes every CU-D2D pair on the
    CU's RB by alternating filter/jammer updates, then matches CUs to D2D
    pairs with the Hungarian algorithm.
``baseline_random_rb``
    Uniformly random RB permutation, no D2D.
``baseline_greedy``
    CUs in index order grab their best free RB, then their best free D2D
    pair. This mimics the greedy access control of the SISO scheme it is
    compared against, but reuses the multi-antenna rate machinery of this
    package (MMSE receiver, closed-form jammer power) rather than the
    original single-antenna power formulas.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assignment import hungarian, solve_matching
from .model import ChannelSet, SystemConfig
from .power_control import DEFAULT_MAX_ITER, DEFAULT_TOL, PairBatch, cu_power_rule, optimize_pairs
from .rates import mmse_filter, phi_no_d2d, secrecy_bits, sinr_bs, sinr_eve_mrc

__all__ = [
    "SCHEMES",
    "PacSolution",
    "phi_table",
    "pair_table",
    "pair_tables",
    "pac_no_d2d",
    "pac_d2d",
    "pac_d2d_many",
    "baseline_random_rb",
    "baseline_greedy",
    "baseline_greedy_many",
    "run_scheme",
    "evaluate_operating_point",
    "check_constraints",
]

SCHEMES = ("pac_d2d", "pac_no_d2d", "random_rb", "greedy")


@dataclass
class PacSolution:
    scheme: str
    rb_of_cu: np.ndarray    # (M,) RB index of each CU
    d2d_of_cu: np.ndarray   # (M,) matched D2D index, -1 if none
    cu_power: np.ndarray    # (M,)
    d2d_power: np.ndarray   # (N,)
    filters: np.ndarray     # (M, B)
    per_cu_sr: np.ndarray   # (M,) bit/s
    sum_sr: float
    psi: np.ndarray | None = None  # (M, N) pair profits, D2D schemes only
    mean_iterations: float = 0.0

    @property
    def matching(self) -> dict:
        return {m: int(n) for m, n in enumerate(self.d2d_of_cu) if n >= 0}


def phi_table(cfg: SystemConfig, chans: ChannelSet) -> np.ndarray:
    """(M, K) secrecy rate of each CU on each RB without D2D help."""
    return np.atleast_2d(
        phi_no_d2d(chans.g_mb, chans.g_me, cfg.P[:, None], cfg.noise_power, cfg.bandwidth, cfg.num_rbs)
    )


def pair_tables(cfg: SystemConfig, chans_list, rbs, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER) -> PairBatch:
    """Optimize all (CU m, D2D n) pairs on RB ``rbs[t][m]`` for a stack of topologies.

    Returns a :class:`PairBatch` of batch shape (T, M, N). Pairs are
    independent, so stacking topologies only amortizes the numpy overhead.
    """
    rb = np.asarray(rbs, dtype=int)
    t_idx = np.arange(len(chans_list))[:, None]
    m_idx = np.arange(cfg.num_cus)[None, :]
    stack = {f: np.stack([getattr(c, f) for c in chans_list]) for f in ("g_mb", "g_me", "h_nb", "h_ne")}
    g_mb = stack["g_mb"][t_idx, m_idx, rb][:, :, None, :]
    g_me = stack["g_me"][t_idx, m_idx, rb][:, :, None, :]
    # h[t, n, rb[t, m]] -> (T, M, N, ant)
    sel = (t_idx[:, :, None], np.arange(cfg.num_d2d)[None, None, :], rb[:, :, None])
    h_nb = stack["h_nb"][sel]
    h_ne = stack["h_ne"][sel]
    return optimize_pairs(
        (g_mb, g_me, h_nb, h_ne),
        cfg.P[None, :, None],
        cfg.Q[None, None, :],
        cfg.noise_power,
        tol=tol,
        max_iter=max_iter,
    )


def pair_table(cfg: SystemConfig, chans: ChannelSet, rb_of_cu, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER) -> PairBatch:
    """Single-topology :func:`pair_tables`; batch shape (M, N)."""
    return pair_tables(cfg, [chans], [rb_of_cu], tol=tol, max_iter=max_iter)[0]


def _solo_filters(cfg, chans, rb):
    m_idx = np.arange(cfg.num_cus)
    return mmse_filter(chans.g_mb[m_idx, rb], None, cfg.P, 0.0, cfg.noise_power)


def _assemble(cfg, chans, scheme, rb, phi, d2d_of_cu=None, pairs: PairBatch | None = None):
    """Fill filters, powers and rates for a fixed RB map and CU-D2D matching."""
    M, N = cfg.num_cus, cfg.num_d2d
    V, K, N0 = cfg.bandwidth, cfg.num_rbs, cfg.noise_power
    m_idx = np.arange(M)
    if d2d_of_cu is None:
        d2d_of_cu = np.full(M, -1, dtype=int)
    filters = _solo_filters(cfg, chans, rb)
    cu_power = np.zeros(M)
    d2d_power = np.zeros(N)
    per_cu = np.zeros(M)
    phi_own = phi[m_idx, rb]

    for m in range(M):
        k, n = rb[m], d2d_of_cu[m]
        if n >= 0:
            w = pairs.filters[m, n]
            q = float(pairs.q[m, n])
            filters[m] = w
            p = cu_power_rule(w, chans.g_mb[m, k], chans.g_me[m, k], chans.h_nb[n, k], chans.h_ne[n, k],
                              q, N0, cfg.P[m])
            d2d_power[n] = q
            sr = (V / K) * max(0.0, float(pairs.chi[m, n])) if p > 0 else 0.0
        else:
            p = cu_power_rule(filters[m], chans.g_mb[m, k], chans.g_me[m, k], None, None, 0.0, N0, cfg.P[m])
            sr = float(phi_own[m]) if p > 0 else 0.0
        cu_power[m] = p
        per_cu[m] = sr

    return PacSolution(
        scheme=scheme,
        rb_of_cu=np.asarray(rb, dtype=int),
        d2d_of_cu=np.asarray(d2d_of_cu, dtype=int),
        cu_power=cu_power,
        d2d_power=d2d_power,
        filters=filters,
        per_cu_sr=per_cu,
        sum_sr=float(per_cu.sum()),
        psi=None if pairs is None else (V / K) * np.maximum(0.0, pairs.chi),
        mean_iterations=0.0 if pairs is None else float(pairs.iterations.mean()) if pairs.iterations.size else 0.0,
    )


def _rb_hungarian(phi):
    match = hungarian(-phi).match
    return np.array([match[m] for m in range(phi.shape[0])], dtype=int)


def _rb_greedy(phi):
    free = np.ones(phi.shape[1], dtype=bool)
    rb = np.empty(phi.shape[0], dtype=int)
    for m in range(phi.shape[0]):
        k = int(np.argmax(np.where(free, phi[m], -np.inf)))
        rb[m] = k
        free[k] = False
    return rb


def pac_no_d2d(cfg: SystemConfig, chans: ChannelSet) -> PacSolution:
    phi = phi_table(cfg, chans)
    return _assemble(cfg, chans, "pac_no_d2d", _rb_hungarian(phi), phi)


def pac_d2d_many(cfg: SystemConfig, chans_list, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER) -> list:
    """:func:`pac_d2d` over several channel realizations sharing one config."""
    phis = [phi_table(cfg, c) for c in chans_list]
    rbs = [_rb_hungarian(phi) for phi in phis]
    if cfg.num_d2d == 0:
        return [_assemble(cfg, c, "pac_d2d", rb, phi) for c, rb, phi in zip(chans_list, rbs, phis)]
    tables = pair_tables(cfg, chans_list, rbs, tol=tol, max_iter=max_iter)
    out = []
    for t, (chans, rb, phi) in enumerate(zip(chans_list, rbs, phis)):
        pairs = tables[t]
        psi = (cfg.bandwidth / cfg.num_rbs) * np.maximum(0.0, pairs.chi)
        d2d_of_cu = np.full(cfg.num_cus, -1, dtype=int)
        for m, n in solve_matching(psi).match.items():
            d2d_of_cu[m] = n
        out.append(_assemble(cfg, chans, "pac_d2d", rb, phi, d2d_of_cu, pairs))
    return out


def pac_d2d(cfg: SystemConfig, chans: ChannelSet, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER) -> PacSolution:
    """RB map from :func:`pac_no_d2d`, then pair optimization and CU-D2D matching.

    With no D2D pairs this degenerates to the no-D2D solution.
    """
    return pac_d2d_many(cfg, [chans], tol=tol, max_iter=max_iter)[0]


def baseline_random_rb(cfg: SystemConfig, chans: ChannelSet, rng: np.random.Generator) -> PacSolution:
    rb = rng.permutation(cfg.num_rbs)
    return _assemble(cfg, chans, "random_rb", rb, phi_table(cfg, chans))


def baseline_greedy_many(cfg: SystemConfig, chans_list, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER) -> list:
    """:func:`baseline_greedy` over several channel realizations sharing one config."""
    phis = [phi_table(cfg, c) for c in chans_list]
    rbs = [_rb_greedy(phi) for phi in phis]
    M, N = cfg.num_cus, cfg.num_d2d
    if N == 0:
        return [_assemble(cfg, c, "greedy", rb, phi) for c, rb, phi in zip(chans_list, rbs, phis)]
    # RB choices do not depend on D2D, so every candidate pair is known up front
    tables = pair_tables(cfg, chans_list, rbs, tol=tol, max_iter=max_iter)
    out = []
    for t, (chans, rb, phi) in enumerate(zip(chans_list, rbs, phis)):
        pairs = tables[t]
        psi = (cfg.bandwidth / cfg.num_rbs) * np.maximum(0.0, pairs.chi)
        free = np.ones(N, dtype=bool)
        d2d_of_cu = np.full(M, -1, dtype=int)
        for m in range(M):
            if not free.any():
                break
            n = int(np.argmax(np.where(free, psi[m], -np.inf)))
            if psi[m, n] > phi[m, rb[m]]:
                d2d_of_cu[m] = n
                free[n] = False
        out.append(_assemble(cfg, chans, "greedy", rb, phi, d2d_of_cu, pairs))
    return out


def baseline_greedy(cfg: SystemConfig, chans: ChannelSet, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER) -> PacSolution:
    return baseline_greedy_many(cfg, [chans], tol=tol, max_iter=max_iter)[0]


def run_scheme(name: str, cfg: SystemConfig, chans: ChannelSet, rng: np.random.Generator | None = None) -> PacSolution:
    if name == "pac_d2d":
        return pac_d2d(cfg, chans)
    if name == "pac_no_d2d":
        return pac_no_d2d(cfg, chans)
    if name == "random_rb":
        if rng is None:
            raise ValueError("random_rb needs a random stream")
        return baseline_random_rb(cfg, chans, rng)
    if name == "greedy":
        return baseline_greedy(cfg, chans)
    raise ValueError(f"unknown scheme {name!r}; choose from {SCHEMES}")


def evaluate_operating_point(cfg: SystemConfig, chans: ChannelSet, sol: PacSolution) -> np.ndarray:
    """Recompute per-CU secrecy rates from filters, powers and the matching alone."""
    V, K, N0 = cfg.bandwidth, cfg.num_rbs, cfg.noise_power
    out = np.zeros(cfg.num_cus)
    for m in range(cfg.num_cus):
        k, n, p = sol.rb_of_cu[m], sol.d2d_of_cu[m], sol.cu_power[m]
        h_nb = h_ne = None
        q = 0.0
        if n >= 0:
            h_nb, h_ne, q = chans.h_nb[n, k], chans.h_ne[n, k], sol.d2d_power[n]
        eta = sinr_bs(sol.filters[m], chans.g_mb[m, k], h_nb, p, q, N0)
        gamma = sinr_eve_mrc(chans.g_me[m, k], h_ne, p, q, N0)
        out[m] = (V / K) * max(0.0, secrecy_bits(eta, gamma))
    return out


def check_constraints(cfg: SystemConfig, sol: PacSolution) -> list:
    """Return a list of violated structural constraints (empty when feasible)."""
    bad = []
    M, N = cfg.num_cus, cfg.num_d2d
    if sorted(sol.rb_of_cu.tolist()) != list(range(cfg.num_rbs)):
        bad.append("RB map is not a bijection")
    matched = [int(n) for n in sol.d2d_of_cu if n >= 0]
    if len(set(matched)) != len(matched) or any(n >= N for n in matched):
        bad.append("D2D matching is not injective")
    for m in range(M):
        if sol.cu_power[m] not in (0.0, cfg.P[m]):
            bad.append(f"CU {m} power is not binary")
    used = set(matched)
    for n in range(N):
        qn = sol.d2d_power[n]
        if n in used and not (0.0 <= qn <= cfg.Q[n]):
            bad.append(f"D2D {n} power out of range")
        if n not in used and qn != 0.0:
            bad.append(f"unmatched D2D {n} transmits")
    if np.any(sol.per_cu_sr < 0) or not np.isclose(sol.sum_sr, sol.per_cu_sr.sum(), rtol=0, atol=1e-12):
        bad.append("secrecy rates inconsistent")
    return bad
