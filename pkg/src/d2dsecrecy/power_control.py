"""CU on/off power rule, closed-form jammer power and the filter/power loop.

The jammer-power solution works on five scalar summaries of a pair for a
fixed receive filter ``w`` (see :func:`jammer_constants`). With them the
secrecy objective as a function of the jammer power ``q`` is::

    chi(q) = -log2(q*delta + eps) - log2(1 + vareps / (q*zeta + kappa))

whose derivative numerator is the concave quadratic
``-delta*zeta^2 q^2 - 2*delta*zeta*kappa q + (eps*vareps*zeta - delta*vareps*kappa - delta*kappa^2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import inner, sq_norm
from .model import ChannelSet, PairChannels
from .rates import chi_tilde, mmse_filter

__all__ = [
    "BRANCHES",
    "JammerConstants",
    "JammerSolution",
    "PairEvaluation",
    "PairBatch",
    "cu_power_rule",
    "jammer_constants",
    "chi_from_constants",
    "derivative_numerator",
    "optimal_jammer_power",
    "optimal_jammer_power_batch",
    "optimize_pair",
    "optimize_pairs",
    "DEFAULT_TOL",
    "DEFAULT_MAX_ITER",
]

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 50

BRANCHES = ("interior", "cap", "zero", "degenerate_full", "degenerate_zero")
_INTERIOR, _CAP, _ZERO, _DEG_FULL, _DEG_ZERO = range(5)


def cu_power_rule(w, g_mb, g_me, h_nb, h_ne, q, N0, P_cap):
    """Return ``P_cap`` if the BS sees the CU better than the eavesdropper, else 0.

    Compares ``|w^H g_mb|^2 / ||g_me||^4`` against the ratio of the
    interference-plus-noise terms at the BS and at the eavesdropper. Ties go
    to 0. Jammer terms are dropped when ``h_nb``/``h_ne`` are None.
    """
    wn = sq_norm(w)
    if np.any(np.asarray(wn) == 0):
        raise ValueError("receive filter must be nonzero")
    gme = sq_norm(g_me)
    lhs = np.abs(inner(w, g_mb)) ** 2 / gme**2
    num = N0 * wn
    den = N0 * gme
    if h_nb is not None and h_ne is not None:
        num = num + q * np.abs(inner(w, h_nb)) ** 2
        den = den + q * np.abs(inner(g_me, h_ne)) ** 2
    out = np.where(lhs > num / den, P_cap, 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class JammerConstants:
    eps: float
    delta: float
    vareps: float
    zeta: float
    kappa: float


def jammer_constants(w, chans, P, N0) -> JammerConstants:
    g_mb, g_me, h_nb, h_ne = chans
    gme = sq_norm(g_me)
    return JammerConstants(
        eps=np.abs(np.sqrt(P) * inner(w, g_mb) - 1.0) ** 2 + N0 * sq_norm(w),
        delta=np.abs(inner(w, h_nb)) ** 2,
        vareps=P * gme**2,
        zeta=np.abs(inner(g_me, h_ne)) ** 2,
        kappa=N0 * gme,
    )


def chi_from_constants(c: JammerConstants, q):
    q = np.asarray(q, dtype=float)
    return -np.log2(q * c.delta + c.eps) - np.log1p(c.vareps / (q * c.zeta + c.kappa)) / np.log(2.0)


def derivative_numerator(c: JammerConstants, q):
    """Numerator of d chi / d q; its sign is the sign of the derivative."""
    q = np.asarray(q, dtype=float)
    return (
        -(q**2) * c.delta * c.zeta**2
        - 2.0 * q * c.delta * c.zeta * c.kappa
        + c.eps * c.vareps * c.zeta
        - c.delta * c.vareps * c.kappa
        - c.delta * c.kappa**2
    )


@dataclass(frozen=True)
class JammerSolution:
    q_star: float
    branch: str
    discriminant: float
    root_pos: float | None = None
    root_neg: float | None = None


def optimal_jammer_power_batch(eps, delta, vareps, zeta, kappa, Q_cap):
    """Vectorized jammer power. Returns ``(q, branch_code, disc, root_pos, root_neg)``.

    Roots are NaN where the quadratic has none (or is degenerate). The
    positive root uses the cancellation-free form ``2c / (-b + sqrt(disc))``.
    """
    eps, delta, vareps, zeta, kappa, Q_cap = np.broadcast_arrays(
        *(np.asarray(x, dtype=float) for x in (eps, delta, vareps, zeta, kappa, Q_cap))
    )
    arrays = (eps, delta, vareps, zeta, kappa, Q_cap)
    if not all(np.all(np.isfinite(x)) for x in arrays):
        raise ValueError("non-finite jammer constants")

    gap = eps * zeta - delta * kappa
    disc = 4.0 * delta * vareps * zeta**2 * gap
    regular = (delta > 0) & (zeta > 0)
    has_roots = regular & (gap > 0)

    with np.errstate(divide="ignore", invalid="ignore"):
        sq = np.sqrt(np.where(has_roots, delta * vareps * gap, 0.0))
        c0 = vareps * gap - delta * kappa**2
        root_pos = np.where(has_roots, c0 / (zeta * (delta * kappa + sq)), np.nan)
        root_neg = np.where(has_roots, -kappa / zeta - sq / (delta * zeta), np.nan)

    q = np.zeros_like(eps)
    code = np.full(eps.shape, _ZERO, dtype=np.int8)

    interior = has_roots & (root_pos > 0) & (root_pos < Q_cap)
    cap = has_roots & (root_pos >= Q_cap) & (root_pos > 0)
    q = np.where(interior, root_pos, q)
    code = np.where(interior, _INTERIOR, code)
    q = np.where(cap, Q_cap, q)
    code = np.where(cap, _CAP, code)

    deg_full = (delta == 0) & (zeta > 0)
    q = np.where(deg_full, Q_cap, q)
    code = np.where(deg_full, _DEG_FULL, code)
    deg_zero = zeta == 0
    q = np.where(deg_zero, 0.0, q)
    code = np.where(deg_zero, _DEG_ZERO, code)
    return q, code, disc, root_pos, root_neg


def optimal_jammer_power(c: JammerConstants, Q_cap: float) -> JammerSolution:
    """Jammer power maximizing ``chi(q)`` on ``[0, Q_cap]`` for a fixed filter.

    Beyond the regular quadratic case: ``delta == 0`` with ``zeta > 0``
    makes the objective strictly increasing (full power), and ``zeta == 0``
    means the jammer never reaches the eavesdropper (zero power).
    """
    if Q_cap < 0:
        raise ValueError("Q_cap must be nonnegative")
    q, code, disc, rp, rn = optimal_jammer_power_batch(c.eps, c.delta, c.vareps, c.zeta, c.kappa, Q_cap)
    rp, rn = float(rp), float(rn)
    return JammerSolution(
        q_star=float(q),
        branch=BRANCHES[int(code)],
        discriminant=float(disc),
        root_pos=None if np.isnan(rp) else rp,
        root_neg=None if np.isnan(rn) else rn,
    )


@dataclass
class PairBatch:
    """Result of :func:`optimize_pairs` over a stack of pairs (batch shape S)."""

    filters: np.ndarray      # S + (B,)
    q: np.ndarray            # S
    chi: np.ndarray          # S, final unclamped objective
    chi_initial: np.ndarray  # S, objective at q = 0
    iterations: np.ndarray   # S
    traces: np.ndarray       # (max_iter + 1,) + S, NaN past convergence
    branch: np.ndarray       # S, code of the last jammer update

    def __getitem__(self, idx) -> "PairBatch":
        """Sub-batch along the leading batch axes (e.g. one topology of a stack)."""
        if not isinstance(idx, tuple):
            idx = (idx,)
        return PairBatch(
            filters=self.filters[idx],
            q=self.q[idx],
            chi=self.chi[idx],
            chi_initial=self.chi_initial[idx],
            iterations=self.iterations[idx],
            traces=self.traces[(slice(None),) + idx],
            branch=self.branch[idx],
        )

    def trace(self, idx) -> np.ndarray:
        """Objective trace of one pair, from the q = 0 start to convergence."""
        if not isinstance(idx, tuple):
            idx = (idx,)
        col = self.traces[(slice(None),) + idx]
        return col[~np.isnan(col)]


def optimize_pairs(chans, P, Q, N0, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER) -> PairBatch:
    """Alternate MMSE filter and jammer power for every pair in a stack.

    Starting from ``q = 0`` and the jammer-free MMSE filter, each iteration
    sets the jammer power optimally for the current filter and then
    recomputes the MMSE filter for that power, so the objective reported at
    every step is attained by an MMSE receiver. A pair stops once its
    objective changes by at most ``tol * max(1, |chi|)``.

    Args:
        chans: ``(g_mb, g_me, h_nb, h_ne)`` with shapes S+(B,), S+(E,), S+(B,), S+(E,).
        P, Q: CU and D2D power caps, broadcastable to S.
        N0: noise power.
    """
    if tol <= 0 or max_iter < 1:
        raise ValueError("need tol > 0 and max_iter >= 1")
    g_mb, g_me, h_nb, h_ne = (np.asarray(x, dtype=complex) for x in chans)
    shape = np.broadcast_shapes(g_mb.shape[:-1], g_me.shape[:-1], h_nb.shape[:-1], h_ne.shape[:-1])
    B, E = g_mb.shape[-1], g_me.shape[-1]
    g_mb = np.broadcast_to(g_mb, shape + (B,)).reshape(-1, B)
    h_nb = np.broadcast_to(h_nb, shape + (B,)).reshape(-1, B)
    g_me = np.broadcast_to(g_me, shape + (E,)).reshape(-1, E)
    h_ne = np.broadcast_to(h_ne, shape + (E,)).reshape(-1, E)
    P = np.broadcast_to(np.asarray(P, dtype=float), shape).reshape(-1)
    Q = np.broadcast_to(np.asarray(Q, dtype=float), shape).reshape(-1)
    size = P.size

    q = np.zeros(size)
    w = mmse_filter(g_mb, h_nb, P, q, N0)
    chi = chi_tilde(w, q, (g_mb, g_me, h_nb, h_ne), P, N0)
    chi = np.atleast_1d(chi).astype(float)
    traces = np.full((max_iter + 1, size), np.nan)
    traces[0] = chi
    chi0 = chi.copy()
    iters = np.zeros(size, dtype=int)
    branch = np.full(size, _DEG_ZERO, dtype=np.int8)
    active = np.arange(size)

    # fixed per-pair summaries that do not depend on w
    gme = sq_norm(g_me)
    vareps_all = P * gme**2
    zeta_all = np.abs(inner(g_me, h_ne)) ** 2
    kappa_all = N0 * gme

    for t in range(1, max_iter + 1):
        if active.size == 0:
            break
        a = active
        wa = w[a]
        eps = np.abs(np.sqrt(P[a]) * inner(wa, g_mb[a]) - 1.0) ** 2 + N0 * sq_norm(wa)
        delta = np.abs(inner(wa, h_nb[a])) ** 2
        qa, code, *_ = optimal_jammer_power_batch(eps, delta, vareps_all[a], zeta_all[a], kappa_all[a], Q[a])
        wa = mmse_filter(g_mb[a], h_nb[a], P[a], qa, N0)
        chia = np.atleast_1d(chi_tilde(wa, qa, (g_mb[a], g_me[a], h_nb[a], h_ne[a]), P[a], N0))

        done = np.abs(chia - chi[a]) <= tol * np.maximum(1.0, np.abs(chia))
        q[a], w[a], chi[a], branch[a] = qa, wa, chia, code
        traces[t, a] = chia
        iters[a] = t
        active = a[~done]

    return PairBatch(
        filters=w.reshape(shape + (B,)),
        q=q.reshape(shape),
        chi=chi.reshape(shape),
        chi_initial=chi0.reshape(shape),
        iterations=iters.reshape(shape),
        traces=traces.reshape((max_iter + 1,) + shape),
        branch=branch.reshape(shape),
    )


@dataclass(frozen=True)
class PairEvaluation:
    cu_index: int
    d2d_index: int
    rb_index: int
    filter: np.ndarray
    q: float
    chi_tilde: float
    psi: float
    iterations: int
    trace: tuple = field(default_factory=tuple)


def optimize_pair(m, n, k_m, chans: ChannelSet, P, Q, N0, V, K,
                  tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER) -> PairEvaluation:
    """Optimize one CU-D2D pair on the CU's RB; see :func:`optimize_pairs`."""
    pair = chans.pair(m, n, k_m) if isinstance(chans, ChannelSet) else PairChannels(*chans)
    res = optimize_pairs(pair, P, Q, N0, tol=tol, max_iter=max_iter)
    chi = float(res.chi)
    return PairEvaluation(
        cu_index=m,
        d2d_index=n,
        rb_index=k_m,
        filter=res.filters,
        q=float(res.q),
        chi_tilde=chi,
        psi=(V / K) * max(0.0, chi),
        iterations=int(res.iterations),
        trace=tuple(float(x) for x in res.traces[: int(res.iterations) + 1]),
    )
