"""Receive filters, SINRs, MMSE values and secrecy rates.

Functions broadcast over leading axes: vectors live on the last axis, and
powers may be scalars or arrays matching the batch shape. A jammer channel
given as ``None`` means "no D2D partner" and drops every jammer term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import hpd_solve, inner, sq_norm

__all__ = [
    "LinkRates",
    "mmse_filter",
    "sinr_bs",
    "sinr_eve_mrc",
    "secrecy_rate",
    "secrecy_bits",
    "phi_no_d2d",
    "mmse_of_link",
    "chi_tilde",
]

_LN2 = np.log(2.0)


def _scalarize(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def _log2_1p(x):
    return np.log1p(x) / _LN2


@dataclass(frozen=True)
class LinkRates:
    eta: float
    gamma: float
    secrecy_rate: float


def mmse_filter(g, h, P, q, N0):
    """MMSE receive filter ``sqrt(P) (P g g^H + q h h^H + N0 I)^-1 g``.

    With ``h=None`` (or ``q=0``) this is the jammer-free filter.
    """
    g = np.asarray(g, dtype=complex)
    P = np.asarray(P, dtype=float)
    B = g.shape[-1]
    A = P[..., None, None] * (g[..., :, None] * g[..., None, :].conj())
    if h is not None:
        h = np.asarray(h, dtype=complex)
        if h.shape[-1] != B:
            raise ValueError(f"dimension mismatch: g has length {B}, h has length {h.shape[-1]}")
        q = np.asarray(q, dtype=float)
        A = A + q[..., None, None] * (h[..., :, None] * h[..., None, :].conj())
    A = A + N0 * np.eye(B)
    return np.sqrt(P)[..., None] * hpd_solve(A, g)


def _check_filter(w):
    wn = sq_norm(w)
    if np.any(np.asarray(wn) == 0):
        raise ValueError("receive filter must be nonzero")
    return wn


def sinr_bs(w, g, h, p, q, N0):
    """Post-processing SINR at the BS: ``p|w^H g|^2 / (q|w^H h|^2 + N0||w||^2)``."""
    wn = _check_filter(w)
    den = N0 * wn
    if h is not None:
        den = den + np.asarray(q) * np.abs(inner(w, h)) ** 2
    return _scalarize(np.asarray(p) * np.abs(inner(w, g)) ** 2 / den)


def sinr_eve_mrc(g_me, h_ne, p, q, N0):
    """SINR of an eavesdropper combining with weights matched to ``g_me``."""
    gn = sq_norm(g_me)
    if np.any(np.asarray(gn) == 0):
        raise ValueError("g_me must be nonzero")
    den = N0 * gn
    if h_ne is not None:
        den = den + np.asarray(q) * np.abs(inner(g_me, h_ne)) ** 2
    return _scalarize(np.asarray(p) * gn**2 / den)


def secrecy_bits(eta, gamma):
    """Unclamped ``log2(1+eta) - log2(1+gamma)``."""
    return _scalarize(_log2_1p(eta) - _log2_1p(gamma))


def secrecy_rate(eta, gamma, V, K) -> LinkRates:
    if eta < 0 or gamma < 0:
        raise ValueError("SINRs must be nonnegative")
    c = (V / K) * max(0.0, float(secrecy_bits(eta, gamma)))
    return LinkRates(eta=float(eta), gamma=float(gamma), secrecy_rate=c)


def phi_no_d2d(g_mb, g_me, P, N0, V, K):
    """Secrecy rate of a CU alone on an RB with the MMSE receiver and full power.

    Without a jammer the MMSE filter attains ``P||g_mb||^2/N0`` at the BS, so
    only the two channel norms matter.
    """
    a = np.asarray(P) * sq_norm(g_mb) / N0
    b = np.asarray(P) * sq_norm(g_me) / N0
    return _scalarize((V / K) * np.maximum(0.0, _log2_1p(a) - _log2_1p(b)))


def mmse_of_link(w, g, h, P, q, N0):
    """Mean-square error ``|sqrt(P) w^H g - 1|^2 + q|w^H h|^2 + N0||w||^2``."""
    err = np.abs(np.sqrt(P) * inner(w, g) - 1.0) ** 2 + N0 * sq_norm(w)
    if h is not None:
        err = err + np.asarray(q) * np.abs(inner(w, h)) ** 2
    return _scalarize(err)


def chi_tilde(w, q, chans, P, N0):
    """MMSE-based secrecy objective of a CU-D2D pair, in bit/s/Hz, unclamped.

    ``chans`` is a :class:`~d2dsecrecy.model.PairChannels` (or any 4-tuple
    ``(g_mb, g_me, h_nb, h_ne)``).
    """
    g_mb, g_me, h_nb, h_ne = chans
    mse = mmse_of_link(w, g_mb, h_nb, P, q, N0)
    gamma = sinr_eve_mrc(g_me, h_ne, P, q, N0)
    return _scalarize(-np.log2(mse) - _log2_1p(gamma))
