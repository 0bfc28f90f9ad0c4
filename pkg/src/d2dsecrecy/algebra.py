"""Small dense complex linear algebra used by the receive-filter code.

Every routine accepts stacked inputs: the trailing axis (or trailing two
axes for matrices) carries the vector/matrix, leading axes are batch axes.
Matrices are at most ~8x8 here, so direct factorization is used throughout.
"""

import numpy as np

__all__ = ["NotPositiveDefiniteError", "inner", "sq_norm", "hpd_solve"]


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Raised when a Cholesky factorization breaks down."""


def inner(a, b):
    """Return ``a^H b`` (conjugate-linear in ``a``) along the last axis."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[-1:] != b.shape[-1:]:
        raise ValueError(f"length mismatch: {a.shape[-1:]} vs {b.shape[-1:]}")
    out = np.einsum("...i,...i->...", a.conj(), b)
    return out[()] if out.ndim == 0 else out


def sq_norm(a):
    """Squared Euclidean norm along the last axis, as a real number."""
    a = np.asarray(a)
    out = np.einsum("...i,...i->...", a.real, a.real) + np.einsum("...i,...i->...", a.imag, a.imag)
    return out[()] if out.ndim == 0 else out


def hpd_solve(A, b):
    """Solve ``A x = b`` for Hermitian positive definite ``A``.

    Uses a Cholesky factorization ``A = L L^H`` followed by forward and
    backward substitution; no inverse is formed.

    Args:
        A: array of shape (..., n, n), Hermitian positive definite.
        b: array of shape (..., n), broadcast against the batch axes of A.

    Returns:
        x with shape (..., n).

    Raises:
        ValueError: on non-finite input or mismatched dimensions.
        NotPositiveDefiniteError: if the factorization breaks down.
    """
    A = np.asarray(A, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise ValueError(f"A must be square, got shape {A.shape}")
    n = A.shape[-1]
    if b.shape[-1] != n:
        raise ValueError(f"dimension mismatch: A is {n}x{n}, b has length {b.shape[-1]}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise ValueError("non-finite input to hpd_solve")

    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(str(exc)) from None
    if not np.all(np.isfinite(L)):
        raise NotPositiveDefiniteError("Cholesky factor is not finite")

    batch = np.broadcast_shapes(A.shape[:-2], b.shape[:-1])
    L = np.broadcast_to(L, batch + (n, n))
    b = np.broadcast_to(b, batch + (n,))
    diag = np.diagonal(L, axis1=-2, axis2=-1).real

    # L y = b
    y = np.empty(batch + (n,), dtype=complex)
    for i in range(n):
        acc = b[..., i] - np.einsum("...j,...j->...", L[..., i, :i], y[..., :i])
        y[..., i] = acc / diag[..., i]
    # L^H x = y
    x = np.empty_like(y)
    for i in range(n - 1, -1, -1):
        acc = y[..., i] - np.einsum("...j,...j->...", L[..., i + 1:, i].conj(), x[..., i + 1:])
        x[..., i] = acc / diag[..., i]
    return x
