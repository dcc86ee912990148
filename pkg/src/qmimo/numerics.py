"""Shared numerical kernels: guarded factorizations and root bracketing."""
from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import NumericalError

# Relative jitter added to the diagonal when a Cholesky factorization of a
# nominally positive definite matrix fails.
CHOLESKY_JITTER = 1e-12

# Smallest denominator allowed in elementwise power updates.
DENOM_FLOOR = 1e-12

# Step-size floor for backtracking line searches.
STEP_FLOOR = 1e-8


def hermitize(a: np.ndarray) -> np.ndarray:
    """Symmetrize a nominally Hermitian matrix."""
    return 0.5 * (a + a.conj().T)


def cholesky_guarded(c: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor of a positive definite matrix.

    On failure, retries once with a diagonal jitter proportional to the
    mean diagonal magnitude; a second failure raises NumericalError.
    """
    try:
        return np.linalg.cholesky(c)
    except np.linalg.LinAlgError:
        pass
    n = c.shape[0]
    jitter = CHOLESKY_JITTER * max(np.trace(c).real / n, 1.0)
    try:
        return np.linalg.cholesky(c + jitter * np.eye(n))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"Cholesky failed for {n}x{n} matrix even with jitter {jitter:.3e}"
        ) from exc


def solve_psd(c: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve c @ x = b for Hermitian positive definite c."""
    low = cholesky_guarded(c)
    return scipy.linalg.cho_solve((low, True), b)


def inv_psd(c: np.ndarray) -> np.ndarray:
    """Inverse of a Hermitian positive definite matrix via Cholesky."""
    return hermitize(solve_psd(c, np.eye(c.shape[0], dtype=c.dtype)))


def logdet_capacity_nats(c_e: np.ndarray, x: np.ndarray) -> float:
    """log det(I + C_e^{-1} X X^H) in nats, for positive definite C_e.

    Whitens X by the Cholesky factor of C_e and sums log(1 + s_i^2) over
    the singular values of the whitened matrix, which keeps the
    computation stable when C_e is badly scaled.
    """
    low = cholesky_guarded(c_e)
    white = scipy.linalg.solve_triangular(low, x, lower=True)
    s = np.linalg.svd(white, compute_uv=False)
    return float(np.sum(np.log1p(s**2)))


def bisect_decreasing(
    fn,
    hi: float,
    *,
    tol: float,
    max_iter: int = 200,
    max_doublings: int = 16,
) -> float:
    """Root of a continuous decreasing function on [0, inf).

    Finds mu >= 0 with fn(mu) ~= 0 given fn decreasing in mu. If
    fn(0) <= 0 the constraint is slack and 0 is returned. The initial
    bracket [0, hi] is expanded by doubling when fn(hi) > 0. Bisection
    runs until the bracket collapses to floating point resolution or
    max_iter halvings, whichever comes first; the final residual must
    satisfy |fn(mu)| <= tol or NumericalError is raised.
    """
    f0 = fn(0.0)
    if f0 <= 0.0:
        return 0.0
    if hi <= 0.0:
        hi = 1.0
    f_hi = fn(hi)
    doublings = 0
    while f_hi > 0.0:
        if doublings >= max_doublings:
            raise NumericalError(
                f"bracket expansion exhausted: fn({hi:.6e}) = {f_hi:.6e} > 0 "
                f"after {doublings} doublings"
            )
        hi *= 2.0
        f_hi = fn(hi)
        doublings += 1
    lo = 0.0
    mid = hi
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = fn(mid)
        if f_mid > 0.0:
            lo = mid
        else:
            hi = mid
    root = hi
    residual = fn(root)
    if abs(residual) > tol:
        raise NumericalError(
            f"bisection stalled: mu = {root:.6e}, residual {residual:.6e} "
            f"exceeds tolerance {tol:.1e} (bracket [{lo:.6e}, {hi:.6e}])"
        )
    return root
