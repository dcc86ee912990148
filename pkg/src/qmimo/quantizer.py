"""Scalar quantization models: Lloyd-Max codebooks and Bussgang statistics.

Each receive antenna quantizes the real and imaginary parts separately
with the same b-bit scalar quantizer, scaled per dimension so the
quantizer always sees an (approximately) unit-variance Gaussian input.
The linearized model z = G y + eta splits the quantizer output into a
scaled input plus distortion that is uncorrelated with the input.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import solve_banded
from scipy.special import ndtr, ndtri

from .config import SystemConfig
from .errors import ConfigurationError, NumericalError
from .numerics import hermitize

# Fitted exponential model for the normalized distortion of a b-bit
# Lloyd-Max quantizer driven by a unit-variance Gaussian input.
GAMMA_LOG2_SLOPE = -1.74
GAMMA_LOG2_INTERCEPT = 0.28

QD_SAMPLE_FLOOR = 10_000
_CHUNK = 20_000


def distortion_factor(bits: int) -> float:
    """Fitted normalized distortion gamma(b) = 2^(-1.74 b + 0.28)."""
    if bits < 1:
        raise ConfigurationError(f"bits must be >= 1, got {bits!r}")
    return 2.0 ** (GAMMA_LOG2_SLOPE * bits + GAMMA_LOG2_INTERCEPT)


@dataclass(frozen=True)
class BussgangModel:
    """Diagonal linearization gains for identical per-antenna ADCs.

    G       linear gain matrix (1 - gamma) I [Nr x Nr]
    Gamma   distortion factor matrix gamma I [Nr x Nr]
    """

    G: np.ndarray
    Gamma: np.ndarray


def bussgang_model(cfg: SystemConfig) -> BussgangModel:
    """Bussgang gain model implied by the fitted distortion factor."""
    gamma = distortion_factor(cfg.bits)
    eye = np.eye(cfg.Nr)
    return BussgangModel(G=(1.0 - gamma) * eye, Gamma=gamma * eye)


def _phi(x: np.ndarray) -> np.ndarray:
    """Standard normal pdf, zero at infinite arguments."""
    out = np.zeros_like(x, dtype=float)
    finite = np.isfinite(x)
    out[finite] = np.exp(-0.5 * x[finite] ** 2) / np.sqrt(2.0 * np.pi)
    return out


def _x_phi(x: np.ndarray) -> np.ndarray:
    """x * pdf(x) with the x -> +-inf limits taken to be zero."""
    out = np.zeros_like(x, dtype=float)
    finite = np.isfinite(x)
    out[finite] = x[finite] * np.exp(-0.5 * x[finite] ** 2) / np.sqrt(2.0 * np.pi)
    return out


@dataclass(frozen=True)
class Quantizer:
    """Symmetric b-bit scalar codebook for a unit-variance Gaussian.

    levels      reconstruction levels, ascending [2^b]
    thresholds  decision boundaries with leading -inf and trailing +inf
                [2^b + 1]
    gamma       normalized mean squared distortion of the codebook
    """

    bits: int
    levels: np.ndarray
    thresholds: np.ndarray
    gamma: float

    @property
    def bussgang_gain(self) -> float:
        """Linear gain 1 - gamma implied by this codebook."""
        return 1.0 - self.gamma


def _codebook_mse(levels: np.ndarray, thresholds: np.ndarray) -> float:
    lo, hi = thresholds[:-1], thresholds[1:]
    prob = ndtr(hi) - ndtr(lo)
    second = prob + _x_phi(lo) - _x_phi(hi)
    first = _phi(lo) - _phi(hi)
    return float(np.sum(second - 2.0 * levels * first + levels**2 * prob))


def _cells(levels: np.ndarray, bits: int):
    """Cell boundaries, probabilities, and centroids for given levels."""
    inner = 0.5 * (levels[:-1] + levels[1:])
    lo = np.concatenate(([-np.inf], inner))
    hi = np.concatenate((inner, [np.inf]))
    prob = ndtr(hi) - ndtr(lo)
    if np.any(prob <= 0):
        raise NumericalError(f"empty quantizer cell during Lloyd iteration at bits = {bits}")
    return lo, hi, prob, (_phi(lo) - _phi(hi)) / prob


def _newton_step(levels: np.ndarray, bits: int) -> np.ndarray:
    """One Newton step on the centroid fixed-point residual.

    The residual r(l) = l - centroid(l) couples each level only to its
    neighbours through the midpoint boundaries, so the Jacobian is
    tridiagonal and the step costs O(n).
    """
    lo, hi, prob, cent = _cells(levels, bits)
    da = np.zeros_like(levels)
    db = np.zeros_like(levels)
    fin = np.isfinite(lo)
    da[fin] = _phi(lo[fin]) * (cent[fin] - lo[fin]) / prob[fin]
    fin = np.isfinite(hi)
    db[fin] = _phi(hi[fin]) * (hi[fin] - cent[fin]) / prob[fin]
    n = levels.size
    banded = np.zeros((3, n))
    banded[0, 1:] = -0.5 * db[:-1]
    banded[1, :] = 1.0 - 0.5 * (da + db)
    banded[2, :-1] = -0.5 * da[1:]
    return solve_banded((1, 1), banded, levels - cent)


@lru_cache(maxsize=None)
def lloyd_max_codebook(bits: int, tol: float = 1e-10, max_iter: int = 10_000) -> Quantizer:
    """Lloyd-Max codebook for a unit-variance Gaussian source.

    Starts from a quantile initialization, runs a short span of
    closed-form centroid and midpoint-threshold sweeps, then switches to
    a Newton iteration on the stationarity system. Plain alternation
    converges only linearly, with a rate that degrades as the codebook
    grows, so the Newton polish is what makes large codebooks cheap.
    Stops once every level agrees with its cell centroid to within tol
    in the max norm, or at the precision floor of double arithmetic for
    the largest codebooks, keeping the best iterate seen. A Newton step
    that breaks the level ordering is replaced by a plain sweep. The
    converged codebook is symmetrized exactly about zero.
    """
    if not 1 <= bits <= 12:
        raise ConfigurationError(f"bits must lie in [1, 12], got {bits!r}")
    n_levels = 2**bits
    levels = ndtri((2.0 * np.arange(n_levels) + 1.0) / (2.0 * n_levels))
    warm = 50
    best_resid = np.inf
    best_levels = levels
    stalled = 0
    for it in range(max_iter):
        cent = _cells(levels, bits)[3]
        resid = float(np.max(np.abs(levels - cent)))
        if resid < 0.9 * best_resid:
            best_resid, best_levels, stalled = resid, levels, 0
        else:
            stalled += 1
        if resid < tol:
            best_levels = levels
            break
        # residual noise from cancellation in the cell integrals caps
        # the attainable accuracy; 25 iterations without improvement
        # past the warm phase means that floor has been reached
        if it >= warm and stalled >= 25:
            if best_resid > 1e-6:
                raise NumericalError(
                    f"Lloyd iteration stalled at residual {best_resid:.1e} for bits = {bits}"
                )
            break
        if it < warm:
            levels = cent
            continue
        new_levels = levels - _newton_step(levels, bits)
        if np.all(np.isfinite(new_levels)) and np.all(np.diff(new_levels) > 0):
            levels = new_levels
        else:
            levels = cent
    else:
        raise NumericalError(f"Lloyd iteration did not converge for bits = {bits} within {max_iter} sweeps")
    levels = 0.5 * (best_levels - best_levels[::-1])
    inner = 0.5 * (levels[:-1] + levels[1:])
    thresholds = np.concatenate(([-np.inf], inner, [np.inf]))
    mse = _codebook_mse(levels, thresholds)
    levels.setflags(write=False)
    thresholds.setflags(write=False)
    return Quantizer(bits=bits, levels=levels, thresholds=thresholds, gamma=mse)


def quantize(x: np.ndarray, per_dim_scale: np.ndarray, q: Quantizer) -> np.ndarray:
    """Apply the codebook elementwise to a complex signal.

    Real and imaginary parts are divided by per_dim_scale, mapped to the
    nearest codebook cell (values on a boundary fall in the upper cell),
    and scaled back. per_dim_scale must be positive and broadcastable to
    the shape of x.
    """
    x = np.asarray(x)
    scale = np.asarray(per_dim_scale, dtype=float)
    if np.any(scale <= 0) or not np.all(np.isfinite(scale)):
        raise ValueError("per_dim_scale must be positive and finite")
    inner = q.thresholds[1:-1]

    def encode(v: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(inner, v.ravel(), side="right").reshape(v.shape)
        return q.levels[idx]

    re = encode(x.real / scale)
    im = encode(x.imag / scale)
    return scale * (re + 1j * im)


@dataclass(frozen=True)
class QdCovariance:
    """Covariance of the quantization distortion eta.

    source is "approximate" for the diagonal closed form and "empirical"
    for the Monte Carlo estimate; sample_count is 0 for the former.
    """

    C_eta: np.ndarray
    source: str
    sample_count: int = 0


def approx_qd_covariance(h: np.ndarray, f: np.ndarray, g: np.ndarray, sigma_n2: float) -> QdCovariance:
    """Diagonal distortion covariance G (I - G) diag(C_y)."""
    hf = h @ f
    c_y_diag = np.sum(np.abs(hf) ** 2, axis=1) + sigma_n2
    gd = np.diagonal(g).real
    return QdCovariance(C_eta=np.diag(gd * (1.0 - gd) * c_y_diag), source="approximate")


def empirical_qd_covariance(
    h: np.ndarray,
    f: np.ndarray,
    q: Quantizer,
    cfg: SystemConfig,
    n_samples: int,
    rng_seed=None,
    gain: float | None = None,
) -> QdCovariance:
    """Monte Carlo covariance of eta = z - G y for the actual codebook.

    Draws Gaussian symbols and noise, runs them through the quantizer
    with the analytic per-dimension scaling sqrt(diag(C_y) / 2), and
    averages eta eta^H. The linear gain defaults to the one implied by
    the codebook distortion, which is what makes eta uncorrelated with
    y; pass gain explicitly to study a mismatched linearization.
    """
    if n_samples < QD_SAMPLE_FLOOR:
        raise ConfigurationError(f"n_samples must be >= {QD_SAMPLE_FLOOR}, got {n_samples}")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    nr = h.shape[0]
    ns = f.shape[1]
    hf = h @ f
    c_y_diag = np.sum(np.abs(hf) ** 2, axis=1) + cfg.sigma_n2
    scale = np.sqrt(c_y_diag / 2.0)[:, None]
    g = q.bussgang_gain if gain is None else float(gain)
    noise_std = np.sqrt(cfg.sigma_n2 / 2.0)

    acc = np.zeros((nr, nr), dtype=complex)
    done = 0
    while done < n_samples:
        m = min(_CHUNK, n_samples - done)
        s = (rng.standard_normal((ns, m)) + 1j * rng.standard_normal((ns, m))) / np.sqrt(2.0)
        n = noise_std * (rng.standard_normal((nr, m)) + 1j * rng.standard_normal((nr, m)))
        y = hf @ s + n
        eta = quantize(y, scale, q) - g * y
        acc += eta @ eta.conj().T
        done += m
    return QdCovariance(C_eta=hermitize(acc / n_samples), source="empirical", sample_count=n_samples)
