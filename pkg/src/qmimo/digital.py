"""Fully digital precoding: water-filling and the quantization-aware design.

The quantization-aware design keeps the right-singular-vector beam
directions of the channel and reallocates power across them. Each outer
iteration freezes the surrogate at the current allocation and solves
the resulting separable problem exactly, so the rate estimate is
nondecreasing across iterations.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .channel import ChannelRealization, SvdBasis, svd_basis
from .config import SystemConfig
from .errors import DegenerateChannelError
from .metrics import LN2, effective_noise_cov_approx, spectral_efficiency
from .numerics import DENOM_FLOOR, bisect_decreasing
from .quantizer import bussgang_model
from .surrogate import SurrogateState, build_state

POWER_UPDATES = ("damped", "stationary")

# Relative tolerance on the power residual of the bisection.
POWER_TOL = 1e-8


@dataclass(frozen=True)
class PowerAllocation:
    """Per-stream powers and the multiplier that enforces the budget."""

    p: np.ndarray
    mu: float


@dataclass(frozen=True)
class DigitalResult:
    """Outcome of the iterative digital design.

    F           precoder [Nt x Ns]
    se_trace    rate estimate per outer iteration, bits, starting at the
                initial allocation
    iterations  number of power updates performed
    p           final per-stream powers
    mu          final power multiplier
    """

    F: np.ndarray
    se_trace: np.ndarray
    iterations: int
    p: np.ndarray
    mu: float


def waterfill_powers(sv: Sequence[float], pt: float, sigma_n2: float) -> np.ndarray:
    """Water-filling powers for parallel channels with gains sv**2.

    Solves max sum log(1 + p_i sv_i^2 / sigma_n2) subject to sum p = pt,
    p >= 0. Accepts singular values in any order; zero-gain channels get
    zero power. Raises DegenerateChannelError when every gain is zero.
    """
    sv = np.asarray(sv, dtype=float)
    if np.all(sv <= 0):
        raise DegenerateChannelError("all singular values are zero, nothing to allocate power to")
    order = np.argsort(sv)[::-1]
    inv_gain = np.full(sv.shape, np.inf)
    positive = sv > 0
    inv_gain[positive] = sigma_n2 / sv[positive] ** 2
    sorted_inv = inv_gain[order]
    k = int(np.sum(positive))
    while k > 0:
        level = (pt + np.sum(sorted_inv[:k])) / k
        if level > sorted_inv[k - 1]:
            break
        k -= 1
    p = np.maximum(0.0, level - inv_gain)
    return p


def waterfilling(
    ch: Union[ChannelRealization, np.ndarray],
    pt: float,
    sigma_n2: float,
    ns: int,
) -> np.ndarray:
    """Classic SVD precoder with water-filling power loading [Nt x Ns].

    Streams whose water-filling power is zero are kept as zero columns
    so the output shape is independent of the operating point.
    """
    h = ch.H if isinstance(ch, ChannelRealization) else np.asarray(ch)
    cfg = SystemConfig(Nt=h.shape[1], Nr=h.shape[0], Ns=ns, Nrf=ns, Pt=pt, sigma_n2=sigma_n2)
    basis = svd_basis(h, cfg)
    return _waterfilling_from_basis(basis, pt, sigma_n2, ns)


def _waterfilling_from_basis(basis: SvdBasis, pt: float, sigma_n2: float, ns: int) -> np.ndarray:
    p = waterfill_powers(basis.s[:ns], pt, sigma_n2)
    return basis.V[:, :ns] * np.sqrt(p)[None, :]


def power_step(
    state: SurrogateState,
    pt: float,
    tol: float = POWER_TOL,
    update: str = "damped",
) -> PowerAllocation:
    """Exact power reallocation for the frozen surrogate.

    Solves the multiplier equation sum_i p_i(mu) = pt by bisection,
    where p_i(mu) = sqrt(K_ii / (J_ii + mu)) for the damped update and
    its square for the stationary form. Both share the same fixed
    points. When the unconstrained allocation already fits the budget
    the multiplier is zero.
    """
    if update not in POWER_UPDATES:
        raise ValueError(f"update must be one of {POWER_UPDATES}, got {update!r}")
    if state.J_hat is None or state.K_hat is None:
        raise ValueError("state was built without the singular basis; pass v and p_hat to build_state")
    j = np.diagonal(state.J_hat).real
    k = np.maximum(np.diagonal(state.K_hat).real, 0.0)

    def powers(mu: float) -> np.ndarray:
        ratio = k / np.maximum(j + mu, DENOM_FLOOR)
        return np.sqrt(ratio) if update == "damped" else ratio**2

    mu_ub = float(np.linalg.norm(k) / np.sqrt(pt))
    mu = bisect_decreasing(lambda m: float(np.sum(powers(m))) - pt, mu_ub, tol=tol * pt)
    p = powers(mu)
    total = float(np.sum(p))
    if total > pt > 0:
        p = p * (pt / total)
    return PowerAllocation(p=p, mu=mu)


def mm_digital(
    ch: Union[ChannelRealization, np.ndarray],
    cfg: SystemConfig,
    update: str = "damped",
    power_tol: float = POWER_TOL,
) -> DigitalResult:
    """Quantization-aware digital precoder via iterated power steps.

    Starts from the water-filling allocation on the leading right
    singular vectors, then alternates surrogate construction and exact
    power reallocation until the rate estimate moves less than
    cfg.epsilon or cfg.max_outer_iters is reached.
    """
    h = ch.H if isinstance(ch, ChannelRealization) else np.asarray(ch)
    basis = svd_basis(h, cfg)
    v = basis.V
    p = waterfill_powers(basis.s[: cfg.Ns], cfg.Pt, cfg.sigma_n2)
    g = bussgang_model(cfg).G

    trace = []
    mu = 0.0
    r_prev = None
    iterations = 0
    for _ in range(cfg.max_outer_iters):
        state = build_state(h, v * np.sqrt(p)[None, :], g, cfg.sigma_n2, v=v, p_hat=p)
        if r_prev is None:
            r_prev = state.r_hat_bits
            trace.append(r_prev)
        alloc = power_step(state, cfg.Pt, tol=power_tol, update=update)
        p, mu = alloc.p, alloc.mu
        iterations += 1
        f = v * np.sqrt(p)[None, :]
        r_new = spectral_efficiency(h, f, g, effective_noise_cov_approx(h, f, g, cfg.sigma_n2).C_e)
        trace.append(r_new)
        if abs(r_new - r_prev) <= cfg.epsilon:
            r_prev = r_new
            break
        r_prev = r_new

    f = v * np.sqrt(p)[None, :]
    return DigitalResult(F=f, se_trace=np.asarray(trace), iterations=iterations, p=p, mu=mu)
