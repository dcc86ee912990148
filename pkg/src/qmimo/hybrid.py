"""Hybrid analog/digital precoding for fully and partially connected arrays.

Each outer iteration freezes the rate surrogate at the current precoder
and reduces the resulting quadratic objective f by alternating one or
more projected gradient steps on the analog precoder with an exact
regularized least squares update of the baseband precoder. Decreasing f
increases the surrogate, so accepted outer steps never decrease the
rate estimate.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from .channel import ChannelRealization, svd_basis
from .config import SystemConfig
from .errors import NumericalError
from .metrics import effective_noise_cov_approx, spectral_efficiency
from .numerics import STEP_FLOOR, bisect_decreasing, hermitize, solve_psd
from .quantizer import bussgang_model
from .surrogate import SurrogateState, analog_gradient, build_state, hybrid_objective

# Relative tolerance on the power residual of the multiplier bisection.
POWER_TOL = 1e-8

# Relative decrease of f below which the inner loop stops early.
INNER_DECREASE_TOL = 1e-6


@dataclass(frozen=True)
class HybridPrecoder:
    """Analog/baseband precoder pair with its connectivity mask.

    F_RF          analog precoder [Nt x Nrf], unit-modulus where connected
    F_BB          baseband precoder [Nrf x Ns]
    W             0/1 connectivity mask [Nt x Nrf]
    architecture  "fc" or "pc"
    """

    F_RF: np.ndarray
    F_BB: np.ndarray
    W: np.ndarray
    architecture: str

    @property
    def F(self) -> np.ndarray:
        """Composite precoder F_RF @ F_BB [Nt x Ns]."""
        return self.F_RF @ self.F_BB


@dataclass(frozen=True)
class HybridResult:
    """Outcome of the alternating hybrid design.

    se_trace holds the rate estimate in bits after each outer iteration;
    lam is the final power multiplier of the baseband update.
    """

    precoder: HybridPrecoder
    se_trace: np.ndarray
    outer_iterations: int
    inner_iterations_total: int
    lam: float


def block_mask(nt: int, nrf: int) -> np.ndarray:
    """Connectivity of a partially connected array: one disjoint block of
    nt / nrf antennas per RF chain."""
    if nt % nrf != 0:
        raise ValueError(f"nt must be divisible by nrf, got nt = {nt}, nrf = {nrf}")
    m = nt // nrf
    w = np.zeros((nt, nrf))
    for j in range(nrf):
        w[j * m : (j + 1) * m, j] = 1.0
    return w


def project_analog(f_rf: np.ndarray, architecture: str) -> np.ndarray:
    """Nearest feasible analog precoder, entrywise.

    Keeps only the phase of each entry ("fc"), additionally zeroing the
    entries outside the block structure ("pc"). Entries that are exactly
    zero project to 1, the phase-zero convention.
    """
    if architecture not in ("fc", "pc"):
        raise ValueError(f"architecture must be 'fc' or 'pc', got {architecture!r}")
    out = np.exp(1j * np.angle(f_rf))
    if architecture == "pc":
        out = block_mask(*f_rf.shape) * out
    return out


def pgd_analog_step(
    state: SurrogateState,
    hp: HybridPrecoder,
    n_steps: int = 1,
) -> HybridPrecoder:
    """Projected gradient descent on the analog precoder.

    Each step moves along the normalized negative gradient of f, projects
    back onto the feasible set, and backtracks the step size from 1 until
    f does not increase. At the step floor the move is rejected, which
    leaves the pair unchanged and keeps f monotone.
    """
    f_rf = hp.F_RF
    for _ in range(n_steps):
        grad = analog_gradient(state, f_rf, hp.F_BB)
        gnorm = float(np.linalg.norm(grad))
        if gnorm == 0.0:
            break
        direction = grad / gnorm
        f_cur = hybrid_objective(state, f_rf, hp.F_BB)
        beta = 1.0
        while True:
            cand = project_analog(f_rf - beta * direction, hp.architecture)
            if hybrid_objective(state, cand, hp.F_BB) <= f_cur:
                f_rf = cand
                break
            beta *= 0.5
            if beta < STEP_FLOOR:
                break
    return HybridPrecoder(F_RF=f_rf, F_BB=hp.F_BB, W=hp.W, architecture=hp.architecture)


def digital_step(
    state: SurrogateState,
    f_rf: np.ndarray,
    pt: float,
    tol: float = POWER_TOL,
) -> Tuple[np.ndarray, float]:
    """Exact baseband minimizer of f for a fixed analog precoder.

    F_BB(lam) = (F_RF^H L_hat F_RF + lam F_RF^H F_RF)^{-1} F_RF^H D_hat^H
    with lam = 0 when the unconstrained solution fits the power budget
    and otherwise chosen by bisection so the budget is met with equality.
    """
    a = hermitize(f_rf.conj().T @ state.L_hat @ f_rf)
    b = hermitize(f_rf.conj().T @ f_rf)
    m = f_rf.conj().T @ state.D_hat.conj().T

    def solve(lam: float) -> np.ndarray:
        return solve_psd(a + lam * b, m)

    def power(f_bb: np.ndarray) -> float:
        return float(np.sum((b @ f_bb) * f_bb.conj()).real)

    try:
        f_bb0 = solve(0.0)
        if power(f_bb0) <= pt * (1.0 + tol):
            return f_bb0, 0.0
    except NumericalError:
        pass

    lam_ub = float(np.sqrt(max(np.sum(m.conj() * solve_psd(b, m)).real, 0.0) / pt))
    lam = bisect_decreasing(
        lambda x: power(solve(x)) - pt if x > 0 else np.inf,
        lam_ub,
        tol=tol * pt,
    )
    f_bb = solve(lam)
    total = power(f_bb)
    if total > pt > 0:
        f_bb = f_bb * np.sqrt(pt / total)
    return f_bb, lam


def _init_precoder(basis_v_tilde: np.ndarray, f_wf: np.ndarray, pt: float, architecture: str) -> HybridPrecoder:
    nt, nrf = basis_v_tilde.shape
    w = block_mask(nt, nrf) if architecture == "pc" else np.ones((nt, nrf))
    f_rf = project_analog(basis_v_tilde, architecture)
    f_bb = np.linalg.pinv(f_rf) @ f_wf
    power = float(np.linalg.norm(f_rf @ f_bb) ** 2)
    if power > pt:
        f_bb = f_bb * np.sqrt(pt / power)
    return HybridPrecoder(F_RF=f_rf, F_BB=f_bb, W=w, architecture=architecture)


def mm_hybrid(
    ch: Union[ChannelRealization, np.ndarray],
    cfg: SystemConfig,
    power_tol: float = POWER_TOL,
) -> HybridResult:
    """Alternating hybrid precoder design.

    Starts from the water-filling precoder: the analog part is the
    projection of the leading right singular vectors and the baseband
    part its least squares completion, rescaled into the power budget.
    Outer iterations freeze the surrogate at the current composite
    precoder and run the inner loop; an outer step is accepted only if
    it decreased f, so the rate estimate trace is nondecreasing. The
    loop stops when the rate estimate moves less than cfg.epsilon.
    """
    if cfg.architecture not in ("fc-hybrid", "pc-hybrid"):
        raise ValueError(f"cfg.architecture must be a hybrid architecture, got {cfg.architecture!r}")
    arch = "fc" if cfg.architecture == "fc-hybrid" else "pc"
    h = ch.H if isinstance(ch, ChannelRealization) else np.asarray(ch)
    basis = svd_basis(h, cfg)
    from .digital import _waterfilling_from_basis

    f_wf = _waterfilling_from_basis(basis, cfg.Pt, cfg.sigma_n2, cfg.Ns)
    hp = _init_precoder(basis.V_tilde, f_wf, cfg.Pt, arch)
    g = bussgang_model(cfg).G

    def rate(f: np.ndarray) -> float:
        return spectral_efficiency(h, f, g, effective_noise_cov_approx(h, f, g, cfg.sigma_n2).C_e)

    f_cur = f_wf
    r_prev = rate(f_cur)
    trace = []
    lam = 0.0
    inner_total = 0
    outer = 0
    for _ in range(cfg.max_outer_iters):
        state = build_state(h, f_cur, g, cfg.sigma_n2)
        f_start = hybrid_objective(state, hp.F_RF, hp.F_BB)
        cand = hp
        lam_cand = lam
        obj = f_start
        for _ in range(cfg.inner_iters):
            cand = pgd_analog_step(state, cand, n_steps=cfg.pgd_iters)
            f_bb, lam_cand = digital_step(state, cand.F_RF, cfg.Pt, tol=power_tol)
            cand = HybridPrecoder(F_RF=cand.F_RF, F_BB=f_bb, W=cand.W, architecture=cand.architecture)
            inner_total += 1
            obj_new = hybrid_objective(state, cand.F_RF, cand.F_BB)
            stalled = obj - obj_new < INNER_DECREASE_TOL * max(1.0, abs(obj))
            obj = obj_new
            if stalled:
                break
        outer += 1
        if obj > f_start:
            # The inner loop could not improve the surrogate objective, so
            # the step is rejected and the current pair is a fixed point.
            if not trace:
                trace.append(rate(hp.F))
            break
        hp = cand
        lam = lam_cand
        f_cur = hp.F
        r_new = rate(f_cur)
        trace.append(r_new)
        if abs(r_new - r_prev) <= cfg.epsilon:
            r_prev = r_new
            break
        r_prev = r_new

    return HybridResult(
        precoder=hp,
        se_trace=np.asarray(trace),
        outer_iterations=outer,
        inner_iterations_total=inner_total,
        lam=lam,
    )
