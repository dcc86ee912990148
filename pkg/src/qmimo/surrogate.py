"""Concave minorizer of the quantized-link rate around a fixed precoder.

Freezing the current precoder F_hat yields a surrogate g(F) that equals
the rate at F_hat and never exceeds it elsewhere, so any update that
increases the surrogate cannot decrease the rate. The surrogate is
quadratic in F, which reduces the digital design to a power allocation
and the hybrid design to a regularized least squares problem; the
coefficient matrices below are everything those steps need.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .metrics import LN2, effective_noise_cov_approx
from .numerics import hermitize, inv_psd, logdet_capacity_nats


@dataclass(frozen=True)
class SurrogateState:
    """Frozen quantities of the minorizer built at F_hat.

    X_hat       linearized signal matrix G H F_hat [Nr x Ns]
    C_e_hat     effective noise covariance at F_hat [Nr x Nr]
    C_e_hat_inv its inverse [Nr x Nr]
    S_hat       inverse gap C_e_hat^{-1} - (C_e_hat + X_hat X_hat^H)^{-1},
                positive semidefinite [Nr x Nr]
    r_hat_nats  rate at F_hat in nats
    L_hat       quadratic kernel of the precoder in the surrogate [Nt x Nt]
    D_hat       linear coefficient of the precoder [Ns x Nt]
    J_hat       quadratic kernel restricted to the singular basis V,
                None unless V was supplied [Ns x Ns]
    K_hat       linear-term kernel of the power allocation, None unless
                V and p_hat were supplied [Ns x Ns]
    """

    H: np.ndarray
    G: np.ndarray
    sigma_n2: float
    F_hat: np.ndarray
    X_hat: np.ndarray
    C_e_hat: np.ndarray
    C_e_hat_inv: np.ndarray
    S_hat: np.ndarray
    r_hat_nats: float
    L_hat: np.ndarray
    D_hat: np.ndarray
    J_hat: Optional[np.ndarray] = None
    K_hat: Optional[np.ndarray] = None

    @property
    def r_hat_bits(self) -> float:
        return self.r_hat_nats / LN2


def build_state(
    h: np.ndarray,
    f_hat: np.ndarray,
    g: np.ndarray,
    sigma_n2: float,
    v: Optional[np.ndarray] = None,
    p_hat: Optional[np.ndarray] = None,
) -> SurrogateState:
    """Assemble the surrogate coefficients at the expansion point F_hat."""
    gh = g @ h
    x_hat = gh @ f_hat
    c_e_hat = effective_noise_cov_approx(h, f_hat, g, sigma_n2).C_e
    c_inv = inv_psd(c_e_hat)
    s_hat = hermitize(c_inv - inv_psd(c_e_hat + x_hat @ x_hat.conj().T))
    r_hat = logdet_capacity_nats(c_e_hat, x_hat)

    gd = np.diagonal(g).real
    # Shared kernel of the quadratic term: G S G + diag(S) G (I - G).
    t_mat = hermitize(g @ s_hat @ g) + np.diag(np.diagonal(s_hat).real * gd * (1.0 - gd))
    l_hat = hermitize(h.conj().T @ t_mat @ h)
    d_hat = x_hat.conj().T @ c_inv @ gh

    j_hat = None
    k_hat = None
    if v is not None:
        hv = h @ v
        j_hat = hermitize(hv.conj().T @ t_mat @ hv)
        if p_hat is not None:
            ghv = gh @ v
            a_mat = hermitize(ghv.conj().T @ c_inv @ ghv)
            dp = np.asarray(p_hat, dtype=float)
            k_hat = dp[:, None] * a_mat * dp[None, :]

    return SurrogateState(
        H=h,
        G=g,
        sigma_n2=sigma_n2,
        F_hat=f_hat,
        X_hat=x_hat,
        C_e_hat=c_e_hat,
        C_e_hat_inv=c_inv,
        S_hat=s_hat,
        r_hat_nats=r_hat,
        L_hat=l_hat,
        D_hat=d_hat,
        J_hat=j_hat,
        K_hat=k_hat,
    )


def surrogate_value(state: SurrogateState, f: np.ndarray) -> float:
    """Evaluate the minorizer at a candidate precoder, in bits.

    Equals the rate at f = F_hat and lower-bounds it elsewhere.
    """
    x = state.G @ state.H @ f
    c_e = effective_noise_cov_approx(state.H, f, state.G, state.sigma_n2).C_e
    ci = state.C_e_hat_inv
    x_hat = state.X_hat
    quad_hat = np.sum((ci @ x_hat) * x_hat.conj()).real
    cross = 2.0 * np.sum((ci @ x) * x_hat.conj()).real
    trace_s = np.sum(state.S_hat.T * (c_e + x @ x.conj().T)).real
    return (state.r_hat_nats - quad_hat + cross - trace_s) / LN2


def hybrid_objective(state: SurrogateState, f_rf: np.ndarray, f_bb: np.ndarray) -> float:
    """Quadratic objective minimized by the hybrid inner loop.

    f(F_rf, F_bb) = tr(F^H L_hat F) - 2 Re tr(D_hat F) with F = F_rf F_bb.
    Up to a constant independent of F, the surrogate equals -f, so
    decreasing f increases the surrogate.
    """
    f = f_rf @ f_bb
    quad = np.sum((state.L_hat @ f) * f.conj()).real
    lin = np.trace(state.D_hat @ f).real
    return quad - 2.0 * lin


def surrogate_offset(state: SurrogateState) -> float:
    """Constant c in nats such that g(F) = (c - f(F_rf, F_bb)) / ln 2."""
    ci = state.C_e_hat_inv
    x_hat = state.X_hat
    quad_hat = np.sum((ci @ x_hat) * x_hat.conj()).real
    noise_term = state.sigma_n2 * np.trace(state.S_hat @ state.G).real
    return state.r_hat_nats - quad_hat - noise_term


def analog_gradient(state: SurrogateState, f_rf: np.ndarray, f_bb: np.ndarray) -> np.ndarray:
    """Wirtinger gradient of the hybrid objective in the analog precoder."""
    return 2.0 * (state.L_hat @ f_rf @ f_bb - state.D_hat.conj().T) @ f_bb.conj().T
