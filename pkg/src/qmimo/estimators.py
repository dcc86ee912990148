"""Estimator-style interface to the precoder designs.

Each precoder is an estimator whose fit takes a channel matrix and
stores the designed precoder in F_. Constructor arguments follow the
usual convention: stored verbatim, validated in fit, introspectable
through get_params, so the estimators compose with standard tooling
(cloning, grid search over design parameters, pipelines over channel
datasets).
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .config import SystemConfig
from .digital import mm_digital, waterfilling
from .hybrid import mm_hybrid
from .metrics import (
    effective_noise_cov_approx,
    spectral_efficiency,
    unquantized_spectral_efficiency,
)
from .quantizer import bussgang_model
from .validation import check_channel_matrix, check_positive_scalar


class _PrecoderMixin:
    """Shared behavior: applying the fitted precoder and scoring channels."""

    def transform(self, S: np.ndarray) -> np.ndarray:
        """Map a stream-domain block S [Ns x n] to antenna inputs F_ @ S."""
        S = np.asarray(S)
        if S.ndim != 2 or S.shape[0] != self.F_.shape[1]:
            raise ValueError(f"S must have shape ({self.F_.shape[1]}, n), got {S.shape}")
        return self.F_ @ S

    def fit_transform(self, H, S: np.ndarray) -> np.ndarray:
        return self.fit(H).transform(S)


class WaterfillingPrecoder(_PrecoderMixin, BaseEstimator):
    """SVD precoder with water-filling power loading.

    The quantization-unaware baseline: optimal for ideal ADCs, used
    as-is on quantized links for comparison.

    Parameters
    ----------
    n_streams : number of data streams.
    power : transmit power budget.
    noise_power : receiver noise power per antenna.
    """

    def __init__(self, n_streams: int = 4, power: float = 100.0, noise_power: float = 1.0):
        self.n_streams = n_streams
        self.power = power
        self.noise_power = noise_power

    def fit(self, H, y=None):
        H = check_channel_matrix(H)
        check_positive_scalar(self.n_streams, "n_streams", integer=True)
        check_positive_scalar(self.power, "power")
        check_positive_scalar(self.noise_power, "noise_power")
        self.F_ = waterfilling(H, self.power, self.noise_power, self.n_streams)
        self.n_iter_ = 0
        return self

    def score(self, H, y=None) -> float:
        """Unquantized spectral efficiency of the fitted precoder on H."""
        H = check_channel_matrix(H)
        return unquantized_spectral_efficiency(H, self.F_, self.noise_power)


class MMDigitalPrecoder(_PrecoderMixin, BaseEstimator):
    """Quantization-aware digital precoder.

    Reallocates power over the channel's right singular vectors to
    maximize the rate of a receiver with b-bit ADCs.

    Parameters
    ----------
    n_streams : number of data streams.
    power : transmit power budget.
    noise_power : receiver noise power per antenna.
    bits : ADC resolution of the target receiver.
    tol : stopping threshold on the rate change, bits.
    max_iter : outer iteration cap.
    update : "damped" or "stationary" power update form.
    """

    def __init__(
        self,
        n_streams: int = 4,
        power: float = 100.0,
        noise_power: float = 1.0,
        bits: int = 3,
        tol: float = 1e-4,
        max_iter: int = 500,
        update: str = "damped",
    ):
        self.n_streams = n_streams
        self.power = power
        self.noise_power = noise_power
        self.bits = bits
        self.tol = tol
        self.max_iter = max_iter
        self.update = update

    def _config(self, H: np.ndarray) -> SystemConfig:
        return SystemConfig(
            Nt=H.shape[1],
            Nr=H.shape[0],
            Ns=self.n_streams,
            Nrf=self.n_streams,
            Pt=self.power,
            sigma_n2=self.noise_power,
            bits=self.bits,
            architecture="digital",
            epsilon=self.tol,
            max_outer_iters=self.max_iter,
        )

    def fit(self, H, y=None):
        H = check_channel_matrix(H)
        check_positive_scalar(self.n_streams, "n_streams", integer=True)
        check_positive_scalar(self.power, "power")
        check_positive_scalar(self.noise_power, "noise_power")
        check_positive_scalar(self.bits, "bits", integer=True)
        check_positive_scalar(self.tol, "tol")
        check_positive_scalar(self.max_iter, "max_iter", integer=True)
        result = mm_digital(H, self._config(H), update=self.update)
        self.F_ = result.F
        self.p_ = result.p
        self.mu_ = result.mu
        self.se_trace_ = result.se_trace
        self.n_iter_ = result.iterations
        return self

    def score(self, H, y=None) -> float:
        """Rate estimate of the fitted precoder on H for b-bit ADCs."""
        H = check_channel_matrix(H)
        cfg = self._config(H)
        g = bussgang_model(cfg).G
        c_e = effective_noise_cov_approx(H, self.F_, g, self.noise_power).C_e
        return spectral_efficiency(H, self.F_, g, c_e)


class MMHybridPrecoder(_PrecoderMixin, BaseEstimator):
    """Quantization-aware hybrid precoder.

    Alternates projected gradient steps on the phase-only analog
    precoder with exact baseband updates, for fully connected ("fc")
    or partially connected ("pc") arrays.

    Parameters
    ----------
    architecture : "fc" or "pc".
    n_rf : number of transmit RF chains.
    n_streams : number of data streams.
    power : transmit power budget.
    noise_power : receiver noise power per antenna.
    bits : ADC resolution of the target receiver.
    tol : stopping threshold on the rate change, bits.
    max_iter : outer iteration cap.
    inner_iter : analog/baseband passes per outer iteration.
    pgd_iter : gradient steps per analog pass.
    """

    def __init__(
        self,
        architecture: str = "fc",
        n_rf: int = 4,
        n_streams: int = 4,
        power: float = 100.0,
        noise_power: float = 1.0,
        bits: int = 3,
        tol: float = 1e-4,
        max_iter: int = 500,
        inner_iter: int = 1,
        pgd_iter: int = 1,
    ):
        self.architecture = architecture
        self.n_rf = n_rf
        self.n_streams = n_streams
        self.power = power
        self.noise_power = noise_power
        self.bits = bits
        self.tol = tol
        self.max_iter = max_iter
        self.inner_iter = inner_iter
        self.pgd_iter = pgd_iter

    def _config(self, H: np.ndarray) -> SystemConfig:
        if self.architecture not in ("fc", "pc"):
            raise ValueError(f"architecture must be 'fc' or 'pc', got {self.architecture!r}")
        return SystemConfig(
            Nt=H.shape[1],
            Nr=H.shape[0],
            Ns=self.n_streams,
            Nrf=self.n_rf,
            Pt=self.power,
            sigma_n2=self.noise_power,
            bits=self.bits,
            architecture=self.architecture + "-hybrid",
            epsilon=self.tol,
            max_outer_iters=self.max_iter,
            inner_iters=self.inner_iter,
            pgd_iters=self.pgd_iter,
        )

    def fit(self, H, y=None):
        H = check_channel_matrix(H)
        check_positive_scalar(self.n_rf, "n_rf", integer=True)
        check_positive_scalar(self.n_streams, "n_streams", integer=True)
        check_positive_scalar(self.power, "power")
        check_positive_scalar(self.noise_power, "noise_power")
        check_positive_scalar(self.bits, "bits", integer=True)
        check_positive_scalar(self.tol, "tol")
        result = mm_hybrid(H, self._config(H))
        self.F_rf_ = result.precoder.F_RF
        self.F_bb_ = result.precoder.F_BB
        self.mask_ = result.precoder.W
        self.F_ = result.precoder.F
        self.lambda_ = result.lam
        self.se_trace_ = result.se_trace
        self.n_iter_ = result.outer_iterations
        self.n_inner_iter_ = result.inner_iterations_total
        return self

    def score(self, H, y=None) -> float:
        """Rate estimate of the fitted precoder on H for b-bit ADCs."""
        H = check_channel_matrix(H)
        cfg = self._config(H)
        g = bussgang_model(cfg).G
        c_e = effective_noise_cov_approx(H, self.F_, g, self.noise_power).C_e
        return spectral_efficiency(H, self.F_, g, c_e)
