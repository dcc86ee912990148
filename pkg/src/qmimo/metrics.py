"""Spectral and energy efficiency of the linearized quantized link."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .errors import ConfigurationError
from .numerics import hermitize, logdet_capacity_nats
from .quantizer import QdCovariance

LN2 = float(np.log(2.0))


@dataclass(frozen=True)
class EffectiveNoise:
    """Covariance of the non-signal term seen by the receiver.

    variant is "approximate" when the distortion covariance came from
    the diagonal closed form and "empirical" when it was sampled.
    """

    C_e: np.ndarray
    variant: str


@dataclass(frozen=True)
class PowerModel:
    """Component power draws for the energy efficiency model (watts).

    p_rf    one RF chain
    p_lna   one low noise amplifier
    kappa   ADC energy per conversion step, J/step/Hz
    f_s     sampling rate, Hz
    p_ps    one phase shifter
    """

    p_rf: float = 43e-3
    p_lna: float = 25e-3
    kappa: float = 494e-15
    f_s: float = 1e9
    p_ps: float = 10e-3

    def __post_init__(self) -> None:
        for name in ("p_rf", "p_lna", "kappa", "f_s", "p_ps"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be >= 0, got {getattr(self, name)!r}")

    def adc_power(self, bits: int) -> float:
        """Power of one ADC at the given resolution."""
        return self.kappa * self.f_s * 2.0**bits

    def receive_power(self, cfg: SystemConfig) -> float:
        """Receiver front end: LNA, RF chain, two ADCs per antenna."""
        return cfg.Nr * (self.p_lna + self.p_rf + 2.0 * self.adc_power(cfg.bits))

    def transmit_power(self, cfg: SystemConfig) -> float:
        """Radiated power plus transmit hardware for the architecture."""
        if cfg.architecture == "digital":
            return cfg.Pt + cfg.Nt * self.p_rf
        if cfg.architecture == "fc-hybrid":
            return cfg.Pt + cfg.Nrf * self.p_rf + cfg.Nt * cfg.Nrf * self.p_ps
        return cfg.Pt + cfg.Nrf * self.p_rf + cfg.Nt * self.p_ps


def signal_covariance(h: np.ndarray, f: np.ndarray, sigma_n2: float) -> np.ndarray:
    """Covariance H F F^H H^H + sigma_n2 I of the unquantized receive signal."""
    hf = h @ f
    return hermitize(hf @ hf.conj().T) + sigma_n2 * np.eye(h.shape[0])


def effective_noise_cov_approx(
    h: np.ndarray, f: np.ndarray, g: np.ndarray, sigma_n2: float
) -> EffectiveNoise:
    """Diagonal-distortion model G (I - G) diag(H F F^H H^H) + sigma_n2 G."""
    hf = h @ f
    sig_diag = np.sum(np.abs(hf) ** 2, axis=1)
    gd = np.diagonal(g).real
    c_e = np.diag(gd * (1.0 - gd) * sig_diag + sigma_n2 * gd)
    return EffectiveNoise(C_e=c_e, variant="approximate")


def effective_noise_cov_empirical(qd: QdCovariance, g: np.ndarray, sigma_n2: float) -> EffectiveNoise:
    """Distortion covariance plus thermal noise through the linear gain."""
    c_e = hermitize(qd.C_eta) + sigma_n2 * (g @ g)
    return EffectiveNoise(C_e=c_e, variant=qd.source)


def spectral_efficiency(h: np.ndarray, f: np.ndarray, g: np.ndarray, c_e: np.ndarray) -> float:
    """Achievable rate log2 det(I + C_e^{-1} G H F F^H H^H G) in bits.

    Treats the distortion-plus-noise term as Gaussian with covariance
    C_e, which lower-bounds the mutual information of the quantized
    link. Computed by whitening G H F against the Cholesky factor of
    C_e, so C_e must be positive definite.
    """
    x = g @ h @ f
    return logdet_capacity_nats(c_e, x) / LN2


def unquantized_spectral_efficiency(h: np.ndarray, f: np.ndarray, sigma_n2: float) -> float:
    """Rate of the same link with ideal (infinite resolution) ADCs."""
    eye = np.eye(h.shape[0])
    return spectral_efficiency(h, f, eye, sigma_n2 * eye)


def energy_efficiency(rate_bits: float, cfg: SystemConfig, pm: PowerModel = PowerModel()) -> float:
    """Rate per unit total consumed power, bits/s/Hz per watt."""
    total = pm.transmit_power(cfg) + pm.receive_power(cfg)
    return rate_bits / total
