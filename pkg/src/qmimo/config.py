"""Link-level configuration objects."""
from __future__ import annotations

import math
import numbers
from dataclasses import dataclass

from .errors import ConfigurationError

ARCHITECTURES = ("digital", "fc-hybrid", "pc-hybrid")


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigurationError(message)


@dataclass(frozen=True)
class SystemConfig:
    """Dimensions and operating point of a point-to-point MIMO link.

    Nt, Nr          transmit / receive array sizes
    Ns              number of data streams
    Nrf             transmit RF chains (hybrid architectures)
    Pt              transmit power budget, linear scale
    sigma_n2        receiver noise power per antenna
    bits            ADC resolution in bits per real dimension
    architecture    one of "digital", "fc-hybrid", "pc-hybrid"
    epsilon         outer-loop stopping threshold on the rate change
    max_outer_iters outer iteration cap
    inner_iters     analog/digital refinement passes per outer iteration
    pgd_iters       projected gradient steps per refinement pass
    """

    Nt: int = 16
    Nr: int = 16
    Ns: int = 4
    Nrf: int = 4
    Pt: float = 100.0
    sigma_n2: float = 1.0
    bits: int = 3
    architecture: str = "digital"
    epsilon: float = 1e-4
    max_outer_iters: int = 500
    inner_iters: int = 1
    pgd_iters: int = 1

    def __post_init__(self) -> None:
        for name in ("Nt", "Nr", "Ns", "Nrf", "bits", "max_outer_iters", "inner_iters", "pgd_iters"):
            value = getattr(self, name)
            _require(isinstance(value, numbers.Integral), f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        for name in ("Nt", "Nr", "Ns", "Nrf"):
            _require(getattr(self, name) >= 1, f"{name} must be a positive integer, got {getattr(self, name)}")
        _require(self.Ns <= min(self.Nt, self.Nr), f"Ns = {self.Ns} exceeds min(Nt, Nr) = {min(self.Nt, self.Nr)}")
        _require(self.Ns <= self.Nrf <= self.Nt, f"need Ns <= Nrf <= Nt, got Ns = {self.Ns}, Nrf = {self.Nrf}, Nt = {self.Nt}")
        _require(self.Pt > 0, f"Pt must be positive, got {self.Pt!r}")
        _require(self.sigma_n2 > 0, f"sigma_n2 must be positive, got {self.sigma_n2!r}")
        _require(1 <= self.bits <= 12, f"bits must be an integer in [1, 12], got {self.bits!r}")
        _require(self.architecture in ARCHITECTURES, f"architecture must be one of {ARCHITECTURES}, got {self.architecture!r}")
        _require(self.epsilon > 0, f"epsilon must be positive, got {self.epsilon!r}")
        _require(self.max_outer_iters >= 1, f"max_outer_iters must be >= 1, got {self.max_outer_iters!r}")
        _require(self.inner_iters >= 1, f"inner_iters must be >= 1, got {self.inner_iters!r}")
        _require(self.pgd_iters >= 1, f"pgd_iters must be >= 1, got {self.pgd_iters!r}")
        if self.architecture == "pc-hybrid":
            _require(
                self.Nt % self.Nrf == 0,
                f"partially connected arrays need Nt divisible by Nrf, got Nt = {self.Nt}, Nrf = {self.Nrf}",
            )

    @property
    def snr_db(self) -> float:
        """Transmit SNR Pt / sigma_n2 in dB."""
        return 10.0 * math.log10(self.Pt / self.sigma_n2)

    @property
    def antennas_per_subarray(self) -> int:
        """Subarray size Nt / Nrf of the partially connected layout."""
        return self.Nt // self.Nrf


def power_for_snr_db(snr_db: float, sigma_n2: float = 1.0) -> float:
    """Transmit power that realizes a given transmit SNR in dB."""
    if sigma_n2 <= 0:
        raise ConfigurationError(f"sigma_n2 must be positive, got {sigma_n2!r}")
    return sigma_n2 * 10.0 ** (snr_db / 10.0)
