"""Quantization-aware precoding for massive MIMO links with low-resolution ADCs.

Designs digital and hybrid transmit precoders that maximize a
Bussgang-based achievable-rate bound of a point-to-point link whose
receiver quantizes with few-bit ADCs, plus the simulation harness that
evaluates them.
"""

from .channel import (
    ChannelParams,
    ChannelRealization,
    SvdBasis,
    degrade_csi,
    generate_sv_channel,
    steering_vector,
    svd_basis,
)
from .config import SystemConfig, power_for_snr_db
from .digital import (
    DigitalResult,
    PowerAllocation,
    mm_digital,
    power_step,
    waterfill_powers,
    waterfilling,
)
from .errors import ConfigurationError, DegenerateChannelError, NumericalError
from .estimators import MMDigitalPrecoder, MMHybridPrecoder, WaterfillingPrecoder
from .hybrid import (
    HybridPrecoder,
    HybridResult,
    block_mask,
    digital_step,
    mm_hybrid,
    pgd_analog_step,
    project_analog,
)
from .metrics import (
    EffectiveNoise,
    PowerModel,
    effective_noise_cov_approx,
    effective_noise_cov_empirical,
    energy_efficiency,
    signal_covariance,
    spectral_efficiency,
    unquantized_spectral_efficiency,
)
from .quantizer import (
    BussgangModel,
    QdCovariance,
    Quantizer,
    approx_qd_covariance,
    bussgang_model,
    distortion_factor,
    empirical_qd_covariance,
    lloyd_max_codebook,
    quantize,
)
from .surrogate import SurrogateState, build_state, hybrid_objective, surrogate_value
from .sweep import SweepResult, SweepSpec, emit, read_results_csv, run_sweep

__version__ = "0.1.0"

__all__ = [
    "ChannelParams",
    "ChannelRealization",
    "SvdBasis",
    "degrade_csi",
    "generate_sv_channel",
    "steering_vector",
    "svd_basis",
    "SystemConfig",
    "power_for_snr_db",
    "DigitalResult",
    "PowerAllocation",
    "mm_digital",
    "power_step",
    "waterfill_powers",
    "waterfilling",
    "ConfigurationError",
    "DegenerateChannelError",
    "NumericalError",
    "MMDigitalPrecoder",
    "MMHybridPrecoder",
    "WaterfillingPrecoder",
    "HybridPrecoder",
    "HybridResult",
    "block_mask",
    "digital_step",
    "mm_hybrid",
    "pgd_analog_step",
    "project_analog",
    "EffectiveNoise",
    "PowerModel",
    "effective_noise_cov_approx",
    "effective_noise_cov_empirical",
    "energy_efficiency",
    "signal_covariance",
    "spectral_efficiency",
    "unquantized_spectral_efficiency",
    "BussgangModel",
    "QdCovariance",
    "Quantizer",
    "approx_qd_covariance",
    "bussgang_model",
    "distortion_factor",
    "empirical_qd_covariance",
    "lloyd_max_codebook",
    "quantize",
    "SurrogateState",
    "build_state",
    "hybrid_objective",
    "surrogate_value",
    "SweepResult",
    "SweepSpec",
    "emit",
    "read_results_csv",
    "run_sweep",
]
