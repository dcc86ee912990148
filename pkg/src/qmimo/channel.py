"""Clustered multipath channel generation, CSI degradation, SVD bases.

Channels follow a narrowband clustered (Saleh-Valenzuela style) model
between two half-wavelength uniform linear arrays: a double sum over
clusters and rays of complex Gaussian path gains on outer products of
receive and transmit steering vectors. Angle conventions and the array
normalization keep E[||H||_F^2] = Nt * Nr regardless of geometry.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .config import SystemConfig
from .errors import ConfigurationError

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator, None]


@dataclass(frozen=True)
class ChannelParams:
    """Geometry of the clustered multipath model.

    clusters            number of scattering clusters
    rays_per_cluster    rays per cluster
    angle_spread_deg    angular standard deviation of the Laplacian ray
                        offsets around each cluster center, in degrees
    """

    clusters: int = 5
    rays_per_cluster: int = 10
    angle_spread_deg: float = 10.0

    def __post_init__(self) -> None:
        if self.clusters < 1 or self.rays_per_cluster < 1:
            raise ConfigurationError(
                f"need at least one cluster and one ray, got clusters = {self.clusters}, "
                f"rays_per_cluster = {self.rays_per_cluster}"
            )
        if self.angle_spread_deg < 0:
            raise ConfigurationError(f"angle_spread_deg must be >= 0, got {self.angle_spread_deg!r}")


@dataclass(frozen=True)
class ChannelRealization:
    """One drawn channel, possibly a degraded estimate of another.

    H       channel matrix [Nr x Nt]
    xi      CSI accuracy in [0, 1]; 1 means H is the true channel
    E       the estimation error draw behind a degraded H, None when xi = 1
    """

    H: np.ndarray
    xi: float = 1.0
    E: Optional[np.ndarray] = None


@dataclass(frozen=True)
class SvdBasis:
    """Right singular vectors and singular values used by the designs.

    V        first Ns right singular vectors [Nt x Ns]
    V_tilde  first Nrf right singular vectors [Nt x Nrf]
    s        singular values, descending [min(Nt, Nr)]
    """

    V: np.ndarray
    V_tilde: np.ndarray
    s: np.ndarray


def _as_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def steering_vector(angles: np.ndarray, n_antennas: int) -> np.ndarray:
    """Unit-norm ULA steering vectors, one column per angle.

    Half-wavelength spacing gives the phase profile exp(j*pi*k*sin(angle))
    for element index k; columns are scaled by 1/sqrt(n_antennas).
    """
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    k = np.arange(n_antennas)
    return np.exp(1j * np.pi * np.outer(k, np.sin(angles))) / np.sqrt(n_antennas)


def generate_sv_channel(
    cfg: SystemConfig,
    params: ChannelParams = ChannelParams(),
    rng_seed: SeedLike = None,
) -> ChannelRealization:
    """Draw one clustered multipath channel realization.

    Cluster centers are uniform on [0, 2*pi) independently at both ends;
    ray angles add Laplacian offsets with the configured angular spread.
    Path gains are i.i.d. CN(0, 1) and the global scale
    sqrt(Nt * Nr / (clusters * rays)) normalizes the average energy.
    """
    rng = _as_rng(rng_seed)
    n_paths = params.clusters * params.rays_per_cluster
    # Laplacian with standard deviation s has scale s / sqrt(2).
    lap_scale = np.deg2rad(params.angle_spread_deg) / np.sqrt(2.0)

    aod_centers = rng.uniform(0.0, 2.0 * np.pi, size=params.clusters)
    aoa_centers = rng.uniform(0.0, 2.0 * np.pi, size=params.clusters)
    aod = np.repeat(aod_centers, params.rays_per_cluster)
    aoa = np.repeat(aoa_centers, params.rays_per_cluster)
    if lap_scale > 0:
        aod = aod + rng.laplace(0.0, lap_scale, size=n_paths)
        aoa = aoa + rng.laplace(0.0, lap_scale, size=n_paths)
    alpha = (rng.standard_normal(n_paths) + 1j * rng.standard_normal(n_paths)) / np.sqrt(2.0)

    a_t = steering_vector(aod, cfg.Nt)
    a_r = steering_vector(aoa, cfg.Nr)
    scale = np.sqrt(cfg.Nt * cfg.Nr / n_paths)
    h = scale * (a_r * alpha) @ a_t.conj().T
    return ChannelRealization(H=h)


def degrade_csi(ch: ChannelRealization, xi: float, rng_seed: SeedLike = None) -> ChannelRealization:
    """Gauss-Markov CSI degradation: H_hat = xi*H + sqrt(1 - xi^2)*E.

    E has i.i.d. CN(0, 1) entries. xi = 1 returns the input realization
    unchanged; xi outside [0, 1] raises ValueError.
    """
    if not 0.0 <= xi <= 1.0:
        raise ValueError(f"xi must lie in [0, 1], got {xi!r}")
    if xi == 1.0:
        return ch
    rng = _as_rng(rng_seed)
    nr, nt = ch.H.shape
    e = (rng.standard_normal((nr, nt)) + 1j * rng.standard_normal((nr, nt))) / np.sqrt(2.0)
    h_hat = xi * ch.H + np.sqrt(1.0 - xi * xi) * e
    return ChannelRealization(H=h_hat, xi=xi, E=e)


def svd_basis(ch: Union[ChannelRealization, np.ndarray], cfg: SystemConfig) -> SvdBasis:
    """Leading right singular vectors of the channel, with a fixed phase.

    Each right singular vector is rotated so its largest-magnitude entry
    (first such entry on ties) is real and positive, which makes the
    basis deterministic across LAPACK builds.
    """
    h = ch.H if isinstance(ch, ChannelRealization) else np.asarray(ch)
    if h.ndim != 2:
        raise ValueError(f"channel matrix must be 2-D, got shape {h.shape}")
    _, s, vh = np.linalg.svd(h, full_matrices=False)
    v = vh.conj().T
    for j in range(v.shape[1]):
        pivot = np.argmax(np.abs(v[:, j]))
        entry = v[pivot, j]
        if np.abs(entry) > 0:
            v[:, j] *= np.conj(entry) / np.abs(entry)
    return SvdBasis(V=v[:, : cfg.Ns].copy(), V_tilde=v[:, : cfg.Nrf].copy(), s=s)
