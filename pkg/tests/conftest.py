"""Shared fixtures and helpers for the test suite."""
import numpy as np
import pytest

from qmimo import SystemConfig, generate_sv_channel


def draw_channel(cfg: SystemConfig, seed) -> np.ndarray:
    """One channel matrix for the given configuration and seed."""
    return generate_sv_channel(cfg, rng_seed=seed).H


def sphere_precoder(rng: np.random.Generator, nt: int, ns: int, pt: float) -> np.ndarray:
    """Random complex precoder scaled onto the power sphere ||F||_F^2 = pt."""
    f = rng.standard_normal((nt, ns)) + 1j * rng.standard_normal((nt, ns))
    return f * (np.sqrt(pt) / np.linalg.norm(f))


@pytest.fixture(scope="session")
def small_cfg() -> SystemConfig:
    """8x8 link with 2 streams: big enough to be generic, cheap to solve."""
    return SystemConfig(Nt=8, Nr=8, Ns=2, Nrf=2, Pt=10.0, bits=2)


@pytest.fixture(scope="session")
def desk_cfg() -> SystemConfig:
    """The default 16x16 operating point used by the sweep presets."""
    return SystemConfig()
