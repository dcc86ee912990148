"""Input validation helpers for the estimator layer."""
from __future__ import annotations

import numbers

import numpy as np


def check_channel_matrix(h) -> np.ndarray:
    """Validate and convert a channel matrix to a complex 2-D array."""
    from .channel import ChannelRealization

    if isinstance(h, ChannelRealization):
        h = h.H
    h = np.asarray(h)
    if h.ndim != 2 or h.size == 0:
        raise ValueError(f"channel matrix must be a nonempty 2-D array, got shape {h.shape}")
    if not np.all(np.isfinite(h.real)) or not np.all(np.isfinite(h.imag)):
        raise ValueError("channel matrix contains non-finite entries")
    return h.astype(complex, copy=False)


def check_positive_scalar(value, name: str, *, integer: bool = False) -> None:
    """Raise ValueError unless value is a positive (integer) scalar."""
    if integer:
        if not isinstance(value, numbers.Integral):
            raise ValueError(f"{name} must be an integer, got {value!r}")
    elif not isinstance(value, numbers.Real):
        raise ValueError(f"{name} must be a real number, got {value!r}")
    if value <= 0:
        raise ValueError(f"{name} must be positive, got {value!r}")
