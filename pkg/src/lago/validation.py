"""Input checking shared by the estimator and the command line."""

from __future__ import annotations

import numbers
import secrets

import numpy as np
from sklearn.utils import check_random_state

from .linkstream import LinkStream, stream_from_records
from .optimizer import normalize_variant

__all__ = [
    "check_expectation",
    "check_link_stream",
    "check_omega",
    "check_seed",
    "check_variant",
]


def check_link_stream(X, *, tick_duration="auto", origin=None, horizon=None) -> LinkStream:
    """Coerce ``X`` to a :class:`LinkStream`.

    Accepts a ready stream (returned unchanged) or any 2-d array-like of rows
    ``(t, u, v[, ...])`` in original time units.
    """
    if isinstance(X, LinkStream):
        return X
    if isinstance(X, (str, bytes)):
        raise TypeError("expected a LinkStream or rows of (t, u, v); got a string")
    if isinstance(X, np.ndarray):
        if X.ndim != 2 or X.shape[1] < 3:
            raise ValueError(f"expected rows of (t, u, v), got array of shape {X.shape}")
        rows = X.tolist()
    else:
        rows = [tuple(r) for r in X]
    return stream_from_records(rows, tick_duration=tick_duration, origin=origin,
                               horizon=horizon)


def check_expectation(expectation) -> str:
    value = str(expectation).upper()
    if value not in ("JM", "MM"):
        raise ValueError(f"expectation must be 'JM' or 'MM', got {expectation!r}")
    return value


def check_omega(omega) -> float:
    if isinstance(omega, bool) or not isinstance(omega, numbers.Real):
        raise TypeError(f"omega must be a real number, got {type(omega).__name__}")
    omega = float(omega)
    if not np.isfinite(omega) or omega < 0:
        raise ValueError(f"omega must be a finite number >= 0, got {omega}")
    return omega


def check_variant(variant) -> str:
    return normalize_variant(variant)


def check_seed(random_state) -> int:
    """Turn ``random_state`` into the 63-bit integer seed echoed in reports.

    ``None`` draws from OS entropy; integers pass through; a NumPy
    ``RandomState`` or ``Generator`` supplies one draw.
    """
    if random_state is None:
        return secrets.randbits(63)
    if isinstance(random_state, numbers.Integral) and not isinstance(random_state, bool):
        if random_state < 0:
            raise ValueError(f"seed must be non-negative, got {random_state}")
        return int(random_state)
    if isinstance(random_state, np.random.Generator):
        return int(random_state.integers(0, 2**63 - 1))
    rs = check_random_state(random_state)
    return int(rs.randint(0, 2**62, dtype=np.int64))
