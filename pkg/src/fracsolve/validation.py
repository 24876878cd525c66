"""Input validation helpers shared by the estimator front ends."""

from __future__ import annotations

import numpy as np

from .exceptions import InvalidParams

__all__ = ["check_positive_int", "check_samples", "check_points", "check_unit_points"]


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or int(value) != value or value < minimum:
        raise InvalidParams(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_samples(values, name, size=None):
    """Finite 1-D float array, optionally of a given length."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise InvalidParams(f"{name} must be one-dimensional, got shape {arr.shape}")
    if size is not None and arr.size != size:
        raise InvalidParams(f"{name} must have {size} samples, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParams(f"{name} must be finite")
    return arr


def check_points(X, T):
    """Rows ``(t, x)`` inside ``[0, T] x [0, 1]`` as an ``(n, 2)`` float array."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.ndim != 2 or X.shape[1] != 2:
        raise InvalidParams(f"X must have two columns (t, x), got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InvalidParams("X must be finite")
    if np.any((X[:, 0] < 0) | (X[:, 0] > T)) or np.any((X[:, 1] < 0) | (X[:, 1] > 1)):
        raise InvalidParams(f"points must lie in [0, {T}] x [0, 1]")
    return X


def check_unit_points(x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any((x < 0) | (x > 1)):
        raise InvalidParams("x must lie in [0, 1]")
    return x
