"""Sine-series analysis and synthesis on ``[0, 1]`` with Dirichlet ends."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import GridTooCoarse, InvalidParams

__all__ = [
    "SineSeries",
    "SpaceGrid",
    "simpson_weights",
    "sine_matrix",
    "analyze",
    "synthesize",
    "check_compatibility",
    "CompatibilityReport",
    "SineTransform",
]

DEFAULT_MODES = 64
DEFAULT_SPACE_INTERVALS = 1024


@dataclass(frozen=True)
class SpaceGrid:
    """Uniform grid of ``M + 1`` nodes on ``[0, 1]`` (endpoints included)."""

    M: int = DEFAULT_SPACE_INTERVALS

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 2 or self.M % 2:
            raise InvalidParams(f"M must be an even integer >= 2 (Simpson), got {self.M!r}")

    @property
    def points(self):
        return np.linspace(0.0, 1.0, self.M + 1)

    @property
    def h(self):
        return 1.0 / self.M

    def require_modes(self, K):
        if self.M < 2 * K:
            raise GridTooCoarse(f"M={self.M} cannot resolve K={K} sine modes (need M >= 2K)")


@dataclass
class SineSeries:
    """Coefficients ``c_1..c_K`` of ``sum_k c_k sin(k pi x)``."""

    coeffs: np.ndarray = field(default_factory=lambda: np.zeros(1))

    def __post_init__(self):
        self.coeffs = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if self.coeffs.ndim != 1 or self.coeffs.size < 1:
            raise InvalidParams("a sine series needs at least one coefficient")
        if not np.all(np.isfinite(self.coeffs)):
            raise InvalidParams("sine coefficients must be finite")

    @property
    def K(self):
        return self.coeffs.size

    @property
    def modes(self):
        return np.arange(1, self.K + 1)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.sin(np.pi * np.multiply.outer(x, self.modes)) @ self.coeffs

    def __mul__(self, c):
        return SineSeries(self.coeffs * c)

    __rmul__ = __mul__


def simpson_weights(M):
    """Composite Simpson weights on ``M + 1`` nodes with spacing ``1 / M``."""
    if M % 2:
        raise InvalidParams("Simpson's rule needs an even number of intervals")
    w = np.ones(M + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / (3.0 * M)


def sine_matrix(x, K):
    """``S[j, k-1] = sin(k pi x_j)`` for ``k = 1..K``."""
    return np.sin(np.pi * np.multiply.outer(np.asarray(x, dtype=float), np.arange(1, K + 1)))


def analyze(f, K=DEFAULT_MODES):
    """First ``K`` sine coefficients ``c_k = 2 int_0^1 f(x) sin(k pi x) dx``.

    Parameters
    ----------
    f : array_like, shape (M + 1,) or (..., M + 1)
        Samples on the uniform grid of ``[0, 1]``; leading axes are batched.
    K : int

    Returns
    -------
    SineSeries or ndarray
        A :class:`SineSeries` for 1-D input, else an array ``(..., K)``.
    """
    f = np.asarray(f, dtype=float)
    M = f.shape[-1] - 1
    grid = SpaceGrid(M)
    grid.require_modes(K)
    if not np.all(np.isfinite(f)):
        raise InvalidParams("samples must be finite")
    weighted = sine_matrix(grid.points, K) * simpson_weights(M)[:, None]
    coeffs = 2.0 * f @ weighted
    return SineSeries(coeffs) if f.ndim == 1 else coeffs


def synthesize(s, grid):
    """Evaluate ``sum_k c_k sin(k pi x)`` on ``grid``; endpoints are exactly 0."""
    coeffs = s.coeffs if isinstance(s, SineSeries) else np.asarray(s, dtype=float)
    x = grid.points if isinstance(grid, SpaceGrid) else np.asarray(grid, dtype=float)
    out = sine_matrix(x, coeffs.shape[-1]) @ coeffs if coeffs.ndim == 1 else coeffs @ sine_matrix(x, coeffs.shape[-1]).T
    # sin(k pi) is ~1e-16, not 0, in floating point
    out[..., x == 0.0] = 0.0
    out[..., x == 1.0] = 0.0
    return out


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    tol: float

    def __str__(self):
        flag = "pass" if self.passed else "FAIL"
        return f"{flag}  {self.name}: {self.value:.3e} (tol {self.tol:.1e})"


@dataclass
class CompatibilityReport:
    profile: str
    checks: list

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def __str__(self):
        head = f"profile {self.profile}: {'pass' if self.passed else 'FAIL'}"
        return "\n".join([head] + ["  " + str(c) for c in self.checks])


_PROFILES = {
    # continuity orders checked for finiteness, L2 order, boundary-vanishing orders
    "inverse": ((0, 1, 2), 3, (0, 2)),
    "direct_strong": ((0, 2), 3, (0, 2)),
    "direct_weak": ((0, 1), 2, (0,)),
}


def check_compatibility(f, derivs, profile):
    """Check the smoothness and boundary conditions a data function must meet.

    Parameters
    ----------
    f : array_like, shape (M + 1,) or (N, M + 1)
        Samples on the space grid, optionally stacked over time.
    derivs : sequence
        ``derivs[m - 1]`` holds samples of the m-th x-derivative (``m = 1..3``);
        entries may be ``None`` where the profile does not need them.
    profile : {"inverse", "direct_strong", "direct_weak"}
        ``inverse``: f in C^2, f''' in L2, f and f'' vanish at both ends.
        ``direct_strong``: f_xx continuous, f_xxx in L2, f and f_xx vanish at
        the ends. ``direct_weak``: f_x continuous, f_xx in L2, f vanishes at
        the ends.

    Notes
    -----
    Continuity and L2 membership cannot be decided from samples; they are
    reported as finiteness of the samples and of their discrete L2 norm.
    Boundary values pass when ``|value| <= 1e-8 (1 + max|f|)``.
    """
    if profile not in _PROFILES:
        raise InvalidParams(f"unknown profile {profile!r}")
    f = np.asarray(f, dtype=float)
    samples = [f] + [None if d is None else np.asarray(d, dtype=float) for d in list(derivs)[:3]]
    samples += [None] * (4 - len(samples))
    cont, l2_order, boundary = _PROFILES[profile]
    scale = float(np.max(np.abs(f))) if f.size and np.all(np.isfinite(f)) else 0.0
    tol = 1e-8 * (1.0 + scale)
    checks = []
    for m in cont:
        arr = samples[m]
        ok = arr is not None and bool(np.all(np.isfinite(arr)))
        val = float(np.max(np.abs(arr))) if ok else float("nan")
        checks.append(Check(f"d{m}f finite (continuity)", ok, val, float("inf")))
    arr = samples[l2_order]
    if arr is None:
        checks.append(Check(f"d{l2_order}f in L2", False, float("nan"), float("inf")))
    else:
        M = arr.shape[-1] - 1
        norm = float(np.sqrt(np.max(np.sum(arr**2, axis=-1) / M)))
        checks.append(Check(f"d{l2_order}f in L2", bool(np.isfinite(norm)), norm, float("inf")))
    for m in boundary:
        arr = samples[m]
        for end, idx in (("0", 0), ("1", -1)):
            if arr is None:
                checks.append(Check(f"d{m}f(x={end}) = 0", False, float("nan"), tol))
                continue
            val = float(np.max(np.abs(arr[..., idx])))
            checks.append(Check(f"d{m}f(x={end}) = 0", bool(val <= tol), val, tol))
    return CompatibilityReport(profile, checks)


class SineTransform(TransformerMixin, BaseEstimator):
    """Estimator-style wrapper around :func:`analyze` / :func:`synthesize`.

    Rows of ``X`` are functions sampled on a uniform grid of ``[0, 1]``;
    :meth:`transform` maps them to their first ``n_modes`` sine coefficients.

    Parameters
    ----------
    n_modes : int, default=64
    """

    def __init__(self, n_modes=DEFAULT_MODES):
        self.n_modes = n_modes

    def fit(self, X, y=None):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        grid = SpaceGrid(X.shape[1] - 1)
        grid.require_modes(self.n_modes)
        self.grid_ = grid
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        if not hasattr(self, "grid_"):
            from sklearn.exceptions import NotFittedError

            raise NotFittedError("SineTransform is not fitted yet")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features_in_:
            raise InvalidParams(f"expected {self.n_features_in_} samples per row, got {X.shape[1]}")
        return analyze(X, self.n_modes)

    def inverse_transform(self, C):
        C = np.atleast_2d(np.asarray(C, dtype=float))
        return synthesize(C, self.grid_)
