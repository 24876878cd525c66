r"""Sampled fractional integrals and Hilfer derivatives on uniform time grids.

Everything here treats the data as a black box: a uniform grid ``t`` and
samples ``values`` (1-D, or 2-D with time along axis 0). These routines are
used to check solutions produced elsewhere, so they never use any knowledge
of how the samples were generated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.signal import fftconvolve

from .exceptions import InvalidOrder, InvalidParams

__all__ = [
    "SampledFunction",
    "LimitEstimate",
    "rl_integral",
    "hilfer_derivative",
    "rl_derivative_gl",
    "caputo_l1",
    "initial_limit",
]


@dataclass
class SampledFunction:
    """Samples of a function (or a stack of functions) on a uniform time grid.

    Attributes
    ----------
    t : ndarray, shape (N,)
        Strictly increasing uniform grid, ``N >= 3``.
    values : ndarray, shape (N,) or (N, M)
        Samples; axis 0 runs along ``t``.
    unreliable : ndarray of bool, shape (N,)
        Grid points whose values should not enter residual norms.
    """

    t: np.ndarray
    values: np.ndarray
    unreliable: np.ndarray = field(default=None)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.t.ndim != 1 or self.t.size < 3:
            raise InvalidParams("time grid must be 1-D with at least 3 points")
        if self.values.shape[0] != self.t.size:
            raise InvalidParams(
                f"values have {self.values.shape[0]} rows but the grid has {self.t.size} points"
            )
        steps = np.diff(self.t)
        if np.any(steps <= 0):
            raise InvalidParams("time grid must be strictly increasing")
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise InvalidParams("time grid must be uniform")
        if self.unreliable is None:
            self.unreliable = np.zeros(self.t.size, dtype=bool)
        else:
            self.unreliable = np.asarray(self.unreliable, dtype=bool)

    @property
    def h(self):
        return (self.t[-1] - self.t[0]) / (self.t.size - 1)

    @classmethod
    def from_callable(cls, func, T, n_steps, t0=0.0):
        """Sample ``func`` on ``n_steps + 1`` uniform points of ``[t0, T]``."""
        t = np.linspace(t0, T, n_steps + 1)
        return cls(t, func(t))

    def with_values(self, values, unreliable=None):
        flags = self.unreliable.copy() if unreliable is None else unreliable
        return SampledFunction(self.t, values, flags)


class LimitEstimate(NamedTuple):
    """Extrapolated value of a limit together with a crude error estimate."""

    value: float
    error: float


def _check_order(alpha, name="alpha"):
    if not (np.isfinite(alpha) and alpha > 0):
        raise InvalidOrder(f"{name} must be a positive real, got {alpha!r}")


def _conv_time(kernel, values):
    """Causal discrete convolution along axis 0, truncated to the input length."""
    n = values.shape[0]
    if values.ndim == 1:
        return np.convolve(kernel, values)[:n]
    return fftconvolve(kernel[:, None], values, axes=0)[:n]


def _rl_weights(alpha, n):
    """Product-trapezoid weights for I^alpha on a unit-step grid of n+1 points.

    Returns ``(c, start)`` with ``c[m]`` the interior weight at lag ``m`` and
    ``start[j]`` the weight of the left endpoint sample for target index ``j``.
    """
    m = np.arange(n + 1, dtype=float)
    p = alpha + 1.0
    c = np.empty(n + 1)
    c[0] = 1.0
    mm = m[1:]
    c[1:] = (mm + 1.0) ** p - 2.0 * mm**p + (mm - 1.0) ** p
    start = np.zeros(n + 1)
    start[1:] = (mm - 1.0) ** p - (mm - 1.0 - alpha) * mm**alpha
    return c, start


def rl_integral(f, alpha):
    r"""Riemann-Liouville integral :math:`I^\alpha_{0t} f` by product trapezoid.

    On each cell ``f`` is replaced by its linear interpolant and the kernel
    :math:`(t - z)^{\alpha - 1} / \Gamma(\alpha)` is integrated exactly
    against it, which gives second-order accuracy for smooth ``f`` despite
    the endpoint singularity. ``alpha = 1`` reproduces the trapezoid rule.

    Parameters
    ----------
    f : SampledFunction
        The grid is assumed to start at the lower limit of integration.
    alpha : float
        Positive order.

    Returns
    -------
    SampledFunction
    """
    _check_order(alpha)
    n = f.t.size - 1
    c, start = _rl_weights(alpha, n)
    vals = f.values
    out = _conv_time(c, vals)
    # swap the interior weight of the j = 0 sample for the endpoint weight
    corr = (start - c)
    if vals.ndim == 1:
        out = out + corr * vals[0]
    else:
        out = out + corr[:, None] * vals[0][None, :]
    out[0] = 0.0
    out *= f.h**alpha / math.gamma(alpha + 2.0)
    return f.with_values(out)


def _ddt(values, h):
    """Fourth-order central differences, third-order one-sided near the ends."""
    v = values
    out = np.empty_like(v)
    out[2:-2] = (v[:-4] - 8.0 * v[1:-3] + 8.0 * v[3:-1] - v[4:]) / (12.0 * h)
    out[0] = (-11.0 * v[0] + 18.0 * v[1] - 9.0 * v[2] + 2.0 * v[3]) / (6.0 * h)
    out[1] = (-2.0 * v[0] - 3.0 * v[1] + 6.0 * v[2] - v[3]) / (6.0 * h)
    out[-2] = (v[-4] - 6.0 * v[-3] + 3.0 * v[-2] + 2.0 * v[-1]) / (6.0 * h)
    out[-1] = (-2.0 * v[-4] + 9.0 * v[-3] - 18.0 * v[-2] + 11.0 * v[-1]) / (6.0 * h)
    return out


def hilfer_derivative(f, alpha, beta, scheme="commuted"):
    r"""Hilfer derivative :math:`D^{\alpha,\beta}_{0t} f` for ``0 < alpha < 1``.

    The definition is
    :math:`I^{\beta(1-\alpha)} \frac{d}{dt} I^{(1-\beta)(1-\alpha)} f`;
    ``beta = 0`` gives the Riemann-Liouville derivative and ``beta = 1`` the
    Caputo derivative.

    Parameters
    ----------
    f : SampledFunction
    alpha, beta : float
    scheme : {"commuted", "literal"}
        ``"literal"`` differentiates the inner integral numerically and then
        applies the outer integral. ``"commuted"`` (default) uses
        :math:`I^\mu g' = (I^\mu g)' - g(0^+) t^{\mu-1}/\Gamma(\mu)`, i.e.
        differentiates :math:`I^{1-\alpha} f` once and subtracts the
        initial-value term, so the finite-difference error near ``t = 0``
        stays local instead of being smeared by the outer integral.
        ``g(0^+)`` is ``f(0)`` when the inner order vanishes and zero
        otherwise (samples are finite).

    Returns
    -------
    SampledFunction
        The value at ``t = 0`` is flagged unreliable.
    """
    if not 0 < alpha < 1:
        raise InvalidOrder(f"Hilfer derivative needs 0 < alpha < 1, got {alpha!r}")
    if not 0 <= beta <= 1:
        raise InvalidOrder(f"Hilfer type needs 0 <= beta <= 1, got {beta!r}")
    if f.t.size < 5:
        raise InvalidParams("Hilfer derivative needs at least 5 grid points")
    inner = (1.0 - beta) * (1.0 - alpha)
    outer = beta * (1.0 - alpha)
    if scheme == "literal":
        g = rl_integral(f, inner) if inner > 0 else f
        dg = f.with_values(_ddt(g.values, f.h))
        out = rl_integral(dg, outer).values if outer > 0 else dg.values
    elif scheme == "commuted":
        full = rl_integral(f, 1.0 - alpha)
        out = _ddt(full.values, f.h)
        if inner == 0.0:
            tau = f.t - f.t[0]
            with np.errstate(divide="ignore"):
                shape = np.where(tau > 0, tau ** (outer - 1.0), 0.0) / math.gamma(outer)
            if f.values.ndim == 1:
                out = out - f.values[0] * shape
            else:
                out = out - shape[:, None] * f.values[0][None, :]
    else:
        raise InvalidParams(f"unknown scheme {scheme!r}")
    flags = f.unreliable.copy()
    flags[0] = True
    return f.with_values(out, flags)


def rl_derivative_gl(f, alpha):
    """Riemann-Liouville derivative of order ``0 < alpha < 1`` by Grunwald-Letnikov.

    First-order accurate; kept deliberately separate from
    :func:`hilfer_derivative` so it can serve as an independent check.
    """
    if not 0 < alpha < 1:
        raise InvalidOrder(f"need 0 < alpha < 1, got {alpha!r}")
    n = f.t.size
    w = np.empty(n)
    w[0] = 1.0
    for j in range(1, n):
        w[j] = w[j - 1] * (1.0 - (alpha + 1.0) / j)
    out = _conv_time(w, f.values) / f.h**alpha
    flags = f.unreliable.copy()
    flags[0] = True
    return f.with_values(out, flags)


def caputo_l1(f, alpha):
    """Caputo derivative of order ``0 < alpha < 1`` by the L1 scheme.

    Accuracy is ``O(h^(2 - alpha))`` for smooth ``f``. Independent of
    :func:`hilfer_derivative`.
    """
    if not 0 < alpha < 1:
        raise InvalidOrder(f"need 0 < alpha < 1, got {alpha!r}")
    n = f.t.size
    j = np.arange(n - 1, dtype=float)
    b = (j + 1.0) ** (1.0 - alpha) - j ** (1.0 - alpha)
    diffs = np.diff(f.values, axis=0)
    out = np.zeros_like(f.values)
    out[1:] = _conv_time(b, diffs)
    out *= f.h ** (-alpha) / math.gamma(2.0 - alpha)
    flags = f.unreliable.copy()
    flags[0] = True
    return f.with_values(out, flags)


def _wynn_epsilon(seq):
    """Wynn epsilon table; returns the even-column diagonal estimates."""
    seq = [float(v) for v in seq]
    prev = [0.0] * (len(seq) + 1)
    cur = seq[:]
    estimates = [seq[-1]]
    col = 0
    while len(cur) > 1:
        nxt = []
        for i in range(len(cur) - 1):
            d = cur[i + 1] - cur[i]
            if d == 0.0:
                return estimates
            nxt.append(prev[i + 1] + 1.0 / d)
        prev, cur = cur, nxt
        col += 1
        if col % 2 == 0:
            estimates.append(cur[-1])
    return estimates


def initial_limit(f, alpha, beta, levels=5):
    r"""Estimate :math:`\lim_{t\to 0^+} I^{(1-\beta)(1-\alpha)} f(t)`.

    The fractional integral is evaluated on the grid and on coarsened copies
    (every ``2**l``-th sample). Its value at the first non-zero node of each
    copy gives a sequence at times ``h, 2h, 4h, ...`` in which the quadrature
    error scales with the same power of ``t`` as the signal itself. Wynn's
    epsilon algorithm then removes the leading power-law components and
    extrapolates to ``t = 0``.

    Returns
    -------
    LimitEstimate
        ``error`` is the spread between the two highest-order estimates.
    """
    if not 0 < alpha < 1:
        raise InvalidOrder(f"need 0 < alpha < 1, got {alpha!r}")
    if not 0 <= beta <= 1:
        raise InvalidOrder(f"need 0 <= beta <= 1, got {beta!r}")
    order = (1.0 - beta) * (1.0 - alpha)
    seq = []
    for level in range(levels):
        stride = 2**level
        vals = f.values[::stride]
        if vals.shape[0] < 3:
            break
        sub = SampledFunction(f.t[::stride], vals)
        g = rl_integral(sub, order) if order > 0 else sub
        seq.append(g.values[1])
    # largest time first, smallest last: the table then extrapolates t -> 0
    seq = np.asarray(seq[::-1])
    if seq.ndim > 1:
        results = [initial_limit(f.with_values(f.values[:, j]), alpha, beta, levels)
                   for j in range(seq.shape[1])]
        worst = max(results, key=lambda r: abs(r.value))
        return LimitEstimate(worst.value, max(r.error for r in results))
    estimates = _wynn_epsilon(seq)
    value = estimates[-1]
    error = abs(estimates[-1] - estimates[-2]) if len(estimates) > 1 else abs(seq[-1])
    return LimitEstimate(float(value), float(error))
