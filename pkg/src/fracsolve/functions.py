"""Built-in data functions with analytic x-derivatives.

Space functions are called as ``f(x)`` and expose ``derivative(x, m)``.
Space-time sources are called as ``g(t, x)`` (broadcasting) and expose
``dx(t, x, m)``. Analytic derivatives keep compatibility checks free of
finite-difference noise; :class:`Tabulated` falls back to differences.
"""

from __future__ import annotations

import warnings

import numpy as np
from numpy.polynomial import polynomial as P

from .exceptions import InvalidParams

__all__ = [
    "SineMode",
    "SineSum",
    "Bubble",
    "BoundaryPolynomial",
    "Tabulated",
    "Constant",
    "Power",
    "Separable",
    "Zero",
    "space_function",
    "time_function",
]


class SpaceFunction:
    def __call__(self, x):
        return self.derivative(x, 0)

    def derivative(self, x, m):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({', '.join(f'{k}={v!r}' for k, v in vars(self).items())})"


class SineMode(SpaceFunction):
    """``amplitude * sin(n pi x)``."""

    def __init__(self, n=1, amplitude=1.0):
        if int(n) != n or n < 1:
            raise InvalidParams(f"sine mode index must be a positive integer, got {n!r}")
        self.n = int(n)
        self.amplitude = float(amplitude)

    def derivative(self, x, m):
        w = self.n * np.pi
        x = np.asarray(x, dtype=float)
        # d^m/dx^m sin(wx) = w^m sin(wx + m pi / 2)
        out = self.amplitude * w**m * np.sin(w * x + m * np.pi / 2)
        if m % 2 == 0:
            out = np.where((x == 0.0) | (x == 1.0), 0.0, out)
        return out


class SineSum(SpaceFunction):
    """Finite sum of sine modes ``sum_j a_j sin(n_j pi x)``."""

    def __init__(self, modes, amplitudes):
        if len(modes) != len(amplitudes):
            raise InvalidParams("modes and amplitudes must have equal length")
        self.parts = [SineMode(n, a) for n, a in zip(modes, amplitudes)]

    def derivative(self, x, m):
        return sum(p.derivative(x, m) for p in self.parts)


class BoundaryPolynomial(SpaceFunction):
    """``scale * x (1 - x) q(x)`` with ``q`` given by ascending coefficients."""

    def __init__(self, coeffs=(1.0,), scale=1.0):
        self.coeffs = tuple(float(c) for c in coeffs)
        self.scale = float(scale)
        self._poly = P.polymul([0.0, 1.0, -1.0], self.coeffs) * self.scale

    def derivative(self, x, m):
        return P.polyval(np.asarray(x, dtype=float), P.polyder(self._poly, m) if m else self._poly)


class Bubble(BoundaryPolynomial):
    """``scale * x (1 - x)``."""

    def __init__(self, scale=1.0):
        super().__init__((1.0,), scale)


class Tabulated(SpaceFunction):
    """Linear interpolant of tabulated samples; derivatives by differences."""

    def __init__(self, x, values):
        x = np.asarray(x, dtype=float)
        values = np.asarray(values, dtype=float)
        if x.ndim != 1 or x.shape != values.shape or x.size < 4:
            raise InvalidParams("tabulated data need matching 1-D x and values with >= 4 rows")
        if np.any(np.diff(x) <= 0):
            raise InvalidParams("tabulated x must be strictly increasing")
        if x[0] > 0.0 or x[-1] < 1.0:
            raise InvalidParams("tabulated x must cover [0, 1]")
        self.x = x
        self.values = values

    def derivative(self, x, m):
        x = np.asarray(x, dtype=float)
        out = np.interp(x, self.x, self.values)
        if m == 0:
            return out
        warnings.warn("derivatives of tabulated data are finite-difference estimates", stacklevel=2)
        for _ in range(m):
            out = np.gradient(out, x, edge_order=2)
        return out


class Zero(SpaceFunction):
    def derivative(self, x, m):
        return np.zeros_like(np.asarray(x, dtype=float))


class TimeFunction:
    def __call__(self, t):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({', '.join(f'{k}={v!r}' for k, v in vars(self).items())})"


class Constant(TimeFunction):
    def __init__(self, value=1.0):
        self.value = float(value)

    def __call__(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.value)


class Power(TimeFunction):
    """``coeff * t**p`` with ``p >= 0``."""

    def __init__(self, p=1.0, coeff=1.0):
        if p < 0:
            raise InvalidParams("time power must be non-negative")
        self.p = float(p)
        self.coeff = float(coeff)

    def __call__(self, t):
        return self.coeff * np.asarray(t, dtype=float) ** self.p


class Separable:
    """Space-time source ``f(t) h(x)``."""

    def __init__(self, time, space):
        self.time = time
        self.space = space

    def __call__(self, t, x):
        return self.dx(t, x, 0)

    def dx(self, t, x, m):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        return np.multiply.outer(self.time(t), self.space.derivative(x, m))

    def __repr__(self):
        return f"Separable({self.time!r}, {self.space!r})"


def space_function(name, **params):
    """Build a space function from a config-style name."""
    table = {
        "sin": lambda n=1, amplitude=1.0: SineMode(int(n), amplitude),
        "sine_sum": lambda modes, amplitudes: SineSum(modes, amplitudes),
        "bubble": lambda scale=1.0: Bubble(scale),
        "poly_bc": lambda coeffs=(1.0,), scale=1.0: BoundaryPolynomial(coeffs, scale),
        "zero": lambda: Zero(),
    }
    if name not in table:
        raise InvalidParams(f"unknown space function {name!r}; choose from {sorted(table)}")
    return table[name](**params)


def time_function(name, **params):
    table = {
        "const": lambda value=1.0: Constant(value),
        "power": lambda p=1.0, coeff=1.0: Power(p, coeff),
    }
    if name not in table:
        raise InvalidParams(f"unknown time function {name!r}; choose from {sorted(table)}")
    return table[name](**params)
