r"""Direct problem: the field driven by a known source ``g(t, x)``.

Each sine mode obeys the two-term fractional ODE

.. math::

    D^{\alpha_1,\beta_1} U_k + \mu D^{\alpha_2,\beta_2} U_k + (k\pi)^2 U_k = g_k(t)

with homogeneous initial data, whose solution is the convolution of ``g_k``
with the kernel

.. math::

    K_k(z) = z^{\alpha_1-1} E_{(\alpha_1-\alpha_2,\alpha_1),\alpha_1}
        (-\mu z^{\alpha_1-\alpha_2}, -(k\pi)^2 z^{\alpha_1}).

Raising ``rho`` by one integrates in ``z``, so the first and second
antiderivatives of ``K_k`` are available in closed form. The convolution is
done by product integration: ``g_k`` is piecewise linear in time and its
weights are second differences of the second antiderivative, which is exact
for piecewise-linear sources and second-order accurate otherwise.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from sklearn.base import BaseEstimator

from .exceptions import FracSolveError, IncompatibleSource, InvalidParams, NoConvergence, PrecisionLoss
from .fracops import SampledFunction, hilfer_derivative, initial_limit
from .problem import (
    DEFAULT_TIME_STEPS,
    FractionalOrders,
    ModeDiagnostic,
    SolutionField,
    map_modes,
    time_grid,
)
from .spectral import DEFAULT_MODES, DEFAULT_SPACE_INTERVALS, SpaceGrid, analyze, check_compatibility, synthesize
from .validation import check_points, check_positive_int
from .specfun import check_gamma_monotonicity, ml_bivariate, ml_bivariate_contour

__all__ = [
    "DirectProblemSpec",
    "ResidualReport",
    "kernel",
    "kernel_primitive",
    "solve_mode",
    "solve_direct",
    "verify_direct",
    "residual_report",
    "probe_initial_limits",
    "DirectSolver",
]

BOUNDARY_LAYER = 0.02
GAMMA_CHECK_N = 50


def _ml_values(p, x, y):
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    if np.all(x <= 0) and np.all(y <= 0):
        return np.asarray(ml_bivariate_contour(p, x, y), dtype=float)
    flat = [ml_bivariate(p, xi, yi, method="auto") for xi, yi in zip(x.ravel(), y.ravel())]
    return np.asarray(flat, dtype=float).reshape(x.shape)


def ml_power(k, orders, t, shift):
    r"""``t^(rho-1) E_{(a1-a2, a1), rho}(-mu t^(a1-a2), -(k pi)^2 t^a1)``, ``rho = alpha1 + shift``.

    ``shift = 0`` is the kernel, ``1`` and ``2`` its first and second
    antiderivatives (zero at ``t = 0``).
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise InvalidParams("time must be non-negative")
    p = orders.ml_params(shift)
    lam = (k * math.pi) ** 2
    vals = _ml_values(p, -orders.mu * t**p.a, -lam * t**p.b)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = t ** (p.rho - 1.0) * vals
    if shift > 0:
        out = np.where(t == 0.0, 0.0, out)
    return out


def kernel(k, orders, z):
    """Convolution kernel of mode ``k`` at ``z > 0`` (vectorised over ``z``)."""
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr <= 0):
        raise InvalidParams("kernel is singular at z = 0; need z > 0")
    out = ml_power(k, orders, z_arr, 0)
    return float(out) if out.ndim == 0 else out


def kernel_primitive(k, orders, t, order=1):
    """``order``-fold antiderivative of :func:`kernel` vanishing at ``t = 0``."""
    if order not in (1, 2):
        raise InvalidParams("order must be 1 or 2")
    out = ml_power(k, orders, t, order)
    return float(out) if np.ndim(out) == 0 else out


def _convolution_weights(k, orders, t):
    """Product-integration weights for ``U(t_n) = int_0^{t_n} K(z) g(t_n - z) dz``.

    Returns ``(w, end)``: lag weights ``w[m]`` applied to ``g_{n-m}`` and the
    replacement weight ``end[n]`` of the ``g_0`` sample.
    """
    h = t[1] - t[0]
    A1 = ml_power(k, orders, t, 1)
    A2 = ml_power(k, orders, t, 2)
    n = t.size
    w = np.empty(n)
    w[0] = A2[1] / h
    w[1:-1] = (A2[2:] - 2.0 * A2[1:-1] + A2[:-2]) / h
    w[-1] = np.nan  # lag n-1 only ever multiplies g_0, handled by ``end``
    end = np.zeros(n)
    end[1:] = A1[1:] - (A2[1:] - A2[:-1]) / h
    return w, end


def solve_mode(k, orders, g_k):
    """Solve one mode ODE with zero initial data by product integration.

    Parameters
    ----------
    k : int
        Mode index (``lambda_k = (k pi)^2``).
    orders : FractionalOrders
    g_k : SampledFunction
        Source coefficient on a uniform grid starting at ``t = 0``.

    Returns
    -------
    SampledFunction
        ``U_k`` on the same grid, ``U_k(0) = 0``.
    """
    t = g_k.t
    if abs(t[0]) > 0:
        raise InvalidParams("mode source must be sampled from t = 0")
    g = np.asarray(g_k.values, dtype=float)
    if g.ndim != 1:
        raise InvalidParams("solve_mode takes a single mode trajectory")
    w, end = _convolution_weights(k, orders, t)
    n = t.size
    lag = w.copy()
    lag[-1] = 0.0
    U = np.convolve(lag, g)[:n]
    idx = np.arange(1, n)
    U[1:] += (end[1:] - lag[idx]) * g[0]
    U[0] = 0.0
    return g_k.with_values(U)


@dataclass
class DirectProblemSpec:
    """Inputs of a direct solve.

    Exactly one of ``source`` (a callable ``g(t, x)`` broadcasting over an
    outer product, optionally with ``dx(t, x, m)``) and ``mode_source``
    (array ``(n_steps + 1, K)`` or callable ``t -> (len(t), K)``) is given.
    """

    orders: FractionalOrders
    source: Optional[Callable] = None
    mode_source: Optional[Union[np.ndarray, Callable]] = None
    K: int = DEFAULT_MODES
    n_steps: int = DEFAULT_TIME_STEPS
    M: int = DEFAULT_SPACE_INTERVALS
    waive_compat: bool = False

    def __post_init__(self):
        if (self.source is None) == (self.mode_source is None):
            raise InvalidParams("give exactly one of source and mode_source")
        self.K = check_positive_int(self.K, "K")
        SpaceGrid(self.M).require_modes(self.K)

    @property
    def t(self):
        return time_grid(self.orders.T, self.n_steps)

    @property
    def grid(self):
        return SpaceGrid(self.M)

    def source_samples(self):
        """``g`` on the tensor grid, shape ``(n_steps + 1, M + 1)``."""
        if self.source is not None:
            return np.asarray(self.source(self.t, self.grid.points), dtype=float)
        return synthesize(self.mode_coefficients(), self.grid)

    def mode_coefficients(self):
        """``g_k(t_n)``, shape ``(n_steps + 1, K)``."""
        if self.mode_source is not None:
            coeffs = self.mode_source(self.t) if callable(self.mode_source) else self.mode_source
            coeffs = np.asarray(coeffs, dtype=float)
            if coeffs.shape != (self.t.size, self.K):
                raise InvalidParams(f"mode_source must have shape {(self.t.size, self.K)}, got {coeffs.shape}")
            return coeffs
        return analyze(self.source_samples(), self.K)

    def source_derivatives(self):
        """x-derivatives of orders 1..3 on the tensor grid (analytic when available)."""
        t, x = self.t, self.grid.points
        if self.source is not None and hasattr(self.source, "dx"):
            return [np.asarray(self.source.dx(t, x, m), dtype=float) for m in (1, 2, 3)]
        if self.mode_source is not None:
            # termwise: d^m sin(k pi x) = (k pi)^m sin(k pi x + m pi / 2)
            coeffs = self.mode_coefficients()
            w = np.pi * np.arange(1, self.K + 1)
            out = []
            for m in (1, 2, 3):
                d = (coeffs * w**m) @ np.sin(np.multiply.outer(w, x) + m * np.pi / 2)
                if m % 2 == 0:
                    d[:, [0, -1]] = 0.0
                out.append(d)
            return out
        warnings.warn("source has no analytic x-derivatives; using finite differences", stacklevel=2)
        g = self.source_samples()
        out = []
        for _ in range(3):
            g = np.gradient(g, x, axis=1, edge_order=2)
            out.append(g)
        return out


def _select_route(spec):
    """Validate the source against the solvability profiles; return (route, report lines)."""
    g = spec.source_samples()
    derivs = spec.source_derivatives()
    strong = check_compatibility(g, derivs, "direct_strong")
    weak = check_compatibility(g, derivs, "direct_weak")
    gamma_ok, violation = check_gamma_monotonicity(spec.orders.ml_params(0), GAMMA_CHECK_N)
    lines = [str(strong), str(weak)]
    if gamma_ok:
        lines.append(f"gamma monotonicity (n <= {GAMMA_CHECK_N}): pass")
    else:
        lines.append(f"gamma monotonicity (n <= {GAMMA_CHECK_N}): FAIL at (n, k) = {violation}")
    if strong.passed:
        return "theorem2 (strong source profile)", lines
    if weak.passed and gamma_ok:
        return "theorem3 (weak source profile + gamma monotonicity)", lines
    if spec.waive_compat:
        return "waived", lines
    raise IncompatibleSource(
        "source fails the strong profile and the weak profile + gamma monotonicity route:\n" + "\n".join(lines)
    )


def _solve_modes(orders, t, coeffs):
    """Solve all modes; failures mark the mode unreliable instead of aborting."""

    def one(k):
        try:
            U = solve_mode(k, orders, SampledFunction(t, coeffs[:, k - 1])).values
        except (PrecisionLoss, NoConvergence) as exc:
            return np.zeros(t.size), ModeDiagnostic(k, False, str(exc))
        if not np.all(np.isfinite(U)):
            return np.zeros(t.size), ModeDiagnostic(k, False, "non-finite mode trajectory")
        return U, ModeDiagnostic(k)

    results = map_modes(one, range(1, coeffs.shape[1] + 1))
    modes = np.column_stack([r[0] for r in results])
    return modes, [r[1] for r in results]


def solve_direct(spec):
    """Assemble ``u = sum_k U_k(t) sin(k pi x)`` for the given source.

    Raises
    ------
    IncompatibleSource
        If the source passes neither solvability route and is not waived.
    """
    route, lines = _select_route(spec)
    t = spec.t
    modes, diags = _solve_modes(spec.orders, t, spec.mode_coefficients())
    grid = spec.grid
    u = synthesize(modes, grid)
    sol = SolutionField(t, grid.points, u, modes, diags, route)
    sol.compatibility = lines
    return sol


@dataclass
class ResidualReport:
    """Residual of the two-term equation on interior points past the boundary layer."""

    max_abs: float
    rms: float
    relative: float
    source_scale: float
    t_start: float
    initial_limits: dict = field(default_factory=dict)
    excluded_modes: list = field(default_factory=list)

    @property
    def worst_initial_limit(self):
        vals = [abs(e.value) for pair in self.initial_limits.values() for e in pair]
        return max(vals) if vals else 0.0

    def lines(self):
        out = [
            f"residual max |r|      = {self.max_abs:.6e}",
            f"residual rms          = {self.rms:.6e}",
            f"relative residual     = {self.relative:.6e} (scale max|g| = {self.source_scale:.6e})",
            f"evaluated for t >= {self.t_start:.6g}, interior x only",
            f"worst initial limit   = {self.worst_initial_limit:.3e}",
        ]
        if self.excluded_modes:
            out.append(f"excluded (unreliable) modes: {self.excluded_modes}")
        return out

    def __str__(self):
        return "\n".join(self.lines())


def residual_report(field_, orders, g, boundary_layer=BOUNDARY_LAYER, excluded=(), mode_source=None):
    """Residual ``D^{a1,b1}u + mu D^{a2,b2}u - u_xx - g`` from samples alone.

    ``g`` holds the right-hand side on the tensor grid. Time derivatives come
    from :func:`hilfer_derivative`, ``u_xx`` from central second differences.
    ``mode_source(t) -> (len(t), K)``, when given, drives the per-mode
    initial-limit probe (see :func:`probe_initial_limits`).
    """
    t, x, u = field_.t, field_.x, field_.u
    sf = SampledFunction(t, u)
    d1 = hilfer_derivative(sf, orders.alpha1, orders.beta1).values
    d2 = hilfer_derivative(sf, orders.alpha2, orders.beta2).values
    hx = x[1] - x[0]
    uxx = (u[:, 2:] - 2.0 * u[:, 1:-1] + u[:, :-2]) / hx**2
    res = d1[:, 1:-1] + orders.mu * d2[:, 1:-1] - uxx - g[:, 1:-1]
    keep = t >= t[0] + boundary_layer * (t[-1] - t[0])
    keep[0] = False
    r = res[keep]
    scale = float(np.max(np.abs(g[keep][:, :])) if r.size else 0.0)
    max_abs = float(np.max(np.abs(r))) if r.size else 0.0
    rms = float(np.sqrt(np.mean(r**2))) if r.size else 0.0
    relative = max_abs / scale if scale > 0 else max_abs

    limits = {}
    if mode_source is not None:
        for d in field_.diagnostics:
            if d.reliable:
                limits[d.k] = probe_initial_limits(d.k, orders, lambda tt, k=d.k: mode_source(tt)[:, k - 1])
    return ResidualReport(max_abs, rms, relative, scale, float(t[keep][0]) if r.size else float("nan"),
                          limits, list(excluded))


PROBE_STEPS = 256
PROBE_CORRECTION = 1e-3


def probe_window(k, orders, correction=PROBE_CORRECTION):
    """Length of a window near ``t = 0`` where mode ``k`` is in its leading-power regime.

    Inside ``[0, tau]`` the corrections ``(k pi)^2 t^a1`` and
    ``mu t^(a1 - a2)`` to the leading behaviour stay below ``correction``.
    """
    lam = (k * math.pi) ** 2
    tau = min(orders.T, (correction / lam) ** (1.0 / orders.alpha1))
    if orders.mu > 0:
        tau = min(tau, (correction / orders.mu) ** (1.0 / (orders.alpha1 - orders.alpha2)))
    return tau


def probe_initial_limits(k, orders, g_of_t, n=PROBE_STEPS):
    """Initial limits of mode ``k`` for both derivative terms.

    The working grid cannot see ``t -> 0`` for high modes: ``U_k`` only
    follows its leading power for ``t`` well below ``(k pi)^(-2/alpha1)``,
    which is usually smaller than one time step. The mode is therefore
    re-solved on ``n`` steps of :func:`probe_window` and
    :func:`~fracsolve.fracops.initial_limit` extrapolates there.

    Parameters
    ----------
    g_of_t : callable
        Source coefficient ``g_k`` as a function of time.

    Returns
    -------
    tuple of LimitEstimate
        For ``(alpha1, beta1)`` and ``(alpha2, beta2)``.
    """
    t = np.linspace(0.0, probe_window(k, orders), n + 1)
    U = solve_mode(k, orders, SampledFunction(t, np.asarray(g_of_t(t), dtype=float)))
    return (initial_limit(U, orders.alpha1, orders.beta1), initial_limit(U, orders.alpha2, orders.beta2))


def _mode_source_function(spec):
    """``t -> g_k(t)`` for all modes, for arbitrary times in ``[0, T]``."""
    if spec.source is not None:
        x = spec.grid.points
        return lambda t: analyze(np.asarray(spec.source(t, x), dtype=float), spec.K)
    if callable(spec.mode_source):
        return spec.mode_source
    tg, coeffs = spec.t, spec.mode_coefficients()
    return lambda t: _interp_modes(tg, coeffs, t)


def verify_direct(field_, spec, boundary_layer=BOUNDARY_LAYER):
    """Residual report for a field produced by :func:`solve_direct`.

    Modes flagged unreliable are removed from the source before comparing,
    so they are reported as excluded rather than counted as residual.
    """
    g = spec.source_samples()
    excluded = field_.unreliable_modes()
    if excluded:
        coeffs = spec.mode_coefficients()
        drop = np.zeros_like(coeffs)
        for k in excluded:
            drop[:, k - 1] = coeffs[:, k - 1]
        g = g - synthesize(drop, spec.grid)
    return residual_report(field_, spec.orders, g, boundary_layer, excluded, _mode_source_function(spec))


def _interp_modes(t_grid, modes, t):
    t = np.asarray(t, dtype=float)
    return np.column_stack([np.interp(t, t_grid, modes[:, j]) for j in range(modes.shape[1])])


class DirectSolver(BaseEstimator):
    """Estimator-style front end for the direct problem.

    ``fit(source)`` solves for the field; ``predict(X)`` evaluates
    ``u(t, x)`` at rows ``X[:, 0] = t``, ``X[:, 1] = x`` (mode trajectories
    are interpolated linearly in time).

    Parameters
    ----------
    alpha1, alpha2, beta1, beta2, mu, T : float
        See :class:`~fracsolve.problem.FractionalOrders`.
    n_modes : int
    n_steps : int
        Number of time steps on ``[0, T]``.
    n_space : int
        Number of space intervals on ``[0, 1]`` (even).
    waive_compat : bool
        Solve even when the source fails both solvability profiles.
    """

    def __init__(self, alpha1=0.8, alpha2=0.4, beta1=1.0, beta2=1.0, mu=0.0, T=1.0,
                 n_modes=DEFAULT_MODES, n_steps=DEFAULT_TIME_STEPS, n_space=DEFAULT_SPACE_INTERVALS,
                 waive_compat=False):
        self.alpha1 = alpha1
        self.alpha2 = alpha2
        self.beta1 = beta1
        self.beta2 = beta2
        self.mu = mu
        self.T = T
        self.n_modes = n_modes
        self.n_steps = n_steps
        self.n_space = n_space
        self.waive_compat = waive_compat

    def _orders(self):
        return FractionalOrders(self.alpha1, self.alpha2, self.beta1, self.beta2, self.mu, self.T)

    def _spec(self, source=None, mode_source=None):
        return DirectProblemSpec(self._orders(), source=source, mode_source=mode_source, K=self.n_modes,
                                 n_steps=self.n_steps, M=self.n_space, waive_compat=self.waive_compat)

    def fit(self, source, y=None):
        """Solve for ``source``: a callable ``g(t, x)`` or mode array ``(n_steps + 1, n_modes)``."""
        spec = self._spec(mode_source=source) if not callable(source) or isinstance(source, np.ndarray) \
            else self._spec(source=source)
        self.spec_ = spec
        self.field_ = solve_direct(spec)
        self.route_ = self.field_.route
        self.diagnostics_ = self.field_.diagnostics
        return self

    def _check_fitted(self):
        if not hasattr(self, "field_"):
            from sklearn.exceptions import NotFittedError

            raise NotFittedError("DirectSolver is not fitted yet")

    def predict(self, X):
        self._check_fitted()
        X = check_points(X, self.T)
        U = _interp_modes(self.field_.t, self.field_.modes, X[:, 0])
        S = np.sin(np.pi * np.multiply.outer(X[:, 1], np.arange(1, self.n_modes + 1)))
        return np.sum(U * S, axis=1)

    def score(self, X=None, y=None):
        """Negative relative residual of the fitted field (higher is better)."""
        self._check_fitted()
        return -verify_direct(self.field_, self.spec_).relative

    def verify(self):
        self._check_fitted()
        return verify_direct(self.field_, self.spec_)
