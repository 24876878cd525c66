r"""Inverse source problem: recover ``g(x)`` from the final-time state ``phi(x)``.

With a time-independent source every mode solves the constant-source
problem, so ``U_k(t) = g_k A_k(t)`` where

.. math::

    A_k(t) = t^{\alpha_1} E_{(\alpha_1-\alpha_2,\alpha_1),\alpha_1+1}
        (-\mu t^{\alpha_1-\alpha_2}, -(k\pi)^2 t^{\alpha_1}).

The observation ``U_k(T) = phi_k`` then gives ``g_k = phi_k / A_k(T)`` and
``U_k(t) = phi_k A_k(t) / A_k(T)``. ``A_k(T)`` is the denominator; a mode
whose denominator falls below ``eps_den`` cannot be recovered stably and
aborts the reconstruction.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator

from .direct import BOUNDARY_LAYER, kernel_primitive, probe_initial_limits, residual_report
from .exceptions import DegenerateDenominator, IncompatibleSource, InvalidParams, NoConvergence, PrecisionLoss
from .problem import DEFAULT_TIME_STEPS, FractionalOrders, ModeDiagnostic, SolutionField, map_modes, time_grid
from .spectral import DEFAULT_MODES, DEFAULT_SPACE_INTERVALS, SineSeries, SpaceGrid, analyze, check_compatibility, synthesize
from .specfun import gamma
from .validation import check_positive_int, check_samples, check_unit_points

__all__ = [
    "InverseProblemSpec",
    "InverseSolution",
    "InverseReport",
    "default_eps_den",
    "denominator",
    "reconstruct_source",
    "reconstruct_field",
    "solve_inverse",
    "verify_inverse",
    "InverseSourceSolver",
]


def default_eps_den(orders):
    """``1e-10`` times the small-``T`` size ``T^alpha1 / Gamma(alpha1 + 1)`` of the denominator."""
    return 1e-10 * orders.T**orders.alpha1 / gamma(orders.alpha1 + 1.0)


def denominator(k, orders):
    """``A_k(T)``: the final-time factor that divides ``phi_k``.

    Raises
    ------
    InvalidParams
        If ``k < 1``.
    """
    if int(k) != k or k < 1:
        raise InvalidParams(f"mode index must be a positive integer, got {k!r}")
    return float(kernel_primitive(int(k), orders, orders.T, 1))


@dataclass
class InverseProblemSpec:
    """Inputs of the inverse problem.

    ``phi`` is a space function (callable with ``derivative(x, m)``) or
    samples on the uniform grid with ``M + 1`` nodes. For plain samples the
    derivatives needed by the compatibility check come from finite
    differences unless ``phi_derivs`` (orders 1..3) is given.
    """

    orders: FractionalOrders
    phi: object
    K: int = DEFAULT_MODES
    n_steps: int = DEFAULT_TIME_STEPS
    M: int = DEFAULT_SPACE_INTERVALS
    eps_den: Optional[float] = None
    waive_compat: bool = False
    phi_derivs: Optional[list] = None

    def __post_init__(self):
        self.K = check_positive_int(self.K, "K")
        SpaceGrid(self.M).require_modes(self.K)
        if self.eps_den is None:
            self.eps_den = default_eps_den(self.orders)
        if not (self.eps_den > 0 and math.isfinite(self.eps_den)):
            raise InvalidParams(f"eps_den must be positive, got {self.eps_den!r}")
        if not callable(self.phi):
            self.phi = check_samples(self.phi, "phi", self.M + 1)

    @property
    def grid(self):
        return SpaceGrid(self.M)

    @property
    def t(self):
        return time_grid(self.orders.T, self.n_steps)

    def phi_samples(self):
        if callable(self.phi):
            return np.asarray(self.phi(self.grid.points), dtype=float)
        return np.asarray(self.phi, dtype=float)

    def phi_derivatives(self):
        x = self.grid.points
        if self.phi_derivs is not None:
            return [np.asarray(d, dtype=float) for d in self.phi_derivs]
        if hasattr(self.phi, "derivative"):
            return [np.asarray(self.phi.derivative(x, m), dtype=float) for m in (1, 2, 3)]
        warnings.warn("phi has no analytic derivatives; using finite differences", stacklevel=2)
        out, d = [], self.phi_samples()
        for _ in range(3):
            d = np.gradient(d, x, edge_order=2)
            out.append(d)
        return out

    def phi_coefficients(self):
        return analyze(self.phi_samples(), self.K)


@dataclass
class InverseSolution:
    g_series: SineSeries
    u_field: Optional[SolutionField]
    denominators: np.ndarray
    eps_den: float
    compatibility: list = field(default_factory=list)

    @property
    def margins(self):
        """``|denominator_k| / eps_den`` per mode."""
        return np.abs(self.denominators) / self.eps_den


def _denominators(spec):
    def one(k):
        try:
            return denominator(k, spec.orders)
        except (PrecisionLoss, NoConvergence):
            return float("nan")

    return np.asarray(map_modes(one, range(1, spec.K + 1)), dtype=float)


def _check_phi(spec):
    report = check_compatibility(spec.phi_samples(), spec.phi_derivatives(), "inverse")
    if not report.passed and not spec.waive_compat:
        raise IncompatibleSource("observation fails the compatibility profile:\n" + str(report))
    return [str(report) + ("" if report.passed else "\n  (waived)")]


def reconstruct_source(spec, denominators=None):
    """Source coefficients ``g_k = phi_k / denominator(k)``.

    Raises
    ------
    IncompatibleSource
        If ``phi`` fails its compatibility profile and is not waived.
    DegenerateDenominator
        If any retained mode has ``|denominator| < eps_den`` (or it could not
        be evaluated); all offending modes are listed.
    """
    _check_phi(spec)
    den = _denominators(spec) if denominators is None else np.asarray(denominators, dtype=float)
    bad = ~(np.abs(den) >= spec.eps_den)
    if np.any(bad):
        ks = [int(k) for k in np.flatnonzero(bad) + 1]
        raise DegenerateDenominator(ks, [float(v) for v in den[bad]], spec.eps_den)
    return SineSeries(spec.phi_coefficients().coeffs / den)


def reconstruct_field(spec, g_series, denominators=None):
    """``u(t, x)`` for the recovered source; ``U_k(T) = phi_k`` exactly.

    The time profile ``A_k(t) / A_k(T)`` reuses the same evaluation of
    ``A_k(T)`` as the denominator, so the ratio is exactly one at ``t = T``.
    """
    t = spec.t
    phi_k = spec.phi_coefficients().coeffs
    if g_series.K != spec.K:
        raise InvalidParams(f"g_series has {g_series.K} modes, spec has K={spec.K}")

    def one(k):
        try:
            A = kernel_primitive(k, spec.orders, t, 1)
        except (PrecisionLoss, NoConvergence) as exc:
            return np.zeros(t.size), ModeDiagnostic(k, False, str(exc))
        den = A[-1] if denominators is None else denominators[k - 1]
        return phi_k[k - 1] * (A / den), ModeDiagnostic(k, True, "", float(den))

    results = map_modes(one, range(1, spec.K + 1))
    modes = np.column_stack([r[0] for r in results])
    diags = [r[1] for r in results]
    u = synthesize(modes, spec.grid)
    return SolutionField(t, spec.grid.points, u, modes, diags, "inverse")


def solve_inverse(spec):
    """Reconstruct the source and the field; see :func:`reconstruct_source`."""
    lines = _check_phi(spec)
    den = _denominators(spec)
    g = reconstruct_source(spec, den)
    u = reconstruct_field(spec, g, den)
    return InverseSolution(g, u, den, spec.eps_den, lines)


@dataclass
class InverseReport:
    residual: object
    observation_mismatch: float
    observation_tail: float
    margins: np.ndarray
    initial_limits: dict

    @property
    def worst_initial_limit(self):
        vals = [abs(e.value) for pair in self.initial_limits.values() for e in pair]
        return max(vals) if vals else 0.0

    def lines(self):
        out = self.residual.lines() if self.residual is not None else []
        out += [
            f"max |u(T,x) - phi(x)| = {self.observation_mismatch:.6e}",
            f"  of which sine tail of phi beyond K = {self.observation_tail:.6e}",
            f"smallest denominator margin |den|/eps_den = {np.min(self.margins):.6e}",
        ]
        return out

    def __str__(self):
        return "\n".join(self.lines())


def verify_inverse(sol, spec, boundary_layer=BOUNDARY_LAYER, residual=True):
    """Diagnostics of an inverse solution.

    Reports the equation residual with ``g(x)`` as the source, the final-time
    mismatch against the observation samples (and how much of it is the sine
    tail of ``phi`` beyond ``K`` modes), denominator margins and the
    initial-limit probes.
    """
    field_ = sol.u_field
    phi = spec.phi_samples()
    mismatch = float(np.max(np.abs(field_.u[-1] - phi)))
    tail = float(np.max(np.abs(synthesize(spec.phi_coefficients(), spec.grid) - phi)))
    g_x = synthesize(sol.g_series, spec.grid)
    rep = None
    if residual:
        rhs = np.broadcast_to(g_x, field_.u.shape)
        const = lambda tt: np.broadcast_to(sol.g_series.coeffs, (np.size(tt), spec.K))  # noqa: E731
        rep = residual_report(field_, spec.orders, rhs, boundary_layer, field_.unreliable_modes(), const)
    limits = {k: probe_initial_limits(k, spec.orders, lambda tt, c=sol.g_series.coeffs[k - 1]: np.full(np.size(tt), c))
              for k in range(1, spec.K + 1)}
    return InverseReport(rep, mismatch, tail, sol.margins, limits)


class InverseSourceSolver(BaseEstimator):
    """Estimator-style front end for the inverse source problem.

    ``fit(phi)`` takes the final-time observation (a space function or
    samples on ``n_space + 1`` nodes); ``predict(x)`` evaluates the recovered
    source ``g`` and :meth:`field` the reconstructed ``u``.

    Parameters
    ----------
    alpha1, alpha2, beta1, beta2, mu, T : float
    n_modes, n_steps, n_space : int
    eps_den : float or None
        Denominator floor; ``None`` picks :func:`default_eps_den`.
    waive_compat : bool
    """

    def __init__(self, alpha1=0.8, alpha2=0.4, beta1=1.0, beta2=1.0, mu=0.0, T=1.0,
                 n_modes=DEFAULT_MODES, n_steps=DEFAULT_TIME_STEPS, n_space=DEFAULT_SPACE_INTERVALS,
                 eps_den=None, waive_compat=False):
        self.alpha1 = alpha1
        self.alpha2 = alpha2
        self.beta1 = beta1
        self.beta2 = beta2
        self.mu = mu
        self.T = T
        self.n_modes = n_modes
        self.n_steps = n_steps
        self.n_space = n_space
        self.eps_den = eps_den
        self.waive_compat = waive_compat

    def fit(self, phi, y=None):
        orders = FractionalOrders(self.alpha1, self.alpha2, self.beta1, self.beta2, self.mu, self.T)
        self.spec_ = InverseProblemSpec(orders, phi, K=self.n_modes, n_steps=self.n_steps, M=self.n_space,
                                        eps_den=self.eps_den, waive_compat=self.waive_compat)
        self.solution_ = solve_inverse(self.spec_)
        self.g_series_ = self.solution_.g_series
        self.denominators_ = self.solution_.denominators
        return self

    def _check_fitted(self):
        if not hasattr(self, "solution_"):
            from sklearn.exceptions import NotFittedError

            raise NotFittedError("InverseSourceSolver is not fitted yet")

    def predict(self, x):
        """Recovered source ``g`` at ``x`` in ``[0, 1]``."""
        self._check_fitted()
        return self.g_series_(check_unit_points(x))

    def field(self):
        self._check_fitted()
        return self.solution_.u_field

    def verify(self):
        self._check_fitted()
        return verify_inverse(self.solution_, self.spec_)
