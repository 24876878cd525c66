"""Data types shared by the direct and inverse solvers."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidOrder, InvalidParams
from .specfun import MLParams

__all__ = ["FractionalOrders", "ModeDiagnostic", "SolutionField", "time_grid", "map_modes"]

DEFAULT_TIME_STEPS = 2000


@dataclass(frozen=True)
class FractionalOrders:
    """Orders, types, coupling and horizon of the two-term equation.

    ``0 < alpha2 < alpha1 < 1``, ``0 <= beta1, beta2 <= 1`` and ``T > 0``.
    """

    alpha1: float
    alpha2: float
    beta1: float = 1.0
    beta2: float = 1.0
    mu: float = 0.0
    T: float = 1.0

    def __post_init__(self):
        for name in ("alpha1", "alpha2", "beta1", "beta2", "mu", "T"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidOrder(f"{name} must be finite")
        if not 0 < self.alpha2 < self.alpha1 < 1:
            raise InvalidOrder(
                f"orders must satisfy 0 < alpha2 < alpha1 < 1, got alpha1={self.alpha1}, alpha2={self.alpha2}"
            )
        for name in ("beta1", "beta2"):
            if not 0 <= getattr(self, name) <= 1:
                raise InvalidOrder(f"{name} must lie in [0, 1], got {getattr(self, name)}")
        if not self.T > 0:
            raise InvalidOrder(f"T must be positive, got {self.T}")

    def ml_params(self, rho_shift=0.0):
        """Parameters of the kernel Mittag-Leffler function, ``rho = alpha1 + rho_shift``."""
        return MLParams(self.alpha1 - self.alpha2, self.alpha1, self.alpha1 + rho_shift)

    @property
    def initial_orders(self):
        """``(1 - beta_i)(1 - alpha_i)`` for ``i = 1, 2``."""
        return ((1 - self.beta1) * (1 - self.alpha1), (1 - self.beta2) * (1 - self.alpha2))


@dataclass
class ModeDiagnostic:
    k: int
    reliable: bool = True
    message: str = ""
    denominator: float = float("nan")


@dataclass
class SolutionField:
    """Field ``u(t, x) = sum_k U_k(t) sin(k pi x)`` on a tensor grid.

    Attributes
    ----------
    t : ndarray, shape (N + 1,)
    x : ndarray, shape (M + 1,)
    u : ndarray, shape (N + 1, M + 1)
    modes : ndarray, shape (N + 1, K)
        Column ``k - 1`` holds ``U_k(t)``; unreliable modes are zero.
    diagnostics : list of ModeDiagnostic
    route : str
        Which solvability conditions were validated (or ``"waived"``).
    """

    t: np.ndarray
    x: np.ndarray
    u: np.ndarray
    modes: np.ndarray
    diagnostics: list = field(default_factory=list)
    route: str = ""

    @property
    def K(self):
        return self.modes.shape[1]

    def unreliable_modes(self):
        return [d.k for d in self.diagnostics if not d.reliable]


def time_grid(T, n_steps):
    if int(n_steps) != n_steps or n_steps < 4:
        raise InvalidParams(f"need at least 4 time steps, got {n_steps!r}")
    return np.linspace(0.0, T, int(n_steps) + 1)


def _thread_count():
    raw = os.environ.get("FRACSOLVE_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise InvalidParams(f"FRACSOLVE_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise InvalidParams("FRACSOLVE_THREADS must be >= 0")
    return n if n > 0 else min(8, os.cpu_count() or 1)


def map_modes(func, ks):
    """Apply ``func`` to each mode index; results come back in input order."""
    ks = list(ks)
    workers = min(_thread_count(), len(ks))
    if workers <= 1:
        return [func(k) for k in ks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, ks))
