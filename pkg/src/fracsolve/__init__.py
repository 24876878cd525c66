"""Two-term time-fractional diffusion with Hilfer derivatives.

Direct and inverse-source solvers built on sine expansions in space and
bivariate Mittag-Leffler functions in time, plus the fractional-calculus
and special-function tools they rest on.
"""

__version__ = "0.1.0"

from .exceptions import (  # noqa: E402
    DegenerateDenominator,
    FracSolveError,
    GridTooCoarse,
    IncompatibleSource,
    InvalidOrder,
    InvalidParams,
    NoConvergence,
    ParseError,
    PoleError,
    PrecisionLoss,
    ValidationError,
)
from .specfun import MLParams, SeriesControl, check_gamma_monotonicity, gamma, ml_bivariate, ml_univariate  # noqa: E402
from .fracops import SampledFunction, hilfer_derivative, initial_limit, rl_integral  # noqa: E402
from .spectral import SineSeries, SineTransform, SpaceGrid, analyze, check_compatibility, synthesize  # noqa: E402
from .problem import FractionalOrders, SolutionField  # noqa: E402
from .direct import DirectProblemSpec, DirectSolver, kernel, solve_direct, solve_mode, verify_direct  # noqa: E402
from .inverse import (  # noqa: E402
    InverseProblemSpec,
    InverseSourceSolver,
    denominator,
    reconstruct_field,
    reconstruct_source,
    solve_inverse,
    verify_inverse,
)

__all__ = [name for name in dir() if not name.startswith("_")]
