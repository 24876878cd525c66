"""Exception hierarchy shared by the numerical modules and the CLI."""


class FracSolveError(Exception):
    """Base class for all errors raised by :mod:`fracsolve`."""


class InvalidParams(FracSolveError, ValueError):
    """Parameters violate a documented invariant."""


class InvalidOrder(InvalidParams):
    """A fractional order lies outside its admissible range."""


class PoleError(FracSolveError, ValueError):
    """Gamma evaluated at zero or a negative integer."""


class NoConvergence(FracSolveError, ArithmeticError):
    """A series hit its term cap before the tail bound was met."""


class PrecisionLoss(FracSolveError, ArithmeticError):
    """Cancellation in an alternating sum exceeded the configured guard.

    Attributes
    ----------
    ratio : float
        Largest partial-term magnitude divided by the magnitude of the result.
    """

    def __init__(self, message, ratio=float("nan")):
        super().__init__(message)
        self.ratio = ratio


class GridTooCoarse(InvalidParams):
    """Spatial grid cannot resolve the requested number of sine modes."""


class IncompatibleSource(FracSolveError, ValueError):
    """Source term fails every admissible smoothness/boundary profile."""


class DegenerateDenominator(FracSolveError, ArithmeticError):
    """Final-time factor of one or more modes is below the denominator floor.

    Attributes
    ----------
    modes : list of int
        Offending mode indices (1-based).
    values : list of float
        Denominator values for those modes.
    """

    def __init__(self, modes, values, eps_den):
        self.modes = list(modes)
        self.values = list(values)
        self.eps_den = eps_den
        detail = ", ".join(f"k={k} (denominator={v:.3e})" for k, v in zip(self.modes, self.values))
        super().__init__(f"denominator below eps_den={eps_den:.3e} for {detail}")


class ConfigError(FracSolveError, ValueError):
    """Problem in a run configuration file; carries line and field context."""

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"[{field}]")
        super().__init__(f"{' '.join(where)}: {message}" if where else message)


class ParseError(ConfigError):
    """The configuration file is malformed or contains unknown keys."""


class ValidationError(ConfigError, InvalidParams):
    """A configuration value violates an invariant."""
