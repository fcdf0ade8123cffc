"""Exception types shared across the toolkit."""


class SrbeamError(Exception):
    """Base class for all toolkit errors."""


class NonFiniteState(SrbeamError):
    """A dynamical variable became NaN or infinite during integration."""

    def __init__(self, message, run_index=None):
        super().__init__(message)
        self.run_index = run_index


class NoSuperradiantSolution(SrbeamError):
    """No self-consistent collective-emission fixed point at these parameters."""


class InfeasibleDetuning(SrbeamError):
    """The frequency-shift equation has no real solution (|u| > 1)."""


class NoConvergence(SrbeamError):
    """An iterative solver did not reach the requested residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NoRootFound(SrbeamError):
    """The dispersion-root search exhausted its grid without converging."""


class QuadratureFailure(SrbeamError):
    """Adaptive quadrature failed to reach the requested accuracy."""


class InsufficientData(SrbeamError):
    """The trajectory records are too short for the requested estimator."""


class DivisionUnstable(SrbeamError):
    """A normalizing moment is too close to zero for a stable ratio."""


class InconclusiveBoundary(SrbeamError):
    """The governing stability root is too close to zero to classify."""


class ConfigError(SrbeamError):
    """Invalid run configuration (maps to CLI exit code 2)."""
