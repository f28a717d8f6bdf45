"""Exception types shared across the package."""


class VDLError(Exception):
    """Base class for all package errors."""


class ConfigurationError(VDLError, ValueError):
    """Invalid grid, multiplier, solver or experiment configuration."""


class DomainError(VDLError, ValueError):
    """Input outside the mathematical domain of an operation."""


class DomainEscapeError(VDLError):
    """A particle left the numerical domain during integration."""

    def __init__(self, index, position):
        self.index = index
        self.position = position
        super().__init__(f"particle {index} left the domain at {position!r}")


class NonDiffeomorphismError(VDLError):
    """A sampled flow map lost monotonicity (not a diffeomorphism)."""


class InversionError(VDLError):
    """A path or map could not be inverted on its grid."""


class CompositionError(VDLError):
    """Composition of grid maps lost resolution."""


class StateError(VDLError):
    """Requested data was not recorded (e.g. Jacobians without tracking)."""


class UnsupportedRegimeError(VDLError):
    """Solver asked to run outside the regime it is validated for."""
