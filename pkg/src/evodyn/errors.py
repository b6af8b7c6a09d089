"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Invalid user-supplied input (bad probability vector, unknown mode, ...)."""


class NumericalError(RuntimeError):
    """Non-finite values or other numerical breakdown during integration."""


class BoundaryPointError(ValidationError):
    """A strictly interior strategy point was required."""


class NoInternalEquilibriumError(ValidationError):
    """The game has no internal equilibrium but one was required."""


class OutputError(RuntimeError):
    """Output destination could not be written."""


class NonProductStateError(ValidationError):
    """A joint quantum state was required to factor into a tensor product."""
