"""Exception and warning types raised across the package."""


class InvalidArgument(ValueError):
    pass


class ClosureViolation(ValueError):
    """Curvature data whose tangent integral does not close up."""


class ConvexityError(ValueError):
    """Radius of curvature is not strictly positive."""


class NumericalFailure(RuntimeError):
    """An iterative solver did not reach its tolerance."""

    def __init__(self, message: str, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class DegenerateOrbit(RuntimeError):
    """Impact points merged or the critical point is not a strict maximum."""


class NotContractive(RuntimeError):
    """The truncated operator is too far from the identity to invert by Neumann series."""


class AsymptoticsMismatchWarning(RuntimeWarning):
    pass


class TailTooLargeWarning(RuntimeWarning):
    pass


class IllConditionedWarning(RuntimeWarning):
    pass
