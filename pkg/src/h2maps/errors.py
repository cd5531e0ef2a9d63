"""Exception types shared across the package."""


class InvariantError(ValueError):
    """An algebraic invariant (su(1,1) form, hyperboloid, SU(1,1)) is violated."""


class SheetError(InvariantError):
    """A spin field lies on the wrong sheet of the hyperboloid for the operation."""


class ConeExitError(ArithmeticError):
    """A spin vector left the timelike cone, so it cannot be projected back."""

    def __init__(self, message, node=None, step=None):
        super().__init__(message)
        self.node = node
        self.step = step


class BlowupTimeError(ValueError):
    """Evaluation requested at or beyond the blow-up time of an explicit solution."""


class ParameterSignError(ValueError):
    """Blow-up parameters violate ``a * b < 0``."""


class AmplitudeError(ValueError):
    """Blow-up amplitude violates ``alpha**2 == b**2 / 16``."""


class AdmissibilityError(ValueError):
    """Gauge fields violate the compatibility constraints beyond tolerance."""


class ProjectionError(ArithmeticError):
    """A retraction onto a constraint set needed a correction that was too large."""


class ConfigError(ValueError):
    """Invalid run or stepper configuration."""
