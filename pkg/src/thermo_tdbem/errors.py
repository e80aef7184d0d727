"""Exception types raised by the solver.

Every numerical failure derives from ``NumericalError`` so that callers (and
the command line front end) can tell bad input apart from a breakdown of the
numerics.
"""


class ThermoError(Exception):
    """Base class for all package errors."""


class ValidationError(ThermoError, ValueError):
    """Input rejected before any numerics ran."""


class NumericalError(ThermoError, ArithmeticError):
    """A computation broke down."""


class ConstraintViolation(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class BadResolution(ValidationError):
    pass


class BadNormal(ValidationError):
    pass


class MissingNormal(ValidationError):
    pass


class TagMismatch(ValidationError):
    pass


class PointTooClose(ValidationError):
    pass


class CoincidentPoints(ValidationError):
    pass


class ConfluentRoots(NumericalError):
    pass


class BranchError(NumericalError):
    pass


class AssemblyOverflow(NumericalError):
    pass


class SingularMatrix(NumericalError):
    pass


class ExtrapolationDiverged(NumericalError):
    pass


class QuadratureInsufficient(NumericalError):
    pass


class SymbolEvaluationFailed(NumericalError):
    def __init__(self, index, s, cause):
        super().__init__(f"symbol evaluation failed at frequency {index} (s={s}): {cause}")
        self.index = index
        self.s = s
        self.cause = cause
