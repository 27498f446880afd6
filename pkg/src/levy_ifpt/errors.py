"""Exception hierarchy.

Errors split into two families so front ends can map them to exit codes:
``ValidationError`` for bad inputs and violated preconditions, and
``NumericalError`` for failures of an algorithm on otherwise valid input.
"""


class LevyIfptError(Exception):
    pass


class ValidationError(LevyIfptError, ValueError):
    pass


class NumericalError(LevyIfptError, ArithmeticError):
    pass


class PoleEvaluation(ValidationError):
    """Exponent evaluated at (or numerically on top of) one of its poles."""


class NotNegativeDrift(ValidationError):
    """psi'(0) >= 0, so the killed process has no quasi-invariant law."""


class OutOfRange(ValidationError):
    pass


class LambdaExceedsStar(OutOfRange):
    pass


class MomentCondition(ValidationError):
    """An exponential moment needed by a transform is infinite."""


class ConfigError(ValidationError):
    pass


class RepeatedRoots(NumericalError):
    pass


class DegenerateModel(NumericalError):
    pass


class QuadratureFailure(NumericalError):
    pass


class InversionFailure(NumericalError):
    pass


class InsufficientPaths(NumericalError):
    pass


class EmptySample(NumericalError):
    pass
