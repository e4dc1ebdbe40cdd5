"""Exception hierarchy shared by every module of the package."""


class AlignedSMMError(Exception):
    """Base class for all errors raised by aligned_smm."""


class PreconditionError(AlignedSMMError, ValueError):
    pass


class MismatchedField(PreconditionError):
    pass


class InversionOfZero(AlignedSMMError, ZeroDivisionError):
    pass


class DimensionMismatch(PreconditionError):
    pass


class DuplicateEvaluationPoint(PreconditionError):
    pass


# the decoder reports repeated answer points with the same class
DuplicatePoint = DuplicateEvaluationPoint


class InsufficientSamples(PreconditionError):
    pass


class DivisibilityViolation(PreconditionError):
    pass


class InfeasiblePartition(PreconditionError):
    """Raised when a partition needs more servers than are available (Q > N)."""


class TooFewAnswers(AlignedSMMError):
    """Fewer distinct answers than the recovery threshold were supplied."""


class NoFeasiblePartition(PreconditionError):
    pass


class InfeasibleRateThreshold(PreconditionError):
    pass


class NoSatisfyingRA(AlignedSMMError):
    """No partition count for A reaches the requested rate for the given r_B."""


class ParameterBoxTooLarge(PreconditionError):
    pass


class DecodeMismatch(AlignedSMMError):
    pass
