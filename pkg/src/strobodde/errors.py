"""Exception hierarchy for strobodde."""


class AveragingError(Exception):
    """Base class for all errors raised by this package."""


# problem definition
class NonStroboscopic(AveragingError, ValueError):
    """The delay is not an integer multiple of the forcing period."""


class EmptyModeSet(AveragingError, ValueError):
    pass


class DimensionMismatch(AveragingError, ValueError):
    pass


class InvalidParameters(AveragingError, ValueError):
    pass


class RealnessViolation(AveragingError, ArithmeticError):
    """A quantity that must be real has a non-negligible imaginary part."""


class MissingHistoryDerivative(AveragingError, ValueError):
    pass


# integration
class StepSizeUnderflow(AveragingError, RuntimeError):
    pass


class MaxStepsExceeded(AveragingError, RuntimeError):
    pass


class OutOfSpan(AveragingError, ValueError):
    pass


class HistoryEvaluationOutOfRange(AveragingError, ValueError):
    pass


# segmentation
class ContinuityViolation(AveragingError, ValueError):
    pass


# word series
class UnrepresentedLetter(AveragingError, KeyError):
    pass


class DepthExceeded(AveragingError, ValueError):
    pass


# harness
class ConfigError(AveragingError, ValueError):
    pass
