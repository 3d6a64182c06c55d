"""Exception types shared across the package."""


class QMHeckeError(Exception):
    """Base class for domain errors."""


class NotPositiveDet(QMHeckeError, ValueError):
    pass


class GuardExceeded(QMHeckeError, RuntimeError):
    """An enumeration would exceed the configured size bound."""


class OddWeight(QMHeckeError, ValueError):
    pass


class UnknownTransformation(QMHeckeError, ValueError):
    """A raw expansion cannot be slashed by a matrix outside its group."""


class NotDecomposable(QMHeckeError, ValueError):
    pass


class InsufficientPrecision(QMHeckeError, ValueError):
    pass


class LevelMismatch(QMHeckeError, ValueError):
    pass


class TwistMismatch(QMHeckeError, ValueError):
    pass


class CovarianceViolation(QMHeckeError, ValueError):
    pass


class DepthNotZero(QMHeckeError, ValueError):
    pass


class NotUnimodular(QMHeckeError, ValueError):
    pass


class NonCommutingTwists(QMHeckeError, ValueError):
    pass


class UnknownGenerator(QMHeckeError, KeyError):
    pass


class MissingInterpretation(QMHeckeError, KeyError):
    pass


class ParseError(QMHeckeError, ValueError):
    pass
