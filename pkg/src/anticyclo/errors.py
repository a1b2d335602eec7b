"""Exception and warning classes raised across the toolkit.

Every computational failure derives from :class:`AnticycloError`, so callers
(and the CLI) can catch one base class and still report the specific name.
"""


class AnticycloError(Exception):
    """Base class for all toolkit errors."""


class PrecisionExhausted(AnticycloError, ArithmeticError):
    pass


class DivisionByZero(AnticycloError, ZeroDivisionError):
    pass


class NotOrdinary(AnticycloError, ValueError):
    pass


class OddPrimeOnly(AnticycloError, ValueError):
    pass


class LevelMismatch(AnticycloError, ValueError):
    pass


class OutOfRange(AnticycloError, ValueError):
    pass


class InsufficientTruncation(AnticycloError, ValueError):
    pass


class OrderTooSmall(AnticycloError, ValueError):
    pass


class NotAlternating(AnticycloError, ValueError):
    pass


class OddDimension(AnticycloError, ValueError):
    pass


class NotSymmetric(AnticycloError, ValueError):
    pass


class BadReduction(AnticycloError, ValueError):
    pass


class AnomalousPrime(AnticycloError, ValueError):
    pass


class ZeroLogarithm(AnticycloError, ValueError):
    pass


class InconsistentDimensions(AnticycloError, ValueError):
    pass


class FiltrationIncomplete(AnticycloError, ValueError):
    pass


class BlockNotIsotropic(AnticycloError, ValueError):
    pass


class EqualRanks(AnticycloError, ValueError):
    pass


class RelationViolated(AnticycloError, ValueError):
    pass


class NonUnitUK(AnticycloError, ValueError):
    pass


class ActionMismatch(AnticycloError, ValueError):
    pass


class NotInvariant(AnticycloError, ValueError):
    pass


class NotSolvable(AnticycloError, ValueError):
    pass


class NonUnitFactors(AnticycloError, ValueError):
    pass


class BadDiscriminant(AnticycloError, ValueError):
    pass


class NonSquareSha(UserWarning):
    """#Sha is not a perfect square, so the square-root formula has no rational value."""


class HasseBoundWarning(UserWarning):
    pass
