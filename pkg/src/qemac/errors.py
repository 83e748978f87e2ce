"""Exception hierarchy shared by all qemac modules."""

from __future__ import annotations


class QemacError(Exception):
    """Base class for every error raised by this package."""


# field / linear algebra
class NonPrimeCharacteristic(QemacError, ValueError):
    pass


class UnsupportedSize(QemacError, ValueError):
    pass


class NotFullColumnRank(QemacError, ValueError):
    pass


class Infeasible(QemacError):
    """A linear system, dimension plan or parameter set admits no solution."""


class FieldTooSmall(QemacError, ValueError):
    pass


class ShapeMismatch(QemacError, ValueError):
    pass


# N-sum box
class NotSSO(QemacError, ValueError):
    pass


class RetryExhausted(QemacError):
    """A seeded sample-and-verify loop ran out of attempts."""


class IndexOutOfRange(QemacError, IndexError):
    pass


# schemes
class UnknownServer(QemacError, KeyError):
    pass


class WrongBlockLength(QemacError, ValueError):
    pass


class InvalidPattern(QemacError, IndexError):
    pass


class LengthMismatch(QemacError, ValueError):
    pass


class InfeasibleParameters(QemacError, ValueError):
    pass


# dense oracle
class TooLarge(QemacError, ValueError):
    pass


class EvenCharacteristicUnsupported(QemacError, ValueError):
    pass


class PhaseInconsistency(QemacError):
    """Weyl phases failed to make the restricted operators an abelian group."""


class DimensionMismatch(QemacError, ValueError):
    pass


class WitnessRejected(QemacError, ValueError):
    """A user-supplied witness matrix fails the property it must certify."""
