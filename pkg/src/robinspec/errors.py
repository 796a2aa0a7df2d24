"""Exception types shared across the package."""


class RobinSpecError(Exception):
    """Base class for all package errors."""


# geometry
class NonRegularCurve(RobinSpecError, ValueError):
    pass


class NotClosed(RobinSpecError, ValueError):
    pass


class DegenerateMaximum(RobinSpecError, ValueError):
    pass


class MultipleMaxima(RobinSpecError, ValueError):
    pass


# spectral basis / corrections
class NotOrthogonal(RobinSpecError, ArithmeticError):
    pass


class InternalSolvabilityFailure(RobinSpecError, RuntimeError):
    pass


class JetTooShort(RobinSpecError, ValueError):
    pass


# model1d
class NoRoot(RobinSpecError, ValueError):
    pass


class WeightNotPositive(RobinSpecError, ValueError):
    pass


# expansion
class MissingCoefficients(RobinSpecError, ValueError):
    pass


# wkb
class EikonalNotSolvable(RobinSpecError, ValueError):
    pass


class OrderUnavailable(RobinSpecError, ValueError):
    pass


# solvers
class ResolutionTooLow(RobinSpecError, RuntimeError):
    pass


class CollarTooDeep(RobinSpecError, ValueError):
    pass


class TruncationSuspect(RobinSpecError, RuntimeError):
    pass


class BracketFailure(RobinSpecError, RuntimeError):
    pass


class NotConverged(RobinSpecError, RuntimeError):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


# harness
class InsufficientPoints(RobinSpecError, ValueError):
    pass


class IoFailure(RobinSpecError, OSError):
    pass


class TurningNumberError(RobinSpecError, ValueError):
    pass


class NonNegativeGamma(RobinSpecError, ValueError):
    pass
