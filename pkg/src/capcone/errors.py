"""Exception hierarchy shared by all modules."""


class CapconeError(Exception):
    """Base class for every error raised by the package."""


class InvalidParams(CapconeError, ValueError):
    pass


class InvalidPair(InvalidParams):
    pass


class OutOfDomain(CapconeError, ValueError):
    pass


class NonConvergence(CapconeError, ArithmeticError):
    pass


class NumericalFailure(CapconeError, ArithmeticError):
    pass


class SingularTime(NumericalFailure):
    pass


class NoZero(CapconeError):
    pass


class NotReachingZero(CapconeError):
    pass


class AmbiguousNearLawson(CapconeError):
    pass


class ConditionFailed(CapconeError):
    pass


class NoTau(CapconeError):
    pass


class WrongSide(CapconeError, ValueError):
    pass
