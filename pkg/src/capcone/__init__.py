"""Capillary cones: profile ODE, shooting, barrier certificates and free-boundary kernels."""
from .errors import (AmbiguousNearLawson, CapconeError, ConditionFailed, InvalidPair, InvalidParams,
                     NoTau, NonConvergence, NotReachingZero, NoZero, NumericalFailure, OutOfDomain,
                     SingularTime, WrongSide)
from .pair import ConePair

__all__ = [
    "ConePair", "CapconeError", "InvalidParams", "InvalidPair", "OutOfDomain", "NonConvergence",
    "NumericalFailure", "SingularTime", "NoZero", "NotReachingZero", "AmbiguousNearLawson",
    "ConditionFailed", "NoTau", "WrongSide",
]
