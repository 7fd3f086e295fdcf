from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidPair


@dataclass(frozen=True)
class ConePair:
    """Dimension pair (n, k) of an O(n-k) x O(k)-invariant cone in R^{n+1}_+."""

    n: int
    k: int

    def __post_init__(self) -> None:
        if int(self.n) != self.n or int(self.k) != self.k:
            raise InvalidPair(f"n and k must be integers, got ({self.n}, {self.k})")
        if self.n < 3:
            raise InvalidPair(f"n must be >= 3, got {self.n}")
        if not 1 <= self.k <= self.n - 2:
            raise InvalidPair(f"k must satisfy 1 <= k <= n-2, got (n, k) = ({self.n}, {self.k})")

    @property
    def alpha(self) -> float:
        """(k-1)/(n-2); A(t) vanishes at sqrt(alpha)."""
        return (self.k - 1) / (self.n - 2)

    @property
    def a_star(self) -> float:
        """Initial height of the Lawson profile."""
        return math.sqrt(self.k / (self.n - self.k - 1))

    @property
    def lawson_zero(self) -> float:
        return math.sqrt(self.k / (self.n - 1))

    def A(self, t):
        return t - self.alpha / t
