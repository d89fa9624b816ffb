"""Asymptotic moment constants for normalized Hecke eigenvalues."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class MomentBounds:
    """Limits of sum a_p^k p^{-s} / log(1/(s-1)) as s -> 1+.

    M2, M3, M4 are exact limits; M6 and M8 are upper bounds.  The defaults
    are the Catalan numbers (Sato-Tate moments) with the odd moment zero.
    """

    M2: float = 1.0
    M3: float = 0.0
    M4: float = 2.0
    M6: float = 5.0
    M8: float = 14.0

    def __post_init__(self):
        if self.M4 <= 0:
            raise ValueError("M4 must be positive")
        if self.M6 <= 0 or self.M8 <= 0:
            raise ValueError("M6 and M8 must be positive")
        if self.M8 < self.M4**2:
            # (M4 - d)^2 < M8 must hold on all of (0, M4)
            raise ValueError("need M8 >= M4^2")

    def expected(self, k: int) -> float:
        return {2: self.M2, 3: self.M3, 4: self.M4, 6: self.M6, 8: self.M8}[k]

    @staticmethod
    def is_upper_bound(k: int) -> bool:
        return k in (6, 8)


DEFAULT_BOUNDS = MomentBounds()
