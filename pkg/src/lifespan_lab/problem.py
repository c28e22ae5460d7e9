"""Problem instances: dimension, exponent, amplitude and initial profile."""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from ._numeric import compare, format_number
from .errors import AdmissibilityError, DomainError
from .profiles import InitialProfile, admissible


def critical_exponent(N: int) -> Fraction:
    return 1 + Fraction(1, N)


@dataclass(frozen=True)
class ProblemSpec:
    N: int
    p: object
    kappa: object
    profile: InitialProfile

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"N must be a positive integer, got {self.N!r}")
        if not self.p > 1:
            raise DomainError(f"p must exceed 1, got {format_number(self.p)}")
        if not self.kappa > 0:
            raise DomainError(f"kappa must be positive, got {format_number(self.kappa)}")
        if not admissible(self.profile, self.N):
            raise AdmissibilityError(f"{self.profile.spec()} is not locally integrable in dimension N={self.N}")

    @property
    def p_star(self) -> Fraction:
        return critical_exponent(self.N)

    def regime_sign(self) -> int:
        """-1, 0, +1 for p below, at, above the critical exponent."""
        return compare(self.p, self.p_star)

    def with_kappa(self, kappa) -> "ProblemSpec":
        return replace(self, kappa=kappa)
