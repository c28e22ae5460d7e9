"""Closed-form life-span asymptotics as a decision function of (N, p, profile, regime).

Case boundaries (p = p_*, A = N, A = 1/(p-1), B = N+1, B = 0) are decided by
exact rational comparison when the inputs are rationals and with a 1e-12
tolerance otherwise.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from ._numeric import compare, format_number, is_exact, parse_number
from .errors import AdmissibilityError, InapplicableError
from .problem import critical_exponent
from .profiles import Constant, GaussianGrowth, InitialProfile, PowerDecay, SingularLog, admissible


class Regime(enum.Enum):
    LARGE_KAPPA = "large-kappa"
    SMALL_KAPPA = "small-kappa"

    @classmethod
    def parse(cls, text: str) -> "Regime":
        try:
            return cls(text)
        except ValueError:
            raise ValueError(f"unknown regime {text!r}; expected large-kappa or small-kappa") from None


@dataclass(frozen=True)
class PowerLaw:
    """T ~ kappa^e."""

    e: object

    def spec(self) -> str:
        return f"power:e={format_number(self.e)}"


@dataclass(frozen=True)
class PowerLogLaw:
    """T ~ [kappa (log kappa)^-q]^e."""

    e: object
    q: object

    def spec(self) -> str:
        return f"power-log:e={format_number(self.e)},q={format_number(self.q)}"


@dataclass(frozen=True)
class LogLifespanLarge:
    """|log T| ~ kappa^r as kappa -> infinity."""

    r: object

    def spec(self) -> str:
        return f"loglife-large:r={format_number(self.r)}"


@dataclass(frozen=True)
class LogLifespanSmall:
    """log T ~ kappa^-r as kappa -> 0."""

    r: object

    def spec(self) -> str:
        return f"loglife-small:r={format_number(self.r)}"


@dataclass(frozen=True)
class PowerOverLogSmall:
    """T ~ (kappa^-1 / log kappa^-1)^e as kappa -> 0."""

    e: object

    def spec(self) -> str:
        return f"power-over-log:e={format_number(self.e)}"


@dataclass(frozen=True)
class FiniteLimit:
    value: object

    def spec(self) -> str:
        return f"finite-limit:T={format_number(self.value)}"


@dataclass(frozen=True)
class NoLocalSolutionAllKappa:
    def spec(self) -> str:
        return "no-local:all"


@dataclass(frozen=True)
class NoLocalSolutionLargeKappa:
    def spec(self) -> str:
        return "no-local:large-kappa"


@dataclass(frozen=True)
class GlobalForSmallKappa:
    def spec(self) -> str:
        return "global:small-kappa"


ScalingLaw = Union[
    PowerLaw,
    PowerLogLaw,
    LogLifespanLarge,
    LogLifespanSmall,
    PowerOverLogSmall,
    FiniteLimit,
    NoLocalSolutionAllKappa,
    NoLocalSolutionLargeKappa,
    GlobalForSmallKappa,
]

_BY_TAG = {
    "power": (PowerLaw, ("e",)),
    "power-log": (PowerLogLaw, ("e", "q")),
    "loglife-large": (LogLifespanLarge, ("r",)),
    "loglife-small": (LogLifespanSmall, ("r",)),
    "power-over-log": (PowerOverLogSmall, ("e",)),
    "finite-limit": (FiniteLimit, ("T",)),
}
_SINGLETONS = {
    "no-local:all": NoLocalSolutionAllKappa(),
    "no-local:large-kappa": NoLocalSolutionLargeKappa(),
    "global:small-kappa": GlobalForSmallKappa(),
}


def parse_law(text: str) -> ScalingLaw:
    """Inverse of ``law.spec()``."""
    text = text.strip()
    if text in _SINGLETONS:
        return _SINGLETONS[text]
    tag, _, rest = text.partition(":")
    if tag not in _BY_TAG:
        raise ValueError(f"unknown scaling law {text!r}")
    cls, names = _BY_TAG[tag]
    fields = dict(item.split("=", 1) for item in rest.split(",") if item)
    if sorted(fields) != sorted(names):
        raise ValueError(f"scaling law {text!r}: expected fields {', '.join(names)}")
    return cls(*(parse_number(fields[n]) for n in names))


def _exact(x):
    """Keep rationals exact; floats stay floats."""
    return Fraction(x) if is_exact(x) else float(x)


def _singular_exponent(p, A):
    # -2(p-1) / (-A(p-1) + 1)
    return -2 * (p - 1) / (1 - A * (p - 1))


def _decay_exponent(p, m):
    # -(1/(2(p-1)) - m/2)^-1
    return -1 / (1 / (2 * (p - 1)) - _exact(m) / 2)


def _power_log(e, q) -> ScalingLaw:
    return PowerLaw(e) if compare(q, 0) == 0 else PowerLogLaw(e, q)


def _singular_large(N: int, p, A, B) -> ScalingLaw:
    ps = critical_exponent(N)
    inv = 1 / (p - 1)
    c_p = compare(p, ps)
    if c_p < 0:
        if compare(A, N) < 0:
            return _power_log(_singular_exponent(p, A), B)
        # A = N; admissibility already forces B > 1
        return PowerLogLaw(_singular_exponent(p, A), B - 1)
    if c_p > 0:
        c_a = compare(A, inv)
        if c_a < 0:
            return _power_log(_singular_exponent(p, A), B)
        if c_a > 0:
            return NoLocalSolutionAllKappa()
        c_b = compare(B, 0)
        if c_b > 0:
            return LogLifespanLarge(1 / B)
        return NoLocalSolutionLargeKappa() if c_b == 0 else NoLocalSolutionAllKappa()
    # p = p_*, where 1/(p-1) = N
    if compare(A, N) < 0:
        return _power_log(_singular_exponent(p, A), B)
    c_b = compare(B, N + 1)
    if c_b > 0:
        return LogLifespanLarge(1 / (B - N - 1))
    return NoLocalSolutionLargeKappa() if c_b == 0 else NoLocalSolutionAllKappa()


def _decay_small(N: int, p, A) -> ScalingLaw:
    ps = critical_exponent(N)
    c_p = compare(p, ps)
    if c_p < 0:
        if compare(A, N) == 0:
            return PowerOverLogSmall(-_decay_exponent(p, N))
        m = A if compare(A, N) < 0 else N
        return PowerLaw(_decay_exponent(p, m))
    if c_p == 0:
        c_a = compare(A, N)
        if c_a < 0:
            return PowerLaw(_decay_exponent(p, A))
        return LogLifespanSmall((p - 1) / p if c_a == 0 else p - 1)
    if compare(A, 1 / (p - 1)) < 0:
        return PowerLaw(_decay_exponent(p, A))
    return GlobalForSmallKappa()


def predict(N: int, p, profile: InitialProfile, regime: Regime) -> ScalingLaw:
    """Asymptotic life-span law for data kappa * profile in the given kappa regime."""
    p = _exact(p)
    if isinstance(profile, Constant):
        # u_kappa(x, t) = kappa u(kappa^(p-1) x, kappa^(2(p-1)) t) for constant data
        return PowerLaw(-2 * (p - 1))
    if isinstance(profile, SingularLog) and regime is Regime.LARGE_KAPPA:
        if not admissible(profile, N):
            raise AdmissibilityError(f"{profile.spec()} is not locally integrable in dimension N={N}")
        return _singular_large(N, p, _exact(profile.A), _exact(profile.B))
    if isinstance(profile, PowerDecay) and regime is Regime.SMALL_KAPPA:
        return _decay_small(N, p, _exact(profile.A))
    if isinstance(profile, GaussianGrowth) and regime is Regime.SMALL_KAPPA:
        return FiniteLimit(1 / (4 * _exact(profile.lam)))
    raise InapplicableError(f"no prediction for {profile.spec()} in the {regime.value} regime")


def exponent_of(law: ScalingLaw) -> Optional[float]:
    """The slope a sweep fit should recover, in the law's own coordinates."""
    if isinstance(law, (PowerLaw, PowerLogLaw, PowerOverLogSmall)):
        return float(law.e)
    if isinstance(law, (LogLifespanLarge, LogLifespanSmall)):
        return float(law.r)
    return None
