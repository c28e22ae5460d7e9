"""Initial-data families and the Orlicz-type special functions.

Profiles are frozen dataclasses so they can key caches. Parameters may be
exact ``Fraction`` values (the CLI parses them that way) so that boundary
cases of the life-span case analysis dispatch exactly; all numerical work
converts to float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

import numpy as np
from scipy import integrate, optimize, special

from ._numeric import (
    check_accuracy,
    compare,
    format_number,
    log1pexp,
    log_log_e_plus_inv,
    parse_number,
    quad_radial,
)
from .errors import DomainError, RangeError

Number = Union[int, float, Fraction]


@dataclass(frozen=True)
class SingularLog:
    """|x|^-A [log(e + 1/|x|)]^-B on the unit half-ball, zero outside."""

    A: Number
    B: Number

    radial = True
    support_radius = 1.0

    def log_radial(self, logr: float) -> float:
        if logr >= 0.0:
            return -math.inf
        return -float(self.A) * logr - float(self.B) * log_log_e_plus_inv(logr)

    def logpsi(self, logr: float, y_n: float) -> float:
        return self.log_radial(logr)

    def spec(self) -> str:
        return f"singular-log:A={format_number(self.A)},B={format_number(self.B)}"


@dataclass(frozen=True)
class PowerDecay:
    """(1 + |x|)^-A."""

    A: Number

    radial = True
    support_radius = math.inf

    def log_radial(self, logr: float) -> float:
        return -float(self.A) * log1pexp(logr)

    def logpsi(self, logr: float, y_n: float) -> float:
        return self.log_radial(logr)

    def spec(self) -> str:
        return f"power-decay:A={format_number(self.A)}"


@dataclass(frozen=True)
class GaussianGrowth:
    """exp(lambda x_N^2)."""

    lam: Number

    radial = False
    support_radius = math.inf

    def logpsi(self, logr: float, y_n: float) -> float:
        return float(self.lam) * y_n * y_n

    def spec(self) -> str:
        return f"gaussian-growth:lambda={format_number(self.lam)}"


@dataclass(frozen=True)
class Constant:
    c: Number

    radial = True
    support_radius = math.inf

    def log_radial(self, logr: float) -> float:
        return math.log(float(self.c)) if self.c > 0 else -math.inf

    def logpsi(self, logr: float, y_n: float) -> float:
        return self.log_radial(logr)

    def spec(self) -> str:
        return f"constant:c={format_number(self.c)}"


InitialProfile = Union[SingularLog, PowerDecay, GaussianGrowth, Constant]

_GRAMMAR = {
    "singular-log": (SingularLog, ("A", "B")),
    "power-decay": (PowerDecay, ("A",)),
    "gaussian-growth": (GaussianGrowth, ("lambda",)),
    "constant": (Constant, ("c",)),
}


def parse_profile(text: str) -> InitialProfile:
    """Parse ``singular-log:A=1/2,B=0`` style specifications."""
    kind, _, rest = text.strip().partition(":")
    if kind not in _GRAMMAR:
        raise ValueError(f"unknown profile family {kind!r}; expected one of {sorted(_GRAMMAR)}")
    cls, names = _GRAMMAR[kind]
    values = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq or key.strip() not in names:
            raise ValueError(f"profile {kind!r}: bad parameter {item!r}; expected {', '.join(names)}")
        try:
            values[key.strip()] = parse_number(val)
        except ValueError as exc:
            raise ValueError(f"profile {kind!r}: parameter {key.strip()!r}: {exc}") from None
    missing = [n for n in names if n not in values]
    if missing:
        raise ValueError(f"profile {kind!r}: missing parameter(s) {', '.join(missing)}")
    args = [values[n] for n in names]
    if cls is PowerDecay and not args[0] > 0:
        raise ValueError("profile 'power-decay': A must be positive")
    if cls is GaussianGrowth and not args[0] > 0:
        raise ValueError("profile 'gaussian-growth': lambda must be positive")
    if cls is Constant and not args[0] > 0:
        raise ValueError("profile 'constant': c must be positive")
    return cls(*args)


def admissible(profile: InitialProfile, N: int) -> bool:
    """Local integrability range for the singular-log family; other families always pass."""
    if not isinstance(profile, SingularLog):
        return True
    A, B = profile.A, profile.B
    if compare(A, 0) < 0 or compare(A, N) > 0:
        return False
    if compare(A, 0) == 0:
        return compare(B, 0) > 0
    if compare(A, N) == 0:
        return compare(B, 1) > 0
    return True


@lru_cache(maxsize=1024)
def radially_nonincreasing(profile: InitialProfile) -> bool:
    """Whether psi is a nonincreasing function of |x| (so balls at the origin carry the most mass)."""
    if isinstance(profile, (Constant, PowerDecay)):
        return True
    if isinstance(profile, GaussianGrowth):
        return False
    if compare(profile.B, 0) <= 0:
        return compare(profile.A, 0) >= 0
    # d/dl log psi = -A + B / ((e r + 1) log(e + 1/r)) on 0 < r < 1
    logr = np.linspace(-700.0, 0.0, 20001)
    r = np.exp(logr)
    slope = -float(profile.A) + float(profile.B) / ((math.e * r + 1) * np.log(math.e + 1 / np.maximum(r, 1e-300)))
    return bool(np.all(slope <= 0))


def _radius_and_height(x) -> tuple[float, float]:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    return float(np.linalg.norm(arr)), float(arr[-1])


def eval_profile(profile: InitialProfile, x) -> float:
    r, y_n = _radius_and_height(x)
    if y_n < 0:
        raise DomainError("point lies outside the closed half-space")
    if isinstance(profile, GaussianGrowth):
        return math.exp(float(profile.lam) * y_n * y_n)
    if r == 0.0:
        if isinstance(profile, SingularLog):
            if compare(profile.A, 0) > 0:
                return math.inf
            return 0.0 if compare(profile.B, 0) > 0 else 1.0
        return math.exp(profile.log_radial(-math.inf))
    return math.exp(profile.log_radial(math.log(r)))


# ---------------------------------------------------------------------------
# Orlicz function and friends


def phi_orlicz(s: float, N: int) -> float:
    if s < 0:
        raise DomainError("phi_orlicz needs s >= 0")
    return s * math.log(math.e + s) ** N


def log_phi_orlicz(log_s: float, N: int) -> float:
    """log Phi(e^log_s), finite for very large or very small arguments."""
    return log_s + N * math.log(float(np.logaddexp(1.0, log_s)))


def rho(s: float, N: int) -> float:
    if not s > 0:
        raise DomainError("rho needs s > 0")
    return s ** (-N) * math.log(math.e + 1.0 / s) ** (-N)


def phi_inverse(tau: float, N: int) -> float:
    """Unique s >= 0 with Phi(s) = tau."""
    if tau < 0:
        raise DomainError("phi_inverse needs tau >= 0")
    if tau == 0:
        return 0.0
    # Phi(s) >= s, and s <= tau gives Phi(s) <= s log(e + tau)^N
    lo = tau / math.log(math.e + tau) ** N
    hi = tau
    if lo == hi:
        return lo
    log_tau = math.log(tau)
    return math.exp(
        optimize.brentq(
            lambda l: log_phi_orlicz(l, N) - log_tau,
            math.log(lo) - 1e-12,
            math.log(hi) + 1e-12,
            xtol=1e-15,
            rtol=4 * np.finfo(float).eps,
        )
    )


def log_phi_inverse(log_tau: float, N: int) -> float:
    """log of Phi^{-1}(e^log_tau)."""
    if log_tau == -math.inf:
        return -math.inf
    if log_tau == math.inf:
        return math.inf
    hi = log_tau
    lo = log_tau - N * math.log(float(np.logaddexp(1.0, log_tau)))
    if hi - lo < 1e-15:
        return lo
    return optimize.brentq(lambda l: log_phi_orlicz(l, N) - log_tau, lo - 1e-12, hi + 1e-12, xtol=1e-14, rtol=4 * np.finfo(float).eps)


def log_rho(s: float, N: int) -> float:
    if not s > 0:
        raise DomainError("rho needs s > 0")
    return -N * math.log(s) - N * log_log_e_plus_inv(math.log(s))


@dataclass(frozen=True)
class PowerLogSpec:
    """tau^a1 [log(e + 1/tau)]^a2 with a1 > 0."""

    a1: float
    a2: float

    def __post_init__(self):
        if not self.a1 > 0:
            raise DomainError("PowerLogSpec needs a1 > 0")


def _log_psi(log_tau: float, spec: PowerLogSpec) -> float:
    return spec.a1 * log_tau + spec.a2 * log_log_e_plus_inv(log_tau)


def psi_power_log(tau: float, spec: PowerLogSpec) -> float:
    if not tau > 0:
        raise DomainError("psi_power_log needs tau > 0")
    return math.exp(_log_psi(math.log(tau), spec))


@lru_cache(maxsize=256)
def psi_monotone_range(spec: PowerLogSpec) -> float:
    """Right end of the increasing branch that starts at tau = 0+.

    Scans log Psi on a geometric grid and stops at the first non-positive
    finite-difference slope; returns ``inf`` when no sign change is found.
    """
    grid = np.linspace(-300.0, 300.0, 12001) * math.log(10.0)
    values = np.array([_log_psi(l, spec) for l in grid])
    slope = np.diff(values)
    bad = np.nonzero(slope <= 0)[0]
    if bad.size == 0:
        return math.inf
    return float(math.exp(grid[bad[0]]))


def psi_inverse(tau: float, spec: PowerLogSpec) -> float:
    """Solve Psi(s) = tau on the increasing branch near the origin."""
    if not tau > 0:
        raise DomainError("psi_inverse needs tau > 0")
    top = psi_monotone_range(spec)
    log_top = math.log(top) if math.isfinite(top) else 300.0 * math.log(10.0)
    log_tau = math.log(tau)
    f = lambda l: _log_psi(l, spec) - log_tau  # noqa: E731
    if f(log_top) < 0:
        raise RangeError(f"tau={tau:g} lies beyond the monotone range of Psi (max {math.exp(_log_psi(log_top, spec)):g})")
    lo = -300.0 * math.log(10.0)
    while f(lo) > 0:
        lo *= 2
        if lo < -1e6:
            raise RangeError(f"tau={tau:g} is below the representable range of Psi")
    return math.exp(optimize.brentq(f, lo, log_top, xtol=1e-15, rtol=4 * np.finfo(float).eps))


# ---------------------------------------------------------------------------
# masses


def unit_ball_volume(N: int) -> float:
    return math.pi ** (N / 2) / math.gamma(N / 2 + 1)


def origin_integrable(profile: InitialProfile, N: int, power: float = 1.0, log_shift: float = 0.0) -> bool:
    """Whether ``psi^power`` (times ``log(1/r)^log_shift``) is integrable near the origin in R^N."""
    if not isinstance(profile, SingularLog):
        return True
    a = power * float(profile.A)
    b = power * float(profile.B) - log_shift
    if a < N:
        return True
    if a > N:
        return False
    return b > 1


def half_ball_mass(profile: InitialProfile, sigma: float, N: int) -> float:
    """Integral of psi over B_+(0, sigma); ``inf`` when psi is not integrable at 0."""
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    V = unit_ball_volume(N)
    if isinstance(profile, Constant):
        return float(profile.c) * V * sigma**N / 2
    if isinstance(profile, GaussianGrowth):
        lam = float(profile.lam)
        Vm = unit_ball_volume(N - 1)
        if N == 1:
            # int_0^sigma exp(lam h^2) dh
            return math.sqrt(math.pi / (4 * lam)) * float(special.erfi(math.sqrt(lam) * sigma))
        v, _ = integrate.quad(lambda h: math.exp(lam * h * h) * Vm * (sigma * sigma - h * h) ** ((N - 1) / 2), 0.0, sigma, epsrel=1e-12)
        return v
    if not origin_integrable(profile, N):
        return math.inf
    hi = min(sigma, profile.support_radius)
    value, err = quad_radial(lambda l: profile.log_radial(l) + (N - 1) * l, 0.0, hi)
    check_accuracy(value, err, "half_ball_mass")
    return 0.5 * N * V * value
