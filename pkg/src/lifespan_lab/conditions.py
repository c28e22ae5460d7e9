"""Necessary and sufficient solvability conditions at a given T, and life-span
bounds obtained by searching T.

All comparisons are made in log form: a verdict's ``margin`` is the largest
value of log(left side / right side) over the sigma grid, so ``holds`` is
``margin <= 0``. The left sides of the necessary conditions are linear in
kappa and independent of T and p, so they are cached per (profile, sigma) on
a global geometric sigma lattice and reused across a whole T search or
kappa sweep.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Optional

import numpy as np

from .errors import DomainError, InapplicableError, NumericalError, WrongRegimeError
from .problem import ProblemSpec
from .profiles import GaussianGrowth, InitialProfile, SingularLog, log_phi_inverse, log_rho, radially_nonincreasing
from .quadrature import (
    AverageRequest,
    CenterSearchPolicy,
    GaussianDecay,
    NoWeight,
    Orlicz,
    log_integrate_half_ball,
    log_sup_average,
    sup_over_centers,
)

SIGMA_PER_DECADE = 64
SIGMA_SPAN = 1e-8  # the sigma grid reaches at least down to SIGMA_SPAN * sqrt(T)


@dataclass(frozen=True)
class GammaConfig:
    gamma1: float = 1.0
    gamma1p: float = 1.0
    gamma2: float = 1.0
    gamma3: float = 1.0
    gamma4: float = 1.0
    delta: float = 0.5
    a: Optional[float] = None  # None: chosen per problem, see exponent_a

    def __post_init__(self):
        for name in ("gamma1", "gamma1p", "gamma2", "gamma3", "gamma4"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if not 0 < self.delta < 1:
            raise DomainError("delta must lie in (0, 1)")
        if self.a is not None and not self.a > 1:
            raise DomainError("a must exceed 1")

    def scaled(self, factor: float) -> "GammaConfig":
        return dataclasses.replace(
            self,
            gamma1=self.gamma1 * factor,
            gamma1p=self.gamma1p * factor,
            gamma2=self.gamma2 * factor,
            gamma3=self.gamma3 * factor,
            gamma4=self.gamma4 * factor,
        )

    def exponent_a(self, problem: ProblemSpec) -> float:
        """Integrability exponent for the split condition: 1 < a < p and a*A < N."""
        p = float(problem.p)
        a = self.a if self.a is not None else (1 + p) / 2
        if self.a is not None and not a < p:
            raise DomainError(f"a must lie in (1, p); got a={a:g}, p={p:g}")
        prof = problem.profile
        if isinstance(prof, SingularLog) and prof.A > 0:
            cap = problem.N / float(prof.A) * (1 - 1e-6)
            if cap <= 1:
                raise InapplicableError(f"no a in (1, p) with a*A < N for A={float(prof.A):g}, N={problem.N}")
            a = min(a, cap)
        return a

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "GammaConfig":
        return cls(**d)


@dataclass(frozen=True)
class ConditionVerdict:
    holds: bool
    worst_sigma: Optional[float]
    margin: float

    def to_dict(self) -> dict:
        return {"holds": self.holds, "worst_sigma": self.worst_sigma, "margin": _enc(self.margin)}

    @classmethod
    def from_dict(cls, d: dict) -> "ConditionVerdict":
        return cls(bool(d["holds"]), d["worst_sigma"], _dec(d["margin"]))


@dataclass(frozen=True)
class Bound:
    """A life-span bound; ``value`` is None when the search range was exhausted."""

    value: Optional[float]
    status: str  # ok | no-local-solution | unbounded-on-grid | below-grid

    def to_dict(self) -> dict:
        return {"value": self.value, "status": self.status}

    @classmethod
    def from_dict(cls, d: dict) -> "Bound":
        return cls(d["value"], d["status"])


@dataclass(frozen=True)
class LifespanBounds:
    upper: Optional[Bound]
    lower: Optional[Bound]
    gammas: GammaConfig

    def to_dict(self) -> dict:
        return {
            "upper": self.upper.to_dict() if self.upper else None,
            "lower": self.lower.to_dict() if self.lower else None,
            "gammas": self.gammas.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LifespanBounds":
        return cls(
            Bound.from_dict(d["upper"]) if d["upper"] else None,
            Bound.from_dict(d["lower"]) if d["lower"] else None,
            GammaConfig.from_dict(d["gammas"]),
        )


def _enc(x: float):
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def _dec(x) -> float:
    return float(x)


# ---------------------------------------------------------------------------
# sigma grids


def sigma_bottom(T: float) -> float:
    """Lower end of the sigma grid.

    Besides SIGMA_SPAN * sqrt(T) it reaches sigma ~ T, where the critical
    conditions bind for tiny T, and sigma ~ 1, the scale of the profiles,
    where they bind for huge T.
    """
    return min(SIGMA_SPAN * math.sqrt(T), 1e-2 * T, 1e-2)


def sigma_grid(T: float, per_decade: int = SIGMA_PER_DECADE, floor: Optional[float] = None) -> list:
    """Geometric sigma grid on the global lattice 10^(k/per_decade), plus sqrt(T) itself.

    The grid starts at :func:`sigma_bottom` or at ``floor`` if that is smaller.
    """
    top = math.sqrt(T)
    bottom = sigma_bottom(T) if floor is None else min(floor, sigma_bottom(T))
    k_lo = math.ceil(per_decade * math.log10(bottom) - 1e-9)
    k_hi = math.floor(per_decade * math.log10(top) + 1e-9)
    pts = [10.0 ** (k / per_decade) for k in range(k_lo, k_hi + 1)]
    pts = [s for s in pts if s < top * (1 - 1e-12)]
    pts.append(top)
    return pts


def _scan(sigmas: Iterable[float], log_ratio: Callable[[float], float], early_exit: bool) -> ConditionVerdict:
    worst_s, worst = None, -math.inf
    for s in sigmas:
        m = log_ratio(s)
        if math.isnan(m):
            raise NumericalError(f"condition ratio is undefined at sigma={s:g}")
        if worst_s is None or m > worst:
            worst_s, worst = s, m
        if early_exit and m > 0:
            break
    return ConditionVerdict(worst <= 0, worst_s, worst)


# ---------------------------------------------------------------------------
# necessary conditions

_POLICY = CenterSearchPolicy()


@lru_cache(maxsize=500_000)
def _necessary_lhs(profile: InitialProfile, N: int, delta: float, sigma: float) -> float:
    """log sup_x exp(-(1+delta) x_N^2 / 4 sigma^2) * int_{B_+(x, sigma)} psi  (kappa = 1)."""
    beta = (1 + delta) / 4

    def log_obj(x):
        req = AverageRequest(profile, 1.0, x, sigma, N)
        return log_integrate_half_ball(req) - beta * (x / sigma) ** 2

    growing = isinstance(profile, GaussianGrowth)
    reach = profile.support_radius + sigma if math.isfinite(profile.support_radius) else 100.0 * max(1.0, sigma)
    if radially_nonincreasing(profile):
        # by rearrangement B_+(x, sigma) carries at most twice the mass of
        # B_+(0, sigma), so beyond this height the Gaussian factor (< e^-50)
        # rules the centre out
        reach = min(reach, sigma * math.sqrt(200.0 / (1 + delta)))
    kinks = (sigma, profile.support_radius - sigma)
    return sup_over_centers(log_obj, sigma, reach, _POLICY, probe_growth=growing, kinks=kinks).value


def _necessary_floor(T: float) -> float:
    # fixed lower end so that the sigma range only grows with T
    return sigma_bottom(min(T, 1e-12))


def necessary_general(problem: ProblemSpec, T: float, g: GammaConfig = GammaConfig(), sigma_per_decade: int = SIGMA_PER_DECADE, early_exit: bool = False) -> ConditionVerdict:
    """sup_x e^{-(1+delta)x_N^2/4sigma^2} int_{B_+(x,sigma)} kappa psi <= gamma1 sigma^(N - 1/(p-1)) for sigma <= sqrt(T)."""
    if not T > 0:
        raise DomainError("T must be positive")
    log_k = math.log(float(problem.kappa))
    expo = problem.N - 1 / (float(problem.p) - 1)
    log_g = math.log(g.gamma1)

    def log_ratio(s):
        return log_k + _necessary_lhs(problem.profile, problem.N, g.delta, s) - log_g - expo * math.log(s)

    return _scan(sigma_grid(T, sigma_per_decade, _necessary_floor(T)), log_ratio, early_exit)


def necessary_critical(problem: ProblemSpec, T: float, g: GammaConfig = GammaConfig(), sigma_per_decade: int = SIGMA_PER_DECADE, early_exit: bool = False) -> ConditionVerdict:
    """Same left side as :func:`necessary_general`, right side gamma1' [log(e + sqrt(T)/sigma)]^-N; needs p = p_*."""
    if problem.regime_sign() != 0:
        raise WrongRegimeError("the critical necessary condition needs p = 1 + 1/N")
    if not T > 0:
        raise DomainError("T must be positive")
    N = problem.N
    log_k = math.log(float(problem.kappa))
    log_g = math.log(g.gamma1p)
    root = math.sqrt(T)

    def log_ratio(s):
        rhs = log_g - N * math.log(math.log(math.e + root / s))
        return log_k + _necessary_lhs(problem.profile, N, g.delta, s) - rhs

    return _scan(sigma_grid(T, sigma_per_decade, _necessary_floor(T)), log_ratio, early_exit)


def _necessary(problem: ProblemSpec, T: float, g: GammaConfig, sigma_per_decade: int, early_exit: bool) -> ConditionVerdict:
    v = necessary_general(problem, T, g, sigma_per_decade, early_exit)
    if problem.regime_sign() != 0 or (early_exit and not v.holds):
        return v
    c = necessary_critical(problem, T, g, sigma_per_decade, early_exit)
    return v if v.margin >= c.margin else c


# ---------------------------------------------------------------------------
# sufficient conditions


def _log_weighted_far(problem: ProblemSpec, T: float, g: GammaConfig, cutoff, allowed) -> float:
    """log sup_x avg_{B_+(x, sqrt T)} e^{-lambda y_N^2} kappa phi, lambda = (1-delta)/4T."""
    lam = (1 - g.delta) / (4 * T)
    req = AverageRequest(problem.profile, float(problem.kappa), allowed[0], math.sqrt(T), problem.N, GaussianDecay(lam), 1.0, cutoff)
    return log_sup_average(req, _POLICY, allowed).value


def _far_ratio(problem: ProblemSpec, T: float, g: GammaConfig, gamma: float, cutoff, allowed) -> float:
    rhs = math.log(gamma) - math.log(T) / (2 * (float(problem.p) - 1))
    return _log_weighted_far(problem, T, g, cutoff, allowed) - rhs


def sufficient_subcritical(problem: ProblemSpec, T: float, g: GammaConfig = GammaConfig()) -> ConditionVerdict:
    """sup_x avg_{B_+(x, sqrt T)} e^{-lambda y_N^2} kappa psi <= gamma2 T^(-1/(2(p-1))); needs p < p_*."""
    if problem.regime_sign() >= 0:
        raise WrongRegimeError("the subcritical sufficient condition needs p < 1 + 1/N")
    if not T > 0:
        raise DomainError("T must be positive")
    m = _far_ratio(problem, T, g, g.gamma2, None, (0.0, math.inf))
    return ConditionVerdict(m <= 0, math.sqrt(T), m)


def sufficient_split(problem: ProblemSpec, T: float, g: GammaConfig = GammaConfig(), sigma_per_decade: int = SIGMA_PER_DECADE, early_exit: bool = False) -> ConditionVerdict:
    """Far part (x_N >= sqrt T) against gamma3 T^(-1/(2(p-1))) and near part in L^a against gamma3 sigma^(-1/(p-1))."""
    if not T > 0:
        raise DomainError("T must be positive")
    a = g.exponent_a(problem)
    root = math.sqrt(T)
    far = _far_ratio(problem, T, g, g.gamma3, (root, math.inf), (0.0, math.inf))
    if early_exit and far > 0:
        return ConditionVerdict(False, root, far)

    log_k = math.log(float(problem.kappa))
    log_g = math.log(g.gamma3)
    q = 1 / (float(problem.p) - 1)

    def log_ratio(s):
        req = AverageRequest(problem.profile, 1.0, 0.0, s, problem.N, NoWeight(), a, (0.0, root))
        lhs = log_k + log_sup_average(req, _POLICY, (0.0, root)).value / a
        return lhs - (log_g - q * math.log(s))

    near = _scan(reversed(sigma_grid(T, sigma_per_decade)), log_ratio, early_exit)
    if far > near.margin:
        return ConditionVerdict(far <= 0, root, far)
    return near


def sufficient_critical(problem: ProblemSpec, T: float, g: GammaConfig = GammaConfig(), sigma_per_decade: int = SIGMA_PER_DECADE, early_exit: bool = False) -> ConditionVerdict:
    """Far part over centres in x_N >= sqrt T, near part through the Orlicz average; needs p = p_*."""
    if problem.regime_sign() != 0:
        raise WrongRegimeError("the critical sufficient condition needs p = 1 + 1/N")
    if not T > 0:
        raise DomainError("T must be positive")
    N = problem.N
    root = math.sqrt(T)
    far = _far_ratio(problem, T, g, g.gamma4, (root, math.inf), (root, math.inf))
    if early_exit and far > 0:
        return ConditionVerdict(False, root, far)

    scale = T ** (1 / (2 * (float(problem.p) - 1)))
    log_g = math.log(g.gamma4)

    def log_ratio(s):
        req = AverageRequest(problem.profile, float(problem.kappa), 0.0, s, N, Orlicz(scale), 1.0, (0.0, root))
        lhs = log_phi_inverse(log_sup_average(req, _POLICY, (0.0, root)).value, N)
        return lhs - (log_g + log_rho(s / root, N))

    near = _scan(reversed(sigma_grid(T, sigma_per_decade)), log_ratio, early_exit)
    if far > near.margin:
        return ConditionVerdict(far <= 0, root, far)
    return near


def sufficient(problem: ProblemSpec, T: float, g: GammaConfig = GammaConfig(), sigma_per_decade: int = SIGMA_PER_DECADE, early_exit: bool = False) -> ConditionVerdict:
    """The sufficient condition that applies to the problem's regime."""
    sign = problem.regime_sign()
    if sign < 0:
        return sufficient_subcritical(problem, T, g)
    if sign == 0:
        return sufficient_critical(problem, T, g, sigma_per_decade, early_exit)
    return sufficient_split(problem, T, g, sigma_per_decade, early_exit)


def necessary(problem: ProblemSpec, T: float, g: GammaConfig = GammaConfig(), sigma_per_decade: int = SIGMA_PER_DECADE, early_exit: bool = False) -> ConditionVerdict:
    """The general necessary condition, combined with the critical one when p = p_*."""
    return _necessary(problem, T, g, sigma_per_decade, early_exit)


# ---------------------------------------------------------------------------
# bounds


@dataclass(frozen=True)
class TSearch:
    t_min: float = 1e-12
    t_max: float = 1e12
    per_decade: int = 2
    rel_tol: float = 1e-3

    def __post_init__(self):
        if not 0 < self.t_min < self.t_max:
            raise DomainError("need 0 < t_min < t_max")

    def grid(self) -> np.ndarray:
        n = max(2, int(round(self.per_decade * math.log10(self.t_max / self.t_min))) + 1)
        return np.geomspace(self.t_min, self.t_max, n)


def _refine(holds: Callable[[float], bool], good: float, bad: float, rel_tol: float) -> float:
    while bad / good > 1 + rel_tol:
        mid = math.sqrt(good * bad)
        if holds(mid):
            good = mid
        else:
            bad = mid
    return good


def upper_bound_lifespan(problem: ProblemSpec, g: GammaConfig = GammaConfig(), search: TSearch = TSearch(), sigma_per_decade: int = SIGMA_PER_DECADE) -> Bound:
    """Largest T (grid scan, then bisection) at which the necessary condition still holds.

    Failure at the bottom of the grid means no local solution (bound 0).
    """

    def holds(T):
        return _necessary(problem, T, g, sigma_per_decade, early_exit=True).holds

    grid = search.grid()
    for i, T in enumerate(grid):
        if not holds(float(T)):
            if i == 0:
                return Bound(0.0, "no-local-solution")
            return Bound(_refine(holds, float(grid[i - 1]), float(T), search.rel_tol), "ok")
    return Bound(None, "unbounded-on-grid")


def lower_bound_lifespan(problem: ProblemSpec, g: GammaConfig = GammaConfig(), search: TSearch = TSearch(), sigma_per_decade: int = SIGMA_PER_DECADE) -> Bound:
    """Largest T at which the applicable sufficient condition holds (existence is certified on [0, T)).

    The grid is searched by bisection over its indices, which presumes the
    verdict switches from holding to failing once as T grows.
    """

    def holds(T):
        return sufficient(problem, T, g, sigma_per_decade, early_exit=True).holds

    grid = search.grid()
    if not holds(float(grid[0])):
        return Bound(None, "below-grid")
    if holds(float(grid[-1])):
        return Bound(None, "unbounded-on-grid")
    lo, hi = 0, len(grid) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if holds(float(grid[mid])):
            lo = mid
        else:
            hi = mid
    return Bound(_refine(holds, float(grid[lo]), float(grid[hi]), search.rel_tol), "ok")


def lifespan_bounds(problem: ProblemSpec, g: GammaConfig = GammaConfig(), search: TSearch = TSearch(), sigma_per_decade: int = SIGMA_PER_DECADE) -> LifespanBounds:
    upper = upper_bound_lifespan(problem, g, search, sigma_per_decade)
    try:
        lower = lower_bound_lifespan(problem, g, search, sigma_per_decade)
    except InapplicableError:
        lower = None
    return LifespanBounds(upper, lower, g)
