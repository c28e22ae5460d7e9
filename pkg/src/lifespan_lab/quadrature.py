"""Integrals and averages over half-balls B_+(x, sigma), and suprema over centres.

Centres are restricted to the x_N-axis: the profiles are radial (or depend on
y_N alone) and every weight depends on y_N only, so tangential displacement
never helps. Integration is done in polar coordinates about the origin, which
keeps the singularity of the singular-log profiles at r = 0 on a coordinate
boundary where the log-radius substitution grades the nodes. When the
integrand depends on |y| alone, the angular integral is a spherical cap in
closed form and a single radial quadrature remains.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Union

import numpy as np
from scipy import integrate, special

from ._numeric import ABS_TARGET, REL_TARGET, log_quad_radial
from .errors import AccuracyError, DomainError
from .profiles import (
    Constant,
    GaussianGrowth,
    InitialProfile,
    SingularLog,
    log_phi_orlicz,
    origin_integrable,
    radially_nonincreasing,
    unit_ball_volume,
)


@dataclass(frozen=True)
class NoWeight:
    pass


@dataclass(frozen=True)
class GaussianDecay:
    """exp(-lambda_w y_N^2)."""

    lambda_w: float

    def __post_init__(self):
        if not self.lambda_w > 0:
            raise DomainError("gaussian_decay weight needs lambda_w > 0")


@dataclass(frozen=True)
class Orlicz:
    """Integrand Phi(scale * kappa * psi); the power is ignored."""

    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise DomainError("orlicz weight needs scale > 0")


Weight = Union[NoWeight, GaussianDecay, Orlicz]


@dataclass(frozen=True)
class AverageRequest:
    profile: InitialProfile
    kappa: float
    center: float  # height x_N of a centre on the axis
    sigma: float
    N: int
    weight: Weight = NoWeight()
    power: float = 1.0
    cutoff: Optional[tuple] = None  # (lo, hi): keep only lo <= y_N < hi

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError("sigma must be positive")
        if self.power < 1:
            raise DomainError("power must be >= 1")
        if self.center < 0:
            raise DomainError("centre must lie in the closed half-space")

    def at(self, center: float) -> "AverageRequest":
        return AverageRequest(self.profile, self.kappa, center, self.sigma, self.N, self.weight, self.power, self.cutoff)


def half_ball_measure(center: float, sigma: float, N: int) -> float:
    """Lebesgue measure of B(x, sigma) intersected with {y_N >= 0}, x on the axis at height ``center``."""
    if center >= sigma:
        return unit_ball_volume(N) * sigma**N
    # the missing cap has height sigma - center
    x = 1.0 - (center / sigma) ** 2
    cap_fraction = 0.5 * float(special.betainc((N + 1) / 2, 0.5, x))
    return unit_ball_volume(N) * sigma**N * (1.0 - cap_fraction)


def _sphere_area(dim: int) -> float:
    """Surface area of the unit sphere S^dim in R^(dim+1)."""
    return 2 * math.pi ** ((dim + 1) / 2) / math.gamma((dim + 1) / 2)


def _log_integrand(profile: InitialProfile, kappa: float, weight: Weight, power: float, N: int) -> Callable:
    log_kappa = math.log(kappa)
    if isinstance(weight, Orlicz):
        log_scale = math.log(weight.scale) + log_kappa
        return lambda l, y_n: log_phi_orlicz(log_scale + profile.logpsi(l, y_n), N)
    if isinstance(profile, GaussianGrowth):
        # combine the quadratic exponents before evaluating; they cancel at large y_N
        coeff = power * float(profile.lam) - (weight.lambda_w if isinstance(weight, GaussianDecay) else 0.0)
        base = power * log_kappa
        return lambda l, y_n: base + coeff * y_n * y_n
    if isinstance(weight, GaussianDecay):
        lw = weight.lambda_w
        return lambda l, y_n: power * (log_kappa + profile.logpsi(l, y_n)) - lw * y_n * y_n
    return lambda l, y_n: power * (log_kappa + profile.logpsi(l, y_n))


def _breaks(profile: InitialProfile) -> tuple:
    return (profile.support_radius,) if math.isfinite(profile.support_radius) else ()


def _diverges_at_origin(req: AverageRequest) -> bool:
    if not isinstance(req.profile, SingularLog) or req.center >= req.sigma:
        return False
    if req.cutoff is not None and req.cutoff[0] > 0:
        return False
    if isinstance(req.weight, Orlicz):
        return not origin_integrable(req.profile, req.N, 1.0, log_shift=req.N)
    return not origin_integrable(req.profile, req.N, req.power)


def _normalized(req: AverageRequest) -> AverageRequest:
    """Drop a cutoff that does not meet the ball so equivalent requests share a cache entry."""
    if req.cutoff is None:
        return req
    lo, hi = req.cutoff
    if lo <= max(0.0, req.center - req.sigma) and hi >= req.center + req.sigma:
        return dataclasses.replace(req, cutoff=None)
    return req


def _check_log_accuracy(log_value: float, rel_err: float) -> None:
    if not math.isfinite(log_value):
        return
    value = math.exp(min(log_value, 700.0))
    if rel_err * value > max(ABS_TARGET, REL_TARGET * value):
        raise AccuracyError(f"half-ball integral: relative error estimate {rel_err:.3g} exceeds target", achieved=rel_err)


def _log_gauss_segment(c: float, a: float, b: float) -> Optional[float]:
    """log int_a^b exp(c y^2) dy for 0 <= a < b in closed form; None when cancellation would cost accuracy."""
    if c == 0.0:
        return math.log(b - a)
    gap = abs(c) * (b - a) * (b + a)
    if gap < 1e-6:
        return None
    k = abs(c)
    if c < 0:
        u, v = math.sqrt(2 * k) * a, math.sqrt(2 * k) * b
        la, lb = float(special.log_ndtr(-u)), float(special.log_ndtr(-v))
        return 0.5 * math.log(math.pi / k) + la + math.log(-math.expm1(lb - la))
    sa, sb = math.sqrt(k) * a, math.sqrt(k) * b
    db = float(special.dawsn(sb))
    log_ratio = -gap + (math.log(float(special.dawsn(sa))) - math.log(db) if a > 0 else -math.inf)
    return -0.5 * math.log(k) + k * b * b + math.log(db) + math.log(-math.expm1(log_ratio))


def log_integrate_half_ball(req: AverageRequest) -> float:
    """log of the integral over B_+(x, sigma); ``inf`` if it diverges, ``-inf`` if it vanishes."""
    return _log_integrate(_normalized(req))


@lru_cache(maxsize=500_000)
def _log_integrate(req: AverageRequest) -> float:
    if _diverges_at_origin(req):
        return math.inf
    c, s, N = req.center, req.sigma, req.N
    if isinstance(req.profile, Constant) and isinstance(req.weight, NoWeight) and req.cutoff is None:
        return float(req.power) * math.log(float(req.kappa) * float(req.profile.c)) + math.log(half_ball_measure(c, s, N))
    log_f = _log_integrand(req.profile, float(req.kappa), req.weight, float(req.power), N)
    lo_cut, hi_cut = req.cutoff if req.cutoff is not None else (0.0, math.inf)
    brk = _breaks(req.profile)
    r_cap = req.profile.support_radius

    if N == 1:
        lo = max(0.0, c - s, lo_cut)
        hi = min(c + s, hi_cut, r_cap)
        if not hi > lo:
            return -math.inf
        if isinstance(req.profile, GaussianGrowth) and not isinstance(req.weight, Orlicz):
            base = log_f(0.0, 0.0)
            seg = _log_gauss_segment(log_f(0.0, 1.0) - base, lo, hi)
            if seg is not None:
                return base + seg
        value, rel = log_quad_radial(lambda l: log_f(l, math.exp(l)), lo, hi, breaks=brk)
        _check_log_accuracy(value, rel)
        return value

    if req.profile.radial and not isinstance(req.weight, GaussianDecay) and req.cutoff is None:
        return _log_integrate_shells(log_f, c, s, N, r_cap, brk)

    area = _sphere_area(N - 2)
    theta_max = math.pi / 2 if c < s else math.asin(s / c)

    def log_inner(theta):
        sin_t, cos_t = math.sin(theta), math.cos(theta)
        disc = max(s * s - (c * sin_t) ** 2, 0.0)
        r_hi = min(c * cos_t + math.sqrt(disc), r_cap)
        r_lo = max(0.0, c * cos_t - math.sqrt(disc))
        if cos_t > 0:
            r_lo = max(r_lo, lo_cut / cos_t)
            r_hi = min(r_hi, hi_cut / cos_t)
        elif lo_cut > 0:
            return -math.inf
        v, _ = log_quad_radial(lambda l: log_f(l, math.exp(l) * cos_t) + (N - 1) * l, r_lo, r_hi, breaks=brk)
        if N > 2:
            v += (N - 2) * math.log(sin_t) if sin_t > 0 else -math.inf
        return v

    probes = [log_inner(theta_max * f) for f in (0.0, 0.25, 0.5, 0.75, 0.999)]
    if any(v == math.inf for v in probes):
        return math.inf
    ref = max(probes)
    if ref == -math.inf:
        return -math.inf
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, err = integrate.quad(lambda th: math.exp(min(log_inner(th) - ref, 700.0)), 0.0, theta_max, epsabs=0.0, epsrel=1e-9, limit=200)
    if value <= 0:
        return -math.inf
    _check_log_accuracy(math.log(value) + ref, err / value)
    return math.log(area * value) + ref


def _log_cap(x: float, N: int) -> float:
    """log of the measure of {w in S^(N-1): w_N > t}, 0 <= t <= 1, given x = 1 - t^2."""
    if x <= 0.0:
        return -math.inf
    return math.log(0.5 * _sphere_area(N - 1) * float(special.betainc((N - 1) / 2, 0.5, min(x, 1.0))))


def _log_rim_segment(log_g: Callable, c: float, s: float, a: float, b: float) -> tuple:
    """(log integral, relative error) of exp(log_g(log r)) over [a, b] with 0 < a < b and c - s <= a.

    With r = (c - s) + 2 s sin^2(phi/2) the square-root decay of the cap at
    r = c +- s becomes smooth in phi.
    """
    base = c - s

    def phi_of(r):
        return 2.0 * math.asin(math.sqrt(min(max((r - base) / (2.0 * s), 0.0), 1.0)))

    def log_h(phi):
        r = base + 2.0 * s * math.sin(0.5 * phi) ** 2
        sin_p = math.sin(phi)
        if r <= 0.0 or sin_p <= 0.0:
            return -math.inf
        return log_g(math.log(r)) + math.log(s * sin_p)

    pa, pb = phi_of(a), phi_of(b)
    shift = max(log_h(pa + (pb - pa) * f) for f in (0.02, 0.25, 0.5, 0.75, 0.98))
    if shift == -math.inf:
        return -math.inf, 0.0

    def h(phi):
        v = log_h(phi) - shift
        return math.exp(min(v, 700.0)) if v > -745 else 0.0

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, err = integrate.quad(h, pa, pb, epsabs=0.0, epsrel=1e-11, limit=200)
    if value <= 0:
        return -math.inf, 0.0
    return math.log(value) + shift, err / value


def _log_integrate_shells(log_f: Callable, c: float, s: float, N: int, r_cap: float, brk: tuple) -> float:
    """Radial integrand: integrate over spheres |y| = r, each cut by the ball and the half-space.

    A point r w lies in B(x, sigma) iff w_N > t = (r^2 + c^2 - s^2) / 2rc. For
    t <= 0 the whole upper hemisphere qualifies; otherwise the cap is computed
    from 1 - t^2 in factored form, which stays accurate near the rim.
    """
    lo = max(0.0, c - s)
    hi = min(c + s, r_cap)
    if not hi > lo:
        return -math.inf
    full = _log_cap(1.0, N)

    def log_g(l):
        r = math.exp(l)
        if c == 0.0 or r * r + c * c <= s * s:
            cap = full
        else:
            x = (s - r + c) * (s + r - c) * (r + c - s) * (r + c + s) / (2 * r * c) ** 2
            cap = _log_cap(x, N)
        return log_f(l, 0.0) + (N - 1) * l + cap

    r0 = math.sqrt(max(s * s - c * c, 0.0))
    cuts = sorted({lo, hi, *[b for b in (*brk, r0) if lo < b < hi]})
    parts = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if a == 0.0 or b <= r0:
            # touches the origin, or the cap is the full hemisphere
            parts.append(log_quad_radial(log_g, a, b))
        else:
            parts.append(_log_rim_segment(log_g, c, s, a, b))
    if any(v == math.inf for v, _ in parts):
        return math.inf
    logs = [v for v, _ in parts if v > -math.inf]
    if not logs:
        return -math.inf
    value = float(np.logaddexp.reduce(logs))
    rel = sum(math.exp(v - value) * e for v, e in parts if v > -math.inf)
    _check_log_accuracy(value, rel)
    return value


def integrate_half_ball(req: AverageRequest) -> float:
    """Integral of the requested integrand over B_+(x, sigma); ``inf`` if it diverges."""
    v = log_integrate_half_ball(req)
    return math.exp(v) if v < 709.0 else math.inf


def log_average(req: AverageRequest) -> float:
    return log_integrate_half_ball(req) - math.log(half_ball_measure(req.center, req.sigma, req.N))


def average(req: AverageRequest) -> float:
    """Mean of W(y) [kappa psi(y)]^a (or of Phi(scale kappa psi)) over B_+(x, sigma)."""
    v = log_average(req)
    return math.exp(v) if v < 709.0 else math.inf


# ---------------------------------------------------------------------------
# centre search


@dataclass(frozen=True)
class CenterSearchPolicy:
    ratio: float = 4.0
    below: int = 2  # geometric points below sigma
    max_points: int = 24
    far_reach: float = 100.0  # for infinitely supported profiles, in units of max(1, sigma)
    golden_iters: int = 20
    probe_doublings: int = 64
    use_symmetry: bool = True  # skip the search when the origin provably dominates


@dataclass(frozen=True)
class SupResult:
    value: float
    center: float
    unbounded: bool = False


_PRUNE = 40.0  # skip centres whose bound is below e^-40 times the best value
_GOLDEN = (math.sqrt(5) - 1) / 2


def _profile_reach(profile: InitialProfile, sigma: float, policy: CenterSearchPolicy) -> float:
    if math.isfinite(profile.support_radius):
        return profile.support_radius + sigma
    return policy.far_reach * max(1.0, sigma)


def _center_grid(sigma: float, top: float, lo: float, policy: CenterSearchPolicy) -> list:
    pts = [lo]
    first = max(sigma * policy.ratio ** (-policy.below), lo)
    if top > first:
        n = math.ceil(math.log(top / first) / math.log(policy.ratio))
        n = min(max(n, 1), policy.max_points)
        pts.extend(float(v) for v in np.geomspace(first, top, n + 1))
    return sorted(set(p for p in pts if p >= lo))


def sup_over_centers(
    log_objective: Callable[[float], float],
    sigma: float,
    reach: float,
    policy: CenterSearchPolicy = CenterSearchPolicy(),
    probe_growth: bool = False,
    allowed: tuple = (0.0, math.inf),
    log_upper: Optional[Callable[[float], float]] = None,
    kinks: tuple = (),
) -> SupResult:
    """Maximise ``exp(log_objective(x_N))`` over centres on the axis.

    Grid: the lower end of ``allowed`` plus geometric heights from a little
    below sigma up to ``reach``, then a golden-section refinement around an
    interior best grid point. With ``probe_growth`` the objective is followed
    along doubling heights and sustained growth is reported as unbounded.
    ``log_upper``, if given, is a nonincreasing bound on the objective; grid
    heights where it falls far below the best value so far are skipped.
    ``kinks`` are extra heights where the objective may peak without being
    smooth, such as where the ball first clears the edge of the support.
    Values are returned in log form.
    """
    lo_allowed, hi_allowed = allowed
    top = reach
    if math.isfinite(hi_allowed):
        # the centre set {x_N < hi} is half-open
        top = min(top, hi_allowed * (1 - 1e-12))
    pts = _center_grid(sigma, top, lo_allowed, policy)
    extra = [k for k in kinks if lo_allowed < k < top and k not in pts]
    if extra:
        pts = sorted(pts + extra)
    vals = []
    for p in pts:
        if log_upper is not None and vals and log_upper(p) < max(vals) - _PRUNE:
            vals.extend([-math.inf] * (len(pts) - len(vals)))
            break
        vals.append(log_objective(p))

    if probe_growth:
        x = max(pts[-1], sigma, 1.0)
        seq = [v for v in vals if v > -math.inf][-1:] or [-math.inf]
        for _ in range(policy.probe_doublings):
            x *= 2
            if x >= hi_allowed:
                break
            v = log_objective(x)
            if v == math.inf:
                return SupResult(math.inf, x, True)
            if v == -math.inf:
                continue
            if seq[0] == -math.inf:
                seq = [v]
                continue
            seq.append(v)
            if v - seq[0] > 1000.0:
                return SupResult(math.inf, x, True)
            if len(seq) >= 6 and all(b < a for a, b in zip(seq[-6:], seq[-5:])):
                break
        tail = seq[-6:]
        if len(tail) == 6 and all(b > a + 1e-9 for a, b in zip(tail, tail[1:])):
            return SupResult(math.inf, x, True)

    for p, v in zip(pts, vals):
        if v == math.inf:
            return SupResult(math.inf, p, False)

    i = int(np.argmax(vals))
    best_x, best_v = pts[i], vals[i]
    if 0 < i < len(pts) - 1:
        a, b = pts[i - 1], pts[i + 1]
        c = b - _GOLDEN * (b - a)
        d = a + _GOLDEN * (b - a)
        fc, fd = log_objective(c), log_objective(d)
        for _ in range(policy.golden_iters):
            if fc >= fd:
                b, d, fd = d, c, fc
                c = b - _GOLDEN * (b - a)
                fc = log_objective(c)
            else:
                a, c, fc = c, d, fd
                d = a + _GOLDEN * (b - a)
                fd = log_objective(d)
        for xx, vv in ((c, fc), (d, fd)):
            if vv > best_v:
                best_x, best_v = xx, vv
    return SupResult(best_v, best_x, False)


def _log_upper_bound(req: AverageRequest) -> Optional[Callable[[float], float]]:
    """Bound on the log average at height h for radially nonincreasing data.

    Every point of B_+(h e_N, sigma) has |y| >= y_N >= h - sigma, so the
    integrand is at most its value at radius h - sigma (or the cutoff's inner
    radius, if larger).
    """
    if isinstance(req.weight, Orlicz) or not radially_nonincreasing(req.profile):
        return None
    lam = req.weight.lambda_w if isinstance(req.weight, GaussianDecay) else 0.0
    inner = req.cutoff[0] if req.cutoff is not None else 0.0
    log_kappa = math.log(req.kappa)

    def bound(h):
        d = h - req.sigma
        r = max(d, inner)
        if r <= 0:
            return math.inf
        return req.power * (log_kappa + req.profile.log_radial(math.log(r))) - lam * max(d, 0.0) ** 2

    return bound


def origin_dominates(req: AverageRequest, allowed: tuple = (0.0, math.inf)) -> bool:
    """True when the average is provably largest at x = 0.

    For a radially nonincreasing integrand the half-ball average at x equals
    the average over the symmetric set B(x) u B(-x), which cannot exceed the
    average over the ball of the same radius at the origin. A y_N-weight keeps
    this in one dimension only, and a cutoff must not touch B_+(0, sigma).
    """
    if allowed[0] > 0 or not radially_nonincreasing(req.profile):
        return False
    if isinstance(req.weight, GaussianDecay) and req.N != 1:
        return False
    if req.cutoff is not None and (req.cutoff[0] > 0 or req.cutoff[1] < req.sigma):
        return False
    return True


def log_sup_average(req: AverageRequest, policy: CenterSearchPolicy = CenterSearchPolicy(), allowed: tuple = (0.0, math.inf)) -> SupResult:
    """As :func:`sup_average_over_centers` with the value in log form."""
    if policy.use_symmetry and origin_dominates(req, allowed):
        return SupResult(log_average(req.at(0.0)), 0.0, False)
    reach = _profile_reach(req.profile, req.sigma, policy)
    if req.cutoff is not None and math.isfinite(req.cutoff[1]):
        reach = min(reach, req.cutoff[1] + req.sigma)
    return sup_over_centers(
        lambda c: log_average(req.at(c)),
        req.sigma,
        reach,
        policy,
        probe_growth=isinstance(req.profile, GaussianGrowth),
        allowed=allowed,
        log_upper=_log_upper_bound(req),
        kinks=(req.sigma, req.profile.support_radius - req.sigma),
    )


def sup_average_over_centers(req: AverageRequest, policy: CenterSearchPolicy = CenterSearchPolicy(), allowed: tuple = (0.0, math.inf)) -> SupResult:
    """Supremum of ``average(req)`` over axis centres (the request's own centre is ignored).

    ``allowed`` restricts centres to ``lo <= x_N < hi``.
    """
    r = log_sup_average(req, policy, allowed)
    return SupResult(math.exp(r.value) if r.value < 709.0 else math.inf, r.center, r.unbounded)
