"""Boundary-trace solver for N = 1.

At x = 0 the integral equation reduces to the scalar Abel-type equation

    w(t) = kappa F(t) + int_0^t (pi (t - s))^(-1/2) w(s)^p ds,

with F the free evolution of the profile at the boundary. It is marched
forward by product integration: on every interval the factor (t - s)^(-1/2)
is integrated exactly against the piecewise-linear interpolant of w^p, and
the resulting scalar equation for the new node is solved by a monotone
Newton iteration. Forward marching yields the unique local solution, which is
the minimal one (see ``picard_iterates``).
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, InapplicableError, LinearBlowupError, StepFailureError
from .kernel import boundary_free_trace
from .problem import ProblemSpec
from .profiles import GaussianGrowth, eval_profile

log = logging.getLogger(__name__)

INV_SQRT_PI = 1.0 / math.sqrt(math.pi)


@dataclass(frozen=True)
class StepPolicy:
    rel_increment: float = 0.05
    initial_step: float = 1e-12
    max_growth: float = 1.2
    w_max: float = 1e6
    fit_window: int = 32
    time_resolution: float = 1e-11
    horizon: float = 1e6
    max_steps: int = 200_000
    checkpoint_tol: float = 1e-4
    max_refinements: int = 4

    def halved(self) -> "StepPolicy":
        return StepPolicy(**{**asdict(self), "rel_increment": self.rel_increment / 2})


@dataclass
class TraceSolution:
    times: np.ndarray
    trace: np.ndarray
    free: np.ndarray
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "w"])
        for t, w in zip(self.times, self.trace):
            writer.writerow([repr(float(t)), repr(float(w))])
        return buf.getvalue()

    def at(self, t: float) -> float:
        return float(np.interp(t, self.times, self.trace))


@dataclass(frozen=True)
class BlowupEstimate:
    T_est: Optional[float]
    bracket: Optional[tuple]
    method: str
    estimates: tuple = ()

    def to_dict(self) -> dict:
        return {
            "T_est": self.T_est,
            "bracket": list(self.bracket) if self.bracket is not None else None,
            "method": self.method,
            "estimates": [list(e) for e in self.estimates],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BlowupEstimate":
        return cls(
            T_est=d["T_est"],
            bracket=tuple(d["bracket"]) if d["bracket"] is not None else None,
            method=d["method"],
            estimates=tuple(tuple(e) for e in d.get("estimates", ())),
        )


def _weights(t_nodes: np.ndarray, t_new: float) -> tuple[np.ndarray, np.ndarray]:
    """Left/right product-integration weights of (t_new - s)^(-1/2) on each interval.

    Written so that nothing cancels when an interval is short compared with
    its distance from t_new.
    """
    nodes = np.append(t_nodes, t_new)
    a = t_new - nodes[:-1]
    b = t_new - nodes[1:]
    h = a - b
    sa = np.sqrt(a)
    sb = np.sqrt(b)
    ssum = sa + sb
    full = 2.0 * h / ssum
    right = (2.0 / 3.0) * h * (1.0 + sa / ssum) / ssum
    return full - right, right


def _solve_node(known: float, omega: float, p: float) -> Optional[float]:
    """Smallest root of w = known + omega w^p, or None if there is none."""
    if omega == 0.0:
        return known
    w_peak = (p * omega) ** (-1.0 / (p - 1.0))
    if w_peak * (1.0 - 1.0 / p) < known:
        return None
    w = known
    for _ in range(200):
        g = w - omega * w**p - known
        dg = 1.0 - p * omega * w ** (p - 1.0)
        if dg <= 0:
            break
        step = -g / dg
        w_next = min(w + step, w_peak)
        if abs(w_next - w) <= 1e-15 * w_next:
            return w_next
        w = w_next
    # the tangent iteration stalled next to the fold; fall back to bisection
    lo, hi = known, w_peak
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid - omega * mid**p - known < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            return hi
    raise StepFailureError("node equation did not converge", {"known": known, "omega": omega, "p": p})


class _Marcher:
    def __init__(self, problem: ProblemSpec, policy: StepPolicy):
        if problem.N != 1:
            raise InapplicableError("the dynamic solver handles N = 1 only")
        self.p = float(problem.p)
        self.kappa = float(problem.kappa)
        self.profile = problem.profile
        self.policy = policy
        w0 = self.kappa * eval_profile(self.profile, (0.0,))
        self.g0_known = math.isfinite(w0)
        self.t = [0.0]
        self.w = [w0]
        self.g = [w0**self.p if self.g0_known else math.nan]
        self.f = [w0]
        self.trough = w0 if self.g0_known and w0 > 0 else math.inf

    def forcing(self, t: float) -> float:
        return self.kappa * boundary_free_trace(self.profile, t)

    def try_step(self, h: float) -> Optional[tuple]:
        t_nodes = np.asarray(self.t)
        t_new = t_nodes[-1] + h
        left, right = _weights(t_nodes, t_new)
        g = np.asarray(self.g)
        if not self.g0_known:
            if len(self.t) == 1:
                # w^p held constant on the first interval
                omega = (left[0] + right[0]) * INV_SQRT_PI
                hist = 0.0
            else:
                g = g.copy()
                g[0] = g[1]
                omega = right[-1] * INV_SQRT_PI
                hist = float(left @ g + right[:-1] @ g[1:])
        else:
            omega = right[-1] * INV_SQRT_PI
            hist = float(left @ g + right[:-1] @ g[1:])
        f_new = self.forcing(t_new)
        known = f_new + hist * INV_SQRT_PI
        w_new = _solve_node(known, omega, self.p)
        if w_new is None:
            return None
        return t_new, w_new, f_new

    def accept(self, t_new, w_new, f_new):
        self.t.append(t_new)
        self.w.append(w_new)
        self.g.append(w_new**self.p)
        self.f.append(f_new)
        if w_new > 0:
            self.trough = min(self.trough, w_new)

    def run(self, stop_ratio: float, horizon: float) -> str:
        pol = self.policy
        h = min(pol.initial_step, horizon)
        for _ in range(pol.max_steps):
            t_now = self.t[-1]
            if t_now >= horizon * (1 - 1e-14):
                return "horizon"
            h = min(h, horizon - t_now)
            if t_now > 0 and h < pol.time_resolution * t_now:
                return "resolution"
            try:
                out = self.try_step(h)
            except LinearBlowupError:
                out = None
            if out is None:
                h *= 0.5
                continue
            t_new, w_new, f_new = out
            w_old = self.w[-1]
            ref = w_old if math.isfinite(w_old) and w_old > 0 else w_new
            delta = abs(w_new - ref) / max(ref, w_new, 1e-300) if ref > 0 else 0.0
            if len(self.t) > 1 and delta > 2 * pol.rel_increment:
                h *= 0.9 * pol.rel_increment / delta
                continue
            self.accept(t_new, w_new, f_new)
            if math.isfinite(self.trough) and w_new >= stop_ratio * self.trough:
                return "threshold"
            factor = pol.max_growth if delta == 0 else min(pol.max_growth, max(0.2, pol.rel_increment / delta))
            h *= factor
        raise StepFailureError("step budget exhausted", {"t": self.t[-1], "w": self.w[-1], "steps": len(self.t)})

    def solution(self, stop: str) -> TraceSolution:
        return TraceSolution(
            times=np.asarray(self.t[1:]),
            trace=np.asarray(self.w[1:]),
            free=np.asarray(self.f[1:]),
            meta={**asdict(self.policy), "stop": stop, "steps": len(self.t) - 1, "trough": self.trough},
        )


def _march(problem: ProblemSpec, policy: StepPolicy, stop_ratio: float, horizon: float) -> TraceSolution:
    m = _Marcher(problem, policy)
    stop = m.run(stop_ratio, horizon)
    return m.solution(stop)


def _effective_horizon(problem: ProblemSpec, horizon: float) -> float:
    if isinstance(problem.profile, GaussianGrowth):
        # the forcing term itself ceases to exist at 1/(4 lambda)
        return min(horizon, 1.0 / (4 * float(problem.profile.lam)))
    return horizon


def solve_boundary_trace(problem: ProblemSpec, horizon: float, policy: StepPolicy = StepPolicy()) -> TraceSolution:
    """March the boundary trace up to ``horizon`` or until it exceeds the blow-up threshold.

    The relative increment is halved until the trace at fixed checkpoints
    changes by less than ``policy.checkpoint_tol``.
    """
    if not horizon > 0:
        raise DomainError("horizon must be positive")
    horizon = _effective_horizon(problem, horizon)
    current = _march(problem, policy, policy.w_max, horizon)
    pol = policy
    change = math.inf
    for _ in range(policy.max_refinements):
        pol = pol.halved()
        finer = _march(problem, pol, policy.w_max, horizon)
        t_end = min(current.times[-1], finer.times[-1])
        checkpoints = t_end * np.linspace(0.1, 0.9, 9)
        a = np.interp(checkpoints, current.times, current.trace)
        b = np.interp(checkpoints, finer.times, finer.trace)
        change = float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))
        current = finer
        if change < policy.checkpoint_tol:
            break
    current.meta["checkpoint_change"] = change
    return current


def _fit_blowup_time(times: np.ndarray, trace: np.ndarray, p: float, window: int) -> float:
    """Extrapolate T from w ~ C (T - t)^(-1/(2(p-1))) on the trailing window.

    In that regime w^(-2(p-1)) is linear in t and vanishes at T.
    """
    t = times[-window:]
    y = trace[-window:] ** (-2.0 * (p - 1.0))
    t0 = t[-1]
    slope, intercept = np.polyfit(t - t0, y, 1)
    if not slope < 0:
        return float(t0)
    return float(t0 - intercept / slope)


def _estimates_from(sol: TraceSolution, p: float, policy: StepPolicy) -> list[float]:
    out = []
    trough = sol.meta["trough"]
    for ratio in (policy.w_max, 4 * policy.w_max):
        hit = np.nonzero(sol.trace >= ratio * trough)[0]
        end = int(hit[0]) + 1 if hit.size else len(sol.trace)
        n = min(policy.fit_window, end)
        out.append(_fit_blowup_time(sol.times[:end], sol.trace[:end], p, n))
    return out


def estimate_blowup_time(problem: ProblemSpec, policy: StepPolicy = StepPolicy()) -> BlowupEstimate:
    """Blow-up time of the boundary trace, bracketed by two thresholds and two resolutions."""
    horizon = _effective_horizon(problem, policy.horizon)
    p = float(problem.p)
    estimates = []
    for pol in (policy, policy.halved()):
        sol = _march(problem, pol, 4 * policy.w_max, horizon)
        if sol.meta["stop"] == "horizon":
            if isinstance(problem.profile, GaussianGrowth) and horizon < policy.horizon:
                # the march reached 1/(4 lambda) itself; the trace diverges there with the forcing
                return BlowupEstimate(horizon, (sol.times[-1], horizon * (1 + 1e-9)), "linear-limit")
            return BlowupEstimate(None, None, "grid-exhausted")
        for ratio, T in zip((1, 4), _estimates_from(sol, p, policy)):
            estimates.append((pol.rel_increment, ratio, T))
        log.debug("rel_increment=%g stop=%s steps=%d", pol.rel_increment, sol.meta["stop"], sol.meta["steps"])
    values = [e[2] for e in estimates]
    T_est = values[-1]
    lo, hi = min(values), max(values)
    pad = max(0.5 * (hi - lo), 1e-9 * T_est)
    return BlowupEstimate(T_est, (lo - pad, hi + pad), "threshold+rate-fit", tuple(estimates))


def picard_iterates(problem: ProblemSpec, times: np.ndarray, iterations: int) -> list[np.ndarray]:
    """Monotone iteration w^0 = kappa F, w^{k+1} = kappa F + K[(w^k)^p] on a fixed grid."""
    p = float(problem.p)
    kappa = float(problem.kappa)
    t_all = np.concatenate([[0.0], np.asarray(times, dtype=float)])
    forcing = np.array([kappa * boundary_free_trace(problem.profile, t) for t in t_all[1:]])
    w0_val = kappa * eval_profile(problem.profile, (0.0,))
    out = []
    w = forcing.copy()
    out.append(w.copy())
    for _ in range(iterations):
        g = np.concatenate([[w0_val**p if math.isfinite(w0_val) else w[0] ** p], w**p])
        nxt = np.empty_like(w)
        for i in range(1, len(t_all)):
            left, right = _weights(t_all[:i], t_all[i])
            nxt[i - 1] = forcing[i - 1] + INV_SQRT_PI * float(left @ g[:i] + right @ g[1 : i + 1])
        w = nxt
        out.append(w.copy())
    return out
