"""kappa sweeps: estimate T(kappa) point by point, fit the predicted law, and judge the slope."""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import stats

from .conditions import GammaConfig, TSearch, lower_bound_lifespan, upper_bound_lifespan
from .errors import DomainError, InapplicableError, LabError
from .predictor import (
    FiniteLimit,
    LogLifespanLarge,
    LogLifespanSmall,
    PowerLaw,
    PowerLogLaw,
    PowerOverLogSmall,
    Regime,
    ScalingLaw,
    exponent_of,
    parse_law,
    predict,
)
from .problem import ProblemSpec
from .volterra import StepPolicy, estimate_blowup_time

SOURCES = ("volterra", "upper_bound", "lower_bound")
MIN_POINTS = 4
MIN_R_SQUARED = 0.98
FINITE_LIMIT_TOL = 0.05


def default_kappas(regime: Regime, n: int = 8) -> list:
    lo, hi = (10.0, 1e4) if regime is Regime.LARGE_KAPPA else (1e-4, 1e-1)
    return [float(k) for k in np.geomspace(lo, hi, n)]


def match_tolerance(exponent: float) -> float:
    return max(0.1 * abs(exponent), 0.05)


@dataclass(frozen=True)
class SweepPoint:
    kappa: float
    T_hat: float
    source: str


@dataclass(frozen=True)
class FitResult:
    exponent: Optional[float]
    stderr: Optional[float]
    r_squared: Optional[float]
    deviation: Optional[float] = None  # finite-limit laws only


def _coordinates(kappa: np.ndarray, T: np.ndarray, law: ScalingLaw):
    """(x, y, sign): the fitted slope times ``sign`` is the law's exponent."""
    lk = np.log(kappa)
    if isinstance(law, PowerLaw):
        return lk, np.log(T), 1.0
    if isinstance(law, PowerLogLaw):
        if np.any(kappa <= 1):
            raise DomainError("power-log fits need kappa > 1")
        return lk - float(law.q) * np.log(lk), np.log(T), 1.0
    if isinstance(law, LogLifespanLarge):
        return lk, np.log(np.abs(np.log(T))), 1.0
    if isinstance(law, LogLifespanSmall):
        if np.any(T <= 1):
            raise DomainError("log-lifespan fits for small kappa need T > 1")
        return lk, np.log(np.log(T)), -1.0
    if isinstance(law, PowerOverLogSmall):
        if np.any(kappa >= 1):
            raise DomainError("power-over-log fits need kappa < 1")
        return -lk - np.log(-lk), np.log(T), 1.0
    raise InapplicableError(f"no slope to fit for {law.spec()}")


def fit_law(points, law: ScalingLaw) -> FitResult:
    """Least squares in the law's natural coordinates."""
    pts = sorted(points, key=lambda pt: pt.kappa)
    if len(pts) < MIN_POINTS:
        raise DomainError(f"need at least {MIN_POINTS} points, got {len(pts)}")
    kappa = np.array([pt.kappa for pt in pts], dtype=float)
    T = np.array([pt.T_hat for pt in pts], dtype=float)
    if not np.all(np.isfinite(T)) or np.any(T <= 0):
        raise DomainError("every T_hat must be finite and positive")
    if isinstance(law, FiniteLimit):
        value = float(law.value)
        return FitResult(None, None, None, abs(T[0] - value) / value)
    x, y, sign = _coordinates(kappa, T, law)
    res = stats.linregress(x, y)
    return FitResult(sign * float(res.slope), float(res.stderr), float(res.rvalue**2))


@dataclass
class SweepResult:
    points: list
    fitted_exponent: Optional[float]
    fit_stderr: Optional[float]
    r_squared: Optional[float]
    predicted: Optional[ScalingLaw]
    verdict: str  # match | mismatch | inconclusive
    dropped: list = field(default_factory=list)  # (kappa, reason)
    notes: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kappa", "T_hat", "source"])
        for pt in self.points:
            w.writerow([repr(pt.kappa), repr(pt.T_hat), pt.source])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "points": [{"kappa": pt.kappa, "T_hat": pt.T_hat, "source": pt.source} for pt in self.points],
            "fitted_exponent": self.fitted_exponent,
            "fit_stderr": self.fit_stderr,
            "r_squared": self.r_squared,
            "predicted": self.predicted.spec() if self.predicted is not None else None,
            "verdict": self.verdict,
            "dropped": [{"kappa": k, "reason": r} for k, r in self.dropped],
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SweepResult":
        return cls(
            points=[SweepPoint(p["kappa"], p["T_hat"], p["source"]) for p in d["points"]],
            fitted_exponent=d["fitted_exponent"],
            fit_stderr=d["fit_stderr"],
            r_squared=d["r_squared"],
            predicted=parse_law(d["predicted"]) if d["predicted"] is not None else None,
            verdict=d["verdict"],
            dropped=[(x["kappa"], x["reason"]) for x in d["dropped"]],
            notes=list(d["notes"]),
        )

    def __eq__(self, other):
        return isinstance(other, SweepResult) and self.to_dict() == other.to_dict()


@dataclass(frozen=True)
class _Job:
    problem: ProblemSpec
    source: str
    gammas: GammaConfig
    policy: StepPolicy
    search: TSearch


def _estimate(job: _Job) -> tuple:
    """(T_hat, None) or (None, reason)."""
    try:
        if job.source == "volterra":
            est = estimate_blowup_time(job.problem, job.policy)
            return (est.T_est, None) if est.T_est is not None else (None, est.method)
        fn = upper_bound_lifespan if job.source == "upper_bound" else lower_bound_lifespan
        b = fn(job.problem, job.gammas, job.search)
        if b.value is None or b.value <= 0:
            return None, b.status
        return b.value, None
    except LabError as exc:
        return None, f"{type(exc).__name__}: {exc}"


def _check_kappas(kappas) -> tuple:
    notes = []
    ks = sorted(float(k) for k in kappas)
    if len(ks) < MIN_POINTS:
        raise DomainError(f"a sweep needs at least {MIN_POINTS} kappa values")
    if ks[0] <= 0:
        raise DomainError("kappa values must be positive")
    ratios = np.diff(np.log(ks))
    if np.any(ratios <= 0) or np.ptp(ratios) > 1e-6 * max(abs(ratios).max(), 1.0):
        raise DomainError("kappa values must form a geometric progression")
    if ks[-1] / ks[0] < 100 * (1 - 1e-12):
        notes.append("kappa range spans fewer than two decades")
    return ks, notes


def run_sweep(
    problem: ProblemSpec,
    kappas,
    method: str,
    regime: Regime,
    gammas: GammaConfig = GammaConfig(),
    policy: StepPolicy = StepPolicy(),
    search: TSearch = TSearch(),
    jobs: Optional[int] = 1,
    law: Optional[ScalingLaw] = None,
) -> SweepResult:
    """Estimate T for every kappa with ``method`` and compare the fitted slope with the prediction."""
    if method not in SOURCES:
        raise DomainError(f"unknown source {method!r}; expected one of {', '.join(SOURCES)}")
    if method == "volterra" and problem.N != 1:
        raise InapplicableError("the volterra source needs N = 1")
    ks, notes = _check_kappas(kappas)
    if law is None:
        try:
            law = predict(problem.N, problem.p, problem.profile, regime)
        except InapplicableError as exc:
            notes.append(f"no prediction: {exc}")
    work = [_Job(problem.with_kappa(k), method, gammas, policy, search) for k in ks]
    n_jobs = jobs or os.cpu_count() or 1
    if n_jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=min(n_jobs, len(work))) as ex:
            outcomes = list(ex.map(_estimate, work))
    else:
        outcomes = [_estimate(j) for j in work]

    points, dropped = [], []
    for k, (T, reason) in zip(ks, outcomes):
        if T is None:
            dropped.append((k, reason))
        else:
            points.append(SweepPoint(k, float(T), method))

    fitted = stderr = r2 = None
    verdict = "inconclusive"
    if len(points) >= MIN_POINTS:
        # without a usable prediction, report the plain log-log slope
        has_shape = law is not None and (exponent_of(law) is not None or isinstance(law, FiniteLimit))
        fit_as = law if has_shape else PowerLaw(-1)
        try:
            fit = fit_law(points, fit_as)
        except (DomainError, InapplicableError) as exc:
            notes.append(f"fit failed: {exc}")
        else:
            fitted, stderr, r2 = fit.exponent, fit.stderr, fit.r_squared
            if isinstance(law, FiniteLimit):
                verdict = "match" if fit.deviation <= FINITE_LIMIT_TOL else "mismatch"
                notes.append(f"relative deviation from the limit at the smallest kappa: {fit.deviation:.3g}")
            elif law is not None and exponent_of(law) is not None:
                e = exponent_of(law)
                ok = abs(fitted - e) <= match_tolerance(e) and r2 >= MIN_R_SQUARED
                verdict = "match" if ok else "mismatch"
    else:
        notes.append(f"only {len(points)} usable points")
    return SweepResult(points, fitted, stderr, r2, law, verdict, dropped, notes)
