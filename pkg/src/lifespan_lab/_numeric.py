"""Shared numeric plumbing: exact-or-tolerant comparisons and log-space quadrature."""

from __future__ import annotations

import math
import warnings
from fractions import Fraction
from numbers import Rational

import numpy as np
from scipy import integrate

from .errors import AccuracyError

FLOAT_TOL = 1e-12

# weaker of the two wins
ABS_TARGET = 1e-7
REL_TARGET = 1e-5


def is_exact(x) -> bool:
    return isinstance(x, (int, Rational)) and not isinstance(x, bool)


def compare(a, b, tol: float = FLOAT_TOL) -> int:
    """Three-way comparison, exact on rationals and tolerant on floats."""
    if is_exact(a) and is_exact(b):
        d = Fraction(a) - Fraction(b)
        return (d > 0) - (d < 0)
    a, b = float(a), float(b)
    if abs(a - b) <= tol * max(1.0, abs(a), abs(b)):
        return 0
    return 1 if a > b else -1


def parse_number(text: str):
    """Parse ``'3/2'``, ``'0.25'``, ``'1e-3'`` into an exact Fraction when possible."""
    text = text.strip()
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        pass
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"not a finite number: {text!r}")
    return value


def format_number(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def log1pexp(x: float) -> float:
    return float(np.logaddexp(0.0, x))


def log_log_e_plus_inv(logr: float) -> float:
    """log(log(e + 1/r)) evaluated from log r without overflow."""
    return math.log(float(np.logaddexp(1.0, -logr)))


def _quad(f, lo, hi, points=None):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        kwargs = dict(epsabs=0.0, epsrel=1e-11, limit=400)
        if points and math.isfinite(lo) and math.isfinite(hi):
            kwargs["points"] = points
        return integrate.quad(f, lo, hi, **kwargs)


def check_accuracy(value: float, err: float, what: str = "integral") -> None:
    if not math.isfinite(value):
        return
    if err > max(ABS_TARGET, REL_TARGET * abs(value)):
        raise AccuracyError(f"{what}: quadrature error estimate {err:.3g} exceeds target", achieved=err)


def _radial_segments(log_f, lo: float, hi: float, breaks=()):
    """Yield (value, error, log_scale) per segment; the segment integral is value * exp(log_scale)."""
    cuts = sorted({lo, hi, *[b for b in breaks if lo < b < hi]})
    for a, b in zip(cuts[:-1], cuts[1:]):
        if a > 0 and b / a < 2.0:
            la, lb = math.log(a), math.log(b)
            shift = max(log_f(la), log_f(lb), log_f(math.log(0.5 * (a + b))))
            if shift == -math.inf:
                continue
            if shift == math.inf:
                yield math.inf, 0.0, 0.0
                continue

            def g(r, shift=shift):
                v = log_f(math.log(r)) - shift if r > 0 else -math.inf
                # clamp: round-off in huge exponents can push v past the probed maximum
                return math.exp(min(v, 700.0)) if v > -745 else 0.0

            v, e = _quad(g, a, b)
        else:
            la = math.log(a) if a > 0 else -math.inf
            lb = math.log(b)
            probe = [lb, lb - 1.0, lb - 10.0] if la == -math.inf else [la, lb, 0.5 * (la + lb)]
            shift = max(log_f(l) + l for l in probe)
            if shift == -math.inf:
                shift = 0.0
            if shift == math.inf:
                yield math.inf, 0.0, 0.0
                continue

            def g(l, shift=shift):
                v = log_f(l) + l - shift
                return math.exp(min(v, 700.0)) if v > -745 else 0.0

            v, e = _quad(g, la, lb)
        yield v, e, shift


def quad_radial(log_f, lo: float, hi: float, breaks=()) -> tuple[float, float]:
    """Integrate f(r) dr over [lo, hi] with 0 <= lo < hi, given log f(log r).

    Wide segments and segments touching the origin are integrated in the
    variable l = log r, which grades the nodes geometrically toward r = 0 and
    resolves both algebraic and logarithmic singularities there. Narrow
    segments far from the origin are integrated directly in r.
    """
    if not hi > lo:
        return 0.0, 0.0
    total = 0.0
    total_err = 0.0
    for v, e, shift in _radial_segments(log_f, lo, hi, breaks):
        if shift > 700 or v == math.inf:
            return math.inf, 0.0
        scale = math.exp(shift)
        total += v * scale
        total_err += e * scale
    return total, total_err


def log_quad_radial(log_f, lo: float, hi: float, breaks=()) -> tuple[float, float]:
    """Like :func:`quad_radial` but returns (log of the integral, relative error); never overflows."""
    if not hi > lo:
        return -math.inf, 0.0
    logs, errs = [], []
    for v, e, shift in _radial_segments(log_f, lo, hi, breaks):
        if v == math.inf:
            return math.inf, 0.0
        if v > 0:
            logs.append(math.log(v) + shift)
            errs.append(math.log(e) + shift if e > 0 else -math.inf)
    if not logs:
        return -math.inf, 0.0
    total = float(np.logaddexp.reduce(logs))
    err = float(np.logaddexp.reduce(errs)) if errs else -math.inf
    return total, math.exp(err - total)
