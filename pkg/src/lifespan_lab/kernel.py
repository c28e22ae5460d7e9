"""Heat kernels on R^d, the Neumann Green function of the half-space, and
free (linear) evolution of initial profiles."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._numeric import check_accuracy, quad_radial
from .errors import DomainError, InapplicableError, LinearBlowupError
from .profiles import Constant, GaussianGrowth, InitialProfile, SingularLog

# beyond |y - x| > TAIL * sqrt(t) the Gaussian factor is below exp(-36)
TAIL = 12.0


def gauss_kernel(z, t: float) -> float:
    """(4 pi t)^(-d/2) exp(-|z|^2 / 4t) with d = len(z)."""
    if not t > 0:
        raise DomainError("heat kernel needs t > 0")
    z = np.atleast_1d(np.asarray(z, dtype=float))
    d = z.size
    return float((4 * math.pi * t) ** (-d / 2) * math.exp(-float(z @ z) / (4 * t)))


@dataclass(frozen=True)
class KernelQuery:
    x: tuple
    y: tuple
    t: float

    def __post_init__(self):
        if not self.t > 0:
            raise DomainError("kernel query needs t > 0")
        if len(self.x) != len(self.y) or len(self.x) == 0:
            raise DomainError("x and y must be points of the same dimension")
        if self.x[-1] < 0 or self.y[-1] < 0:
            raise DomainError("points must lie in the closed half-space")

    @property
    def N(self) -> int:
        return len(self.x)


def neumann_green(q: KernelQuery) -> float:
    """Even-reflection Green function of the heat equation on the half-space."""
    x = np.asarray(q.x, dtype=float)
    y = np.asarray(q.y, dtype=float)
    normal = gauss_kernel([x[-1] - y[-1]], q.t) + gauss_kernel([x[-1] + y[-1]], q.t)
    if q.N == 1:
        return normal
    return gauss_kernel(x[:-1] - y[:-1], q.t) * normal


def green_1d(x: float, y: float, t: float) -> float:
    return neumann_green(KernelQuery((x,), (y,), t))


def _log_reflected_gauss(x: float, y: float, t: float) -> float:
    """log[g(x - y) + g(x + y)] for the 1-d kernel g, stable for tiny values."""
    pre = -0.5 * math.log(4 * math.pi * t)
    return pre + float(np.logaddexp(-(x - y) ** 2 / (4 * t), -(x + y) ** 2 / (4 * t)))


def free_propagate(profile: InitialProfile, x, t: float, N: int) -> float:
    """Linear evolution  F(x, t) = int_D G(x, y, t) psi(y) dy."""
    if not t > 0:
        raise DomainError("free evolution needs t > 0")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size != N:
        raise DomainError(f"point has dimension {x.size}, expected N={N}")
    if isinstance(profile, Constant):
        return float(profile.c)
    if isinstance(profile, GaussianGrowth):
        lam = float(profile.lam)
        gap = 1.0 - 4 * lam * t
        if gap <= 0:
            raise LinearBlowupError(f"free evolution of exp(lambda x_N^2) ceases to exist at t = 1/(4 lambda) = {1 / (4 * lam):g}")
        return gap**-0.5 * math.exp(lam * x[-1] ** 2 / gap)
    if N != 1:
        raise InapplicableError("quadrature-based free evolution is implemented for N = 1 only")
    return _free_propagate_1d(profile, float(x[0]), float(t))


@lru_cache(maxsize=200_000)
def _free_propagate_1d(profile: InitialProfile, x: float, t: float) -> float:
    reach = TAIL * math.sqrt(t)
    lo = max(0.0, x - reach)
    hi = min(x + reach, profile.support_radius)
    if not hi > lo:
        return 0.0
    breaks = [b for b in (x, 1.0 if isinstance(profile, SingularLog) else None) if b is not None]

    def log_f(l):
        y = math.exp(l)
        return profile.log_radial(l) + _log_reflected_gauss(x, y, t)

    value, err = quad_radial(log_f, lo, hi, breaks=breaks)
    check_accuracy(value, err, "free_propagate")
    return value


def boundary_free_trace(profile: InitialProfile, t: float) -> float:
    """F(0, t) for N = 1 with unit amplitude; the Volterra forcing term."""
    return free_propagate(profile, (0.0,), t, 1)
