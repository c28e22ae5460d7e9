import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from lifespan_lab.errors import DomainError, LinearBlowupError
from lifespan_lab.kernel import KernelQuery, free_propagate, gauss_kernel, green_1d, neumann_green
from lifespan_lab.profiles import Constant, GaussianGrowth, PowerDecay, SingularLog, eval_profile

heights = st.floats(0.0, 5.0)
times = st.floats(1e-3, 10.0)


def test_gauss_kernel_unit_prefactor():
    assert gauss_kernel([0.0], 1 / (4 * math.pi)) == pytest.approx(1.0, rel=1e-15)


def test_gauss_kernel_2d_origin():
    assert gauss_kernel([0.0, 0.0], 1.0) == pytest.approx(1 / (4 * math.pi), rel=1e-15)


def test_gauss_kernel_unit_mass():
    t = 0.37
    mass, _ = integrate.quad(lambda z: gauss_kernel([z], t), -np.inf, np.inf, epsabs=1e-12)
    assert mass == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("t", [0.0, -1.0])
def test_gauss_kernel_rejects_nonpositive_time(t):
    with pytest.raises(DomainError):
        gauss_kernel([0.0], t)


def test_boundary_value_doubles():
    for t in (1e-3, 0.5, 7.0):
        assert green_1d(0.0, 0.0, t) == pytest.approx((math.pi * t) ** -0.5, rel=1e-14)


def test_query_validation():
    with pytest.raises(DomainError):
        KernelQuery((0.0,), (0.0,), 0.0)
    with pytest.raises(DomainError):
        KernelQuery((0.0, -1.0), (0.0, 1.0), 1.0)
    with pytest.raises(DomainError):
        KernelQuery((0.0,), (0.0, 1.0), 1.0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=2, max_size=2), heights, heights, times)
def test_green_symmetric(tangential, xn, yn, t):
    x = (tangential[0], xn)
    y = (tangential[1], yn)
    a = neumann_green(KernelQuery(x, y, t))
    b = neumann_green(KernelQuery(y, x, t))
    assert a >= 0
    assert a == b


@pytest.mark.parametrize("x", [0.0, 0.3, 1.0, 4.0])
@pytest.mark.parametrize("t", [1e-3, 0.1, 2.0])
def test_mass_conservation(x, t):
    edge = [0.0, x] if x > 0 else None
    mass, _ = integrate.quad(lambda y: green_1d(x, y, t), 0.0, x + 40 * math.sqrt(t), points=edge, epsabs=1e-12, limit=200)
    assert mass == pytest.approx(1.0, abs=1e-6)


@settings(max_examples=15, deadline=None)
@given(heights, heights, st.floats(0.05, 2.0), st.floats(0.05, 2.0))
def test_semigroup(x, y, t, s):
    reach = max(x, y) + 30 * math.sqrt(max(t, s))
    val, _ = integrate.quad(lambda z: green_1d(x, z, t) * green_1d(z, y, s), 0.0, reach, points=sorted({x, y}), epsabs=1e-12, limit=200)
    assert val == pytest.approx(green_1d(x, y, t + s), abs=1e-5)


def test_gaussian_growth_closed_form():
    lam = 0.25
    for t in (0.1, 0.5, 0.99):
        assert free_propagate(GaussianGrowth(lam), (0.0,), t, 1) == pytest.approx((1 - 4 * lam * t) ** -0.5, rel=1e-14)


def test_gaussian_growth_past_the_limit():
    with pytest.raises(LinearBlowupError):
        free_propagate(GaussianGrowth(0.25), (0.0,), 1.0, 1)


@pytest.mark.parametrize("x", [(0.0,), (2.5,), (1.0, 0.0), (0.3, -1.0, 2.0)])
def test_constant_is_invariant(x):
    assert free_propagate(Constant(3.5), x, 0.7, len(x)) == 3.5


def _trapezoid_free(profile, x, t, n=400_001):
    # trapezoid in u with y = u^2, which removes the y^-1/2 singularity
    reach = min(x + 12 * math.sqrt(t), 1.0)
    u = np.linspace(0.0, math.sqrt(reach), n)
    y = u * u
    with np.errstate(divide="ignore"):
        psi = np.array([eval_profile(profile, (v,)) for v in y[1:]])
    g = ((np.exp(-((x - y[1:]) ** 2) / (4 * t)) + np.exp(-((x + y[1:]) ** 2) / (4 * t))) / math.sqrt(4 * math.pi * t))
    f = np.concatenate([[0.0], psi * g * 2 * u[1:]])
    # for A = 1/2, psi(u^2) 2u = 2: the integrand is finite at u = 0
    f[0] = 2.0 * 2 / math.sqrt(4 * math.pi * t)
    return float(np.trapezoid(f, u))


def test_singular_free_evolution_against_trapezoid():
    prof = SingularLog(0.5, 0)
    got = free_propagate(prof, (0.0,), 0.01, 1)
    assert got == pytest.approx(_trapezoid_free(prof, 0.0, 0.01), rel=1e-5)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 3.0), st.floats(1e-3, 3.0))
def test_free_evolution_monotone_in_data(x, t):
    # (1 + r)^-2 <= (1 + r)^-1 pointwise
    low = free_propagate(PowerDecay(2), (x,), t, 1)
    high = free_propagate(PowerDecay(1), (x,), t, 1)
    assert low <= high * (1 + 1e-9)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=2, max_size=2), heights, heights, st.floats(1e-4, 50.0))
def test_green_nonnegative(tangential, xn, yn, t):
    x = (tangential[0], xn)
    y = (tangential[1], yn)
    assert neumann_green(KernelQuery(x, y, t)) >= 0.0
