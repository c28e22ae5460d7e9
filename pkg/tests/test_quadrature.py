import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from lifespan_lab.errors import DomainError
from lifespan_lab.profiles import Constant, GaussianGrowth, PowerDecay, SingularLog, eval_profile, half_ball_mass, unit_ball_volume
from lifespan_lab.quadrature import (
    AverageRequest,
    CenterSearchPolicy,
    GaussianDecay,
    NoWeight,
    Orlicz,
    average,
    half_ball_measure,
    integrate_half_ball,
    sup_average_over_centers,
)

PROFILES = [SingularLog(0.5, 0), SingularLog(0.3, 2), SingularLog(1, 3), PowerDecay(0.5), PowerDecay(2), Constant(2)]

profiles = st.sampled_from(PROFILES)
sigmas = st.floats(1e-3, 3.0)
centers = st.floats(0.0, 3.0)
dims = st.integers(1, 3)


def test_constant_average():
    for N in (1, 2, 3):
        for c in (0.0, 0.4, 5.0):
            assert average(AverageRequest(Constant(3), 2.0, c, 0.7, N)) == pytest.approx(6.0, rel=1e-12)


def test_singular_averages():
    prof = SingularLog(0.5, 0)
    assert average(AverageRequest(prof, 1.0, 0.0, 1.0, 1)) == pytest.approx(2.0, rel=1e-10)
    assert average(AverageRequest(prof, 1.0, 0.0, 1.0, 1, power=1.5)) == pytest.approx(4.0, rel=1e-10)


def test_divergent_average_is_infinite():
    req = AverageRequest(SingularLog(0.5, 0), 1.0, 0.0, 0.5, 1, power=2.0)
    assert average(req) == math.inf
    # a ball away from the origin does not see the singularity
    assert math.isfinite(average(req.at(0.6)))


@pytest.mark.parametrize("N", [1, 2, 3])
def test_half_ball_measure(N):
    V = unit_ball_volume(N)
    assert half_ball_measure(0.0, 2.0, N) == pytest.approx(V * 2.0**N / 2, rel=1e-14)
    assert half_ball_measure(2.0, 2.0, N) == pytest.approx(V * 2.0**N, rel=1e-14)
    # slice the ball at height h: cross-sections are (N-1)-balls
    c, s = 0.3, 1.0
    Vm = unit_ball_volume(N - 1)
    sliced, _ = integrate.quad(lambda h: Vm * (s * s - (h - c) ** 2) ** ((N - 1) / 2), 0.0, c + s, epsabs=1e-13)
    assert half_ball_measure(c, s, N) == pytest.approx(sliced, rel=1e-10)


def test_request_validation():
    with pytest.raises(DomainError):
        AverageRequest(Constant(1), 1.0, 0.0, 0.0, 1)
    with pytest.raises(DomainError):
        AverageRequest(Constant(1), 1.0, 0.0, 1.0, 1, power=0.5)
    with pytest.raises(DomainError):
        GaussianDecay(0.0)


@settings(max_examples=40, deadline=None)
@given(profiles, centers, sigmas, dims, st.floats(0.01, 100.0))
def test_average_linear_in_kappa(profile, c, s, N, kappa):
    one = average(AverageRequest(profile, kappa, c, s, N))
    two = average(AverageRequest(profile, 2 * kappa, c, s, N))
    assert two == pytest.approx(2 * one, rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(profiles, centers, sigmas, dims, st.floats(1e-3, 10.0))
def test_weight_only_lowers_the_average(profile, c, s, N, lam):
    plain = average(AverageRequest(profile, 1.0, c, s, N))
    weighted = average(AverageRequest(profile, 1.0, c, s, N, GaussianDecay(lam)))
    assert weighted <= plain * (1 + 1e-9)


@settings(max_examples=25, deadline=None)
@given(profiles, sigmas, st.integers(1, 2), st.sampled_from([NoWeight(), GaussianDecay(0.3)]))
def test_sup_dominates_origin(profile, s, N, weight):
    req = AverageRequest(profile, 1.0, 0.0, s, N, weight)
    sup = sup_average_over_centers(req)
    assert not sup.unbounded
    assert sup.value >= average(req) * (1 - 1e-9)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(PROFILES[:3]), st.floats(0.0, 2.0), st.floats(0.0, 2.0), dims)
def test_supported_mass_cross_check(profile, c, extra, N):
    s = 1 + c + extra
    got = average(AverageRequest(profile, 1.0, c, s, N))
    assert got == pytest.approx(half_ball_mass(profile, 1.0, N) / half_ball_measure(c, s, N), rel=1e-8)


def test_integral_matches_mass_at_origin():
    for prof in PROFILES:
        for N in (1, 2, 3):
            got = integrate_half_ball(AverageRequest(prof, 1.0, 0.0, 0.37, N))
            assert got == pytest.approx(half_ball_mass(prof, 0.37, N), rel=1e-9)


@pytest.mark.parametrize("profile", [SingularLog(0.5, 0), SingularLog(1, 3), SingularLog(0.5, -2)])
@pytest.mark.parametrize("s", [0.05, 0.5, 2.0])
def test_decreasing_singular_argmax_at_origin(profile, s):
    req = AverageRequest(profile, 1.0, 0.0, s, 1)
    brute = max(average(req.at(c)) for c in np.linspace(0.0, 3.0, 301))
    sup = sup_average_over_centers(req, CenterSearchPolicy(use_symmetry=False))
    assert sup.center == 0.0
    assert sup.value >= brute * (1 - 1e-9)


def test_non_monotone_singular_argmax_matches_brute_force():
    # r^-0.3 log(e + 1/r)^-2 rises between r ~ 0.01 and the edge of its support
    req = AverageRequest(SingularLog(0.3, 2), 1.0, 0.0, 0.05, 1)
    cs = np.linspace(0.0, 1.0, 2001)
    vals = [average(req.at(c)) for c in cs]
    sup = sup_average_over_centers(req)
    assert sup.center > 0.5
    assert sup.value >= max(vals) * (1 - 1e-9)
    assert sup.value <= max(vals) * (1 + 1e-4)


@pytest.mark.parametrize("N", [1, 2])
@pytest.mark.parametrize("T", [0.01, 1.0, 30.0])
def test_constant_weighted_argmax_at_origin(N, T):
    lam = 0.5 / (4 * T)
    req = AverageRequest(Constant(1), 1.0, 0.0, math.sqrt(T), N, GaussianDecay(lam))
    sup = sup_average_over_centers(req, CenterSearchPolicy(use_symmetry=False))
    assert sup.center == 0.0
    assert sup.value == pytest.approx(average(req), rel=1e-12)


def _brute_average_2d(profile, centre, s, lam, n=60):
    # polar grid around the centre, points below y_2 = 0 dropped
    r = (np.arange(n) + 0.5) / n * s
    th = (np.arange(4 * n) + 0.5) / (4 * n) * 2 * math.pi
    R, TH = np.meshgrid(r, th)
    y1 = centre[0] + R * np.cos(TH)
    y2 = centre[1] + R * np.sin(TH)
    keep = y2 >= 0
    vals = np.array([eval_profile(profile, (a, b)) for a, b in zip(y1[keep], y2[keep])])
    w = R[keep]
    return float(np.sum(vals * np.exp(-lam * y2[keep] ** 2) * w) / np.sum(w))


@pytest.mark.parametrize("profile", [PowerDecay(1), Constant(1)])
@pytest.mark.parametrize("lam", [0.0, 0.4])
def test_axis_search_beats_full_grid(profile, lam):
    s = 0.8
    weight = GaussianDecay(lam) if lam > 0 else NoWeight()
    sup = sup_average_over_centers(AverageRequest(profile, 1.0, 0.0, s, 2, weight), CenterSearchPolicy(use_symmetry=False))
    grid = [(a, b) for a in np.linspace(-2, 2, 9) for b in np.linspace(0, 3, 7)]
    brute = max(_brute_average_2d(profile, c, s, lam) for c in grid)
    # the brute-force quadrature is coarse; 1e-3 covers its error
    assert brute <= sup.value * (1 + 1e-3)


def test_gaussian_growth_unbounded_when_weight_is_weaker():
    req = AverageRequest(GaussianGrowth(0.5), 1.0, 0.0, 1.0, 1, GaussianDecay(0.3))
    assert sup_average_over_centers(req).unbounded


def test_gaussian_growth_bounded_when_weight_is_stronger():
    req = AverageRequest(GaussianGrowth(0.2), 1.0, 0.0, 1.0, 1, GaussianDecay(0.3))
    sup = sup_average_over_centers(req)
    assert not sup.unbounded
    assert sup.value == pytest.approx(average(req.at(0.0)), rel=1e-12)


def test_exact_cancellation_averages_to_kappa():
    # exp(-lam y^2) kappa exp(lam y^2) = kappa
    req = AverageRequest(GaussianGrowth(0.25), 3.0, 5.0, 2.0, 1, GaussianDecay(0.25))
    assert average(req) == pytest.approx(3.0, rel=1e-12)


def test_orlicz_average_of_constant():
    N = 2
    req = AverageRequest(Constant(2), 1.5, 0.0, 0.5, N, Orlicz(4.0))
    s = 4.0 * 1.5 * 2
    assert average(req) == pytest.approx(s * math.log(math.e + s) ** N, rel=1e-12)


def test_cutoff_keeps_only_the_slab():
    # constant data: the average over B_+(0, 1) restricted to y_N < 1/2
    req = AverageRequest(Constant(1), 1.0, 0.0, 1.0, 1, cutoff=(0.0, 0.5))
    assert integrate_half_ball(req) == pytest.approx(0.5, rel=1e-12)
    req = AverageRequest(Constant(1), 1.0, 0.0, 1.0, 1, cutoff=(2.0, math.inf))
    assert integrate_half_ball(req) == 0.0


@pytest.mark.parametrize("profile", [PowerDecay(2), SingularLog(0.5, 0), SingularLog(0.3, 2)])
@pytest.mark.parametrize("N", [2, 3])
@pytest.mark.parametrize("c, s", [(0.0, 0.3), (0.2, 0.5), (0.5, 0.5), (0.7, 0.5), (0.9, 0.2), (3.0, 1.0), (1e-3, 1e-2)])
def test_radial_shortcut_matches_full_angular_quadrature(profile, N, c, s):
    # a vanishing y_N weight routes the same integral through the two-dimensional path
    shells = integrate_half_ball(AverageRequest(profile, 1.0, c, s, N))
    polar = integrate_half_ball(AverageRequest(profile, 1.0, c, s, N, GaussianDecay(1e-300)))
    assert shells == pytest.approx(polar, rel=2e-9)
