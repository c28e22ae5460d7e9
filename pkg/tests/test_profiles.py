import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from lifespan_lab.errors import DomainError, RangeError
from lifespan_lab.profiles import (
    Constant,
    GaussianGrowth,
    PowerDecay,
    PowerLogSpec,
    SingularLog,
    admissible,
    eval_profile,
    half_ball_mass,
    parse_profile,
    phi_inverse,
    phi_orlicz,
    psi_inverse,
    psi_monotone_range,
    psi_power_log,
    radially_nonincreasing,
    rho,
)

C = 4.0  # bracket for asymptotic equivalences


@pytest.mark.parametrize(
    "profile, N, expected",
    [
        (SingularLog(1, 1), 1, False),
        (SingularLog(1, Fraction(11, 10)), 1, True),
        (SingularLog(0.5, -7), 1, True),
        (SingularLog(0, 0), 1, False),
        (SingularLog(0, 0.1), 1, True),
        (SingularLog(2, 0.5), 2, False),
        (SingularLog(2, 3), 2, True),
        (PowerDecay(3), 1, True),
        (GaussianGrowth(1), 3, True),
        (Constant(2), 2, True),
    ],
)
def test_admissible(profile, N, expected):
    assert admissible(profile, N) is expected


def test_singular_log_outside_dimension():
    assert not admissible(SingularLog(1.5, 5), 1)


@pytest.mark.parametrize(
    "profile, x, expected",
    [
        (SingularLog(0.5, 0), (0.25,), 2.0),
        (SingularLog(0.5, 0), (0.6, 0.8), 0.0),
        (PowerDecay(2), (1.0,), 0.25),
        (PowerDecay(2), (0.6, 0.8), 0.25),
        (GaussianGrowth(0.25), (7.0, 2.0), math.e),
        (Constant(1.5), (0.0,), 1.5),
    ],
)
def test_eval_profile(profile, x, expected):
    assert eval_profile(profile, x) == pytest.approx(expected, rel=1e-14)


def test_singular_value_at_origin_is_infinite():
    assert eval_profile(SingularLog(0.5, 2), (0.0,)) == math.inf


def test_eval_rejects_lower_half_space():
    with pytest.raises(DomainError):
        eval_profile(Constant(1), (0.0, -0.1))


@pytest.mark.parametrize(
    "text, expected",
    [
        ("singular-log:A=1/2,B=0", SingularLog(Fraction(1, 2), 0)),
        ("power-decay:A=2", PowerDecay(2)),
        ("gaussian-growth:lambda=0.25", GaussianGrowth(0.25)),
        ("constant:c=3", Constant(3)),
    ],
)
def test_parse_profile(text, expected):
    prof = parse_profile(text)
    assert prof == expected
    assert parse_profile(prof.spec()) == prof


@pytest.mark.parametrize("text", ["", "singular-log:A=1", "power-decay:B=1", "wiggle:A=1", "constant:c=x"])
def test_parse_profile_rejects(text):
    with pytest.raises(ValueError):
        parse_profile(text)


def test_phi_and_rho_values():
    assert phi_orlicz(0.0, 3) == 0.0
    assert phi_orlicz(1.0, 1) == pytest.approx(1.31326168751822, rel=1e-12)
    assert rho(1.0, 2) == pytest.approx(0.57977, rel=1e-4)
    with pytest.raises(DomainError):
        rho(0.0, 1)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_phi_and_rho_monotone(N):
    s = np.geomspace(1e-8, 1e8, 400)
    phi = np.array([phi_orlicz(v, N) for v in s])
    r = np.array([rho(v, N) for v in s])
    assert np.all(np.diff(phi) > 0)
    assert np.all(np.diff(r) < 0)


def test_phi_inverse_examples():
    assert phi_inverse(0.0, 2) == 0.0
    assert phi_inverse(phi_orlicz(3.7, 3), 3) == pytest.approx(3.7, abs=1e-10)


@settings(max_examples=200, deadline=None)
@given(st.floats(-8, 8), st.integers(1, 4))
def test_phi_inverse_round_trip(log10_s, N):
    s = 10.0**log10_s
    assert phi_inverse(phi_orlicz(s, N), N) == pytest.approx(s, rel=1e-10)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_phi_inverse_small_argument_equivalence(N):
    # Phi(s) ~ s for small s, so the natural normaliser is log(e + tau)
    for tau in np.geomspace(1e-8, 1e-2, 13):
        ratio = phi_inverse(tau, N) * math.log(math.e + tau) ** N / tau
        assert 1 / C <= ratio <= C


@pytest.mark.xfail(strict=True, reason="the stated normaliser log(e + 1/tau)^N grows without bound as tau -> 0")
def test_phi_inverse_equivalence_as_stated():
    for tau in np.geomspace(1e-8, 1e-2, 13):
        ratio = phi_inverse(tau, 1) * math.log(math.e + 1 / tau) / tau
        assert 1 / C <= ratio <= C


def test_psi_pure_power():
    spec = PowerLogSpec(0.5, 0.0)
    for tau in (1e-9, 1e-3, 0.2):
        assert psi_power_log(tau, spec) == pytest.approx(tau**0.5, rel=1e-14)
        assert psi_inverse(tau, spec) == pytest.approx(tau**2, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(-3.0, 3.0), st.floats(-12, -2))
def test_psi_round_trip(a1, a2, log10_tau):
    spec = PowerLogSpec(a1, a2)
    tau = 10.0**log10_tau
    assume(tau < psi_monotone_range(spec))
    assert psi_inverse(psi_power_log(tau, spec), spec) == pytest.approx(tau, rel=1e-12)


def test_psi_round_trip_example():
    spec = PowerLogSpec(0.5, -1.0)
    assert psi_inverse(psi_power_log(1e-4, spec), spec) == pytest.approx(1e-4, rel=1e-12)


def test_psi_inverse_equivalence_with_limit_constant():
    # log(e + 1/s) ~ log(1/tau) / a1 at s = Psi^-1(tau), so the ratio tends to
    # a1^(a2/a1) rather than 1; C brackets it around that limit
    a1, a2 = 0.75, 2.0
    spec = PowerLogSpec(a1, a2)
    limit = a1 ** (a2 / a1)
    for t in np.geomspace(1e-10, 1e-4, 13):
        ratio = psi_inverse(t, spec) / (t ** (1 / a1) * math.log(math.e + 1 / t) ** (-a2 / a1))
        assert 1 / C <= ratio / limit <= C


@pytest.mark.xfail(strict=True, reason="with a1 = 3/4, a2 = 2 the ratio is 0.12 to 0.22 on [1e-10, 1e-4], below 1/4")
def test_psi_inverse_equivalence_as_stated():
    spec = PowerLogSpec(0.75, 2.0)
    for t in np.geomspace(1e-10, 1e-4, 13):
        ratio = psi_inverse(t, spec) / (t ** (1 / 0.75) * math.log(math.e + 1 / t) ** (-2 / 0.75))
        assert 1 / C <= ratio <= C


def test_psi_monotone_range_detected():
    # a large a2 > 0 bends log Psi back down before tau reaches 1
    spec = PowerLogSpec(0.1, 3.0)
    top = psi_monotone_range(spec)
    assert math.isfinite(top)
    with pytest.raises(RangeError):
        psi_inverse(psi_power_log(top, spec) * 2, spec)


def test_half_ball_mass_examples():
    assert half_ball_mass(SingularLog(0.5, 0), 1.0, 1) == pytest.approx(2.0, abs=1e-10)
    assert half_ball_mass(Constant(3), 0.5, 1) == pytest.approx(1.5, abs=1e-10)
    for s in (1e-3, 0.5, 2.0):
        assert half_ball_mass(SingularLog(2, 0.5), s, 2) == math.inf


def test_half_ball_mass_closed_forms():
    # A = 1/2 in N = 2: pi * int_0^s r^(1/2) dr = (2 pi / 3) s^(3/2)
    for s in (0.01, 0.3, 1.0):
        assert half_ball_mass(SingularLog(0.5, 0), s, 2) == pytest.approx(2 * math.pi / 3 * s**1.5, rel=1e-10)
    # support ends at r = 1
    assert half_ball_mass(SingularLog(0.5, 0), 5.0, 1) == pytest.approx(2.0, abs=1e-10)
    # N = 3 constant: half of the ball volume
    assert half_ball_mass(Constant(1), 2.0, 3) == pytest.approx(16 * math.pi / 3, rel=1e-12)


@pytest.mark.parametrize("A, B, N", [(0.5, 0, 1), (0.5, 2, 1), (1.5, -1, 2), (0.3, 4, 3)])
def test_half_ball_mass_scaling(A, B, N):
    prof = SingularLog(A, B)
    sig = np.geomspace(1e-6, 1e-1, 11)
    mass = np.array([half_ball_mass(prof, s, N) for s in sig])
    assert np.all(np.diff(mass) > 0)
    ratio = mass / (sig ** (N - A) * np.log(math.e + 1 / sig) ** (-B))
    assert ratio.max() / ratio.min() <= C


def test_power_decay_radially_nonincreasing():
    r = np.linspace(0, 50, 500)
    vals = [eval_profile(PowerDecay(0.7), (v,)) for v in r]
    assert np.all(np.diff(vals) <= 0)


@pytest.mark.parametrize(
    "profile, expected",
    [
        (Constant(1), True),
        (PowerDecay(0.5), True),
        (GaussianGrowth(1), False),
        (SingularLog(1, 3), True),
        (SingularLog(0.5, -2), True),
        (SingularLog(0.4, 3), False),
        (SingularLog(0, 1), False),
    ],
)
def test_radially_nonincreasing(profile, expected):
    assert radially_nonincreasing(profile) is expected
