import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ghzpulse.pulses import Pulse, make_lemniscate, make_pulse, make_rectangular
from ghzpulse.trajectory import (
    PhaseTrajectory,
    chi_phase,
    integrate_trajectory,
    lemniscate_closed_forms,
    lemniscate_design_point,
    lemniscate_shape_polynomial,
    magnus_coefficients,
    rectangular_closed_forms,
)

FAMILIES = ["rectangular", "echoed_rectangular", "lemniscate", "echoed_lemniscate"]


def test_zero_pulse_gives_zero_trajectory():
    p = Pulse(shape=lambda t: np.zeros_like(t, dtype=complex), detuning=1.0, t_gate=1.0)
    traj = integrate_trajectory(p, 0.03, n_steps=128)
    assert np.all(traj.alpha == 0)
    assert chi_phase(traj) == 0


@pytest.mark.parametrize("k", [1, 2, 4])
def test_rectangular_circle_radius(k):
    traj = integrate_trajectory(make_rectangular(k, 1.0, 0.03), 0.03)
    r = 1 / (4 * math.sqrt(k))
    centre = -r  # alpha = r (exp(-i delta t) - 1)
    radius = np.abs(traj.alpha - centre)
    assert np.allclose(radius, r, atol=1e-12)
    assert traj.max_radius == pytest.approx(1 / (2 * math.sqrt(k)), rel=1e-6)
    assert traj.closure < 1e-12
    assert traj.t[0] == 0 and traj.alpha[0] == 0
    assert np.all(np.diff(traj.t) > 0)


def test_unit_circle_orientation():
    t = np.linspace(0.0, 1.0, 4097)
    phi = 2 * np.pi * t
    # Counterclockwise unit circle through the origin.
    traj = PhaseTrajectory(t=t, alpha=np.exp(1j * phi) - 1.0, velocity=2j * np.pi * np.exp(1j * phi), eta=0.03)
    assert chi_phase(traj) == pytest.approx(-4 * math.pi, rel=1e-12)
    assert chi_phase(traj.reversed()) == pytest.approx(4 * math.pi, rel=1e-12)


def test_from_samples_uses_spline_velocity():
    t = np.linspace(0.0, 1.0, 2049)
    traj = PhaseTrajectory.from_samples(t, np.exp(-2j * np.pi * t) - 1.0, eta=0.03)
    assert chi_phase(traj) == pytest.approx(4 * math.pi, rel=1e-6)


@pytest.mark.parametrize("k", [1, 2, 4, 8])
@pytest.mark.parametrize("eta", [0.02, 0.03, 0.05])
def test_rectangular_closed_forms(k, eta):
    c = magnus_coefficients(integrate_trajectory(make_rectangular(k, 1.0, eta), eta))
    ref = rectangular_closed_forms(k, eta)
    assert c.chi == pytest.approx(ref["chi"], rel=1e-9)
    assert c.theta4 == pytest.approx(ref["theta4"], rel=1e-9)
    assert abs(c.g) == pytest.approx(ref["abs_g"], rel=1e-9)


def test_rectangular_k1_values():
    ref = rectangular_closed_forms(1, 0.03)
    assert ref["theta4"] == pytest.approx(-1.06029e-3, rel=1e-5)
    assert ref["abs_g"] == pytest.approx(1.41372e-3, rel=1e-5)


@pytest.mark.parametrize("family", FAMILIES)
def test_closed_trajectory_cancellations(family):
    eta = 0.03
    c = magnus_coefficients(integrate_trajectory(make_pulse(family, 1.0, eta, k=2), eta))
    assert abs(c.sigma) <= 1e-10
    assert abs(c.g2) <= 1e-10
    assert c.h == pytest.approx(2 * eta ** 2 * c.chi, rel=1e-9)
    assert c.theta4_is_real
    if family.startswith("echoed_"):
        assert abs(c.g) <= 1e-10


def test_design_point_values():
    a0, A0 = lemniscate_design_point()
    assert a0 == pytest.approx(0.7274789, abs=1e-6)
    assert A0 == pytest.approx(0.95778915, abs=1e-6)
    assert abs(lemniscate_shape_polynomial(0.7274789)) < 1e-5
    assert A0 == pytest.approx(1 / (2 * math.sqrt(1 - a0)), rel=1e-15)


@pytest.mark.parametrize("eta", [0.02, 0.03, 0.05])
def test_design_point_cancels_theta4(eta):
    a0, A0 = lemniscate_design_point()
    c = magnus_coefficients(integrate_trajectory(make_lemniscate(a0, A0, 1.0, eta), eta))
    assert c.chi == pytest.approx(math.pi / 4, abs=1e-8)
    assert abs(c.theta4) <= 1e-8 * eta ** 2


@settings(max_examples=20, deadline=None)
@given(a=st.floats(0.55, 1.0), A=st.floats(0.3, 1.5))
def test_lemniscate_closed_forms_match_quadrature(a, A):
    eta = 0.03
    c = magnus_coefficients(integrate_trajectory(make_lemniscate(a, A, 1.0, eta), eta))
    ref = lemniscate_closed_forms(a, A, eta)
    assert c.chi == pytest.approx(ref["chi"], rel=1e-9, abs=1e-12)
    assert c.theta4 == pytest.approx(ref["theta4"], rel=1e-8, abs=1e-13)


@pytest.mark.parametrize("family", FAMILIES)
def test_orientation_antisymmetry(family):
    eta = 0.03
    traj = integrate_trajectory(make_pulse(family, 1.0, eta), eta)
    fwd, back = magnus_coefficients(traj), magnus_coefficients(traj.reversed())
    assert back.chi == pytest.approx(-fwd.chi, rel=1e-12, abs=1e-14)
    assert back.theta4 == pytest.approx(-fwd.theta4, rel=1e-10, abs=1e-16)


@pytest.mark.parametrize("family", FAMILIES)
def test_quadrature_converged(family):
    eta = 0.03
    p = make_pulse(family, 1.0, eta, k=2)
    c1 = magnus_coefficients(integrate_trajectory(p, eta))
    c2 = magnus_coefficients(integrate_trajectory(p, eta, n_steps=8192))
    scale = eta ** 2
    assert abs(c1.chi - c2.chi) <= 1e-8 * abs(c2.chi)
    assert abs(c1.theta4 - c2.theta4) <= 1e-8 * max(abs(c2.theta4), scale)
    assert abs(c1.g - c2.g) <= 1e-8 * max(abs(c2.g), scale)


def test_breakpoint_must_sit_on_even_node():
    p = make_pulse("echoed_rectangular", 1.0, 0.03)
    with pytest.raises(ValueError):
        integrate_trajectory(p, 0.03, n_steps=130)  # 65 is odd
    with pytest.raises(ValueError):
        integrate_trajectory(p, 0.03, n_steps=63)


def test_trajectory_csv(tmp_path):
    traj = integrate_trajectory(make_rectangular(1), 0.03, n_steps=64)
    lines = traj.to_csv(tmp_path / "traj.csv").read_text().splitlines()
    assert lines[0] == "t,re_alpha,im_alpha"
    assert len(lines) == 66
