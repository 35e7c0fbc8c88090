import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from qperceptron.evolve import (
    DistanceReport,
    distance_C,
    final_ground_fidelity,
    final_state,
    propagate,
    protocol_initial_state,
    read_transfer_csv,
    transfer_function,
    write_transfer_csv,
)
from qperceptron.ie_synth import (
    Pulse,
    SynthesisConfig,
    dynamical_state,
    synthesize,
)
from qperceptron.model import QubitState, ansatz_state, ground_state

PAPER = dict(kappa=2000.0, omega_f=1.0, y=12.0, epsilon=5e-5)


def constant_pulse(omega_value, t_f=1.0, n=20000):
    grid = np.linspace(0.0, t_f, n)
    return Pulse(
        grid=grid, omega=np.full(n, float(omega_value)), provenance="IE-cubic",
        omega_f=float(omega_value),
    )


@pytest.fixture(scope="module")
def cubic_tf1():
    return synthesize(SynthesisConfig(t_f=1.0, degree=3, **PAPER))


@pytest.fixture(scope="module")
def cubic_tf015():
    return synthesize(SynthesisConfig(t_f=0.15, degree=3, **PAPER))


@pytest.fixture(scope="module")
def quintic_tf015():
    return synthesize(
        SynthesisConfig(t_f=0.15, degree=5, free_coeffs=(-50.0, -3980.0), **PAPER)
    )


def test_sigma_z_eigenstate_is_stationary():
    pulse = constant_pulse(0.0, t_f=2.0, n=2000)
    traj = propagate(pulse, 3.0, QubitState(amp0=0.0, amp1=1.0))
    assert np.max(np.abs(traj.prob_excited - 1.0)) < 1e-12


def test_rabi_oracle():
    # x = 0, constant Omega, |0> start: P(t) = sin^2(Omega t / 2)
    omega = 2.0
    pulse = constant_pulse(omega, t_f=10.0, n=20000)
    traj = propagate(pulse, 0.0, QubitState(amp0=1.0, amp1=0.0))
    expected = np.sin(0.5 * omega * traj.times) ** 2
    assert np.max(np.abs(traj.prob_excited - expected)) < 1e-8


def test_norm_drift(cubic_tf1):
    psi0 = protocol_initial_state(cubic_tf1.pulse)
    for x in (-12.0, 0.0, 12.0):
        traj = propagate(cubic_tf1.pulse, x, psi0)
        assert np.max(np.abs(traj.norms - 1.0)) < 1e-9


def test_final_state_matches_trajectory(cubic_tf1):
    psi0 = protocol_initial_state(cubic_tf1.pulse)
    tail = propagate(cubic_tf1.pulse, 5.0, psi0).final_state()
    fast = final_state(cubic_tf1.pulse, 5.0, psi0)
    assert abs(tail.amp0 - fast.amp0) < 1e-12
    assert abs(tail.amp1 - fast.amp1) < 1e-12


def test_against_ode_oracle(cubic_tf1):
    # independent route: solve the Schroedinger equation with an adaptive
    # integrator on the linearly interpolated field
    pulse = cubic_tf1.pulse
    psi0 = protocol_initial_state(pulse)
    x = 12.0

    def rhs(t, psi):
        om = np.interp(t, pulse.grid, pulse.omega)
        a1, a0 = psi[0] + 1j * psi[1], psi[2] + 1j * psi[3]
        d1 = 1j * 0.5 * (x * a1 + om * a0)
        d0 = 1j * 0.5 * (om * a1 - x * a0)
        return [d1.real, d1.imag, d0.real, d0.imag]

    start = [psi0.amp1.real, psi0.amp1.imag, psi0.amp0.real, psi0.amp0.imag]
    sol = solve_ivp(rhs, (0.0, pulse.t_f), start, rtol=1e-11, atol=1e-11)
    ref1 = sol.y[0][-1] + 1j * sol.y[1][-1]
    got = final_state(pulse, x, psi0)
    assert abs(got.amp1 - ref1) < 1e-6


def test_protocol_initial_state_near_plus(cubic_tf1):
    psi0 = protocol_initial_state(cubic_tf1.pulse)
    plus = ansatz_state(math.pi / 2, 0.0)  # (|0> + |1>)/sqrt(2)
    assert abs(plus.overlap(psi0)) >= 1.0 - 1e-5
    assert abs(psi0.amp0) ** 2 + abs(psi0.amp1) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_ansatz_self_consistency(cubic_tf1, quintic_tf015):
    # propagating the designed initial state at x = y must track the Bloch
    # trajectory (theta, beta) at every grid point
    for result in (cubic_tf1, quintic_tf015):
        pulse, beta = result.pulse, result.beta
        theta = result.theta
        psi0 = dynamical_state(theta.theta(0.0), beta.beta[0])
        traj = propagate(pulse, 12.0, psi0)
        worst = 1.0
        for k in range(0, len(pulse.grid), 97):
            target = dynamical_state(theta.theta(pulse.grid[k]), beta.beta[k])
            ov = abs(
                np.conj(target.amp1) * traj.amp1[k]
                + np.conj(target.amp0) * traj.amp0[k]
            )
            worst = min(worst, ov)
        assert worst >= 1.0 - 1e-6


def test_transfer_cubic_long_time(cubic_tf1):
    curve = transfer_function(cubic_tf1.pulse)
    p_plus = curve.excitation[-1]
    assert curve.x_over_omega_f[-1] == pytest.approx(12.0)
    assert p_plus == pytest.approx(0.998, abs=2e-3)


def test_transfer_cubic_short_time(cubic_tf015):
    curve = transfer_function(cubic_tf015.pulse, np.array([-12.0, 12.0]))
    assert curve.excitation[0] == pytest.approx(0.2, abs=0.05)
    assert curve.excitation[1] >= 0.99


def test_transfer_quintic_short_time(quintic_tf015):
    curve = transfer_function(quintic_tf015.pulse, np.array([-12.0, 12.0]))
    assert curve.excitation[0] == pytest.approx(0.008, abs=0.005)
    assert curve.excitation[1] == pytest.approx(0.998, abs=2e-3)


def test_distance_definition_exact():
    report = DistanceReport(f0=1.0, f1=1.0)
    assert report.c == 0.0
    report = DistanceReport(f0=0.7, f1=0.85)
    assert report.c == 2.0 - 0.7 - 0.85


def test_distance_quintic(quintic_tf015):
    report = distance_C(quintic_tf015.pulse, 12.0)
    assert report.c == pytest.approx(0.0087, abs=0.004)
    assert report.c <= 0.02


def test_distance_rejects_nonpositive_width(cubic_tf1):
    with pytest.raises(ValueError):
        distance_C(cubic_tf1.pulse, 0.0)


def test_grid_convergence_of_observables():
    base = SynthesisConfig(t_f=1.0, degree=3, **PAPER)
    fine = SynthesisConfig(t_f=1.0, degree=3, n_time=39999, **PAPER)
    c_base = distance_C(synthesize(base).pulse, 12.0).c
    c_fine = distance_C(synthesize(fine).pulse, 12.0).c
    assert abs(c_base - c_fine) < 1e-5


def test_sigmoid_shape_for_accepted_pulse(cubic_tf1):
    report = distance_C(cubic_tf1.pulse, 12.0)
    assert report.c < 0.01
    curve = transfer_function(cubic_tf1.pulse)
    assert np.all(np.diff(curve.excitation) > 0.0)
    assert np.sum(np.diff(np.sign(curve.excitation - 0.5)) != 0) == 1


def test_final_ground_fidelity(cubic_tf1):
    assert final_ground_fidelity(cubic_tf1.pulse, 12.0) >= 0.998
    assert final_ground_fidelity(cubic_tf1.pulse, 0.0) == pytest.approx(1.0, abs=1e-3)
    value = final_ground_fidelity(constant_pulse(1.5, 0.4, 2000), -3.0)
    assert 0.0 <= value <= 1.0


def test_transfer_curve_validation():
    with pytest.raises(ValueError):
        transfer_function(
            constant_pulse(1.0, 0.1, 1000), np.array([1.0, 1.0])
        )


def test_transfer_csv_roundtrip(tmp_path, cubic_tf015):
    curve = transfer_function(cubic_tf015.pulse, np.linspace(-12, 12, 25))
    path = tmp_path / "transfer.csv"
    write_transfer_csv(curve, path, "cafe")
    back = read_transfer_csv(path)
    assert np.array_equal(back.x_over_omega_f, curve.x_over_omega_f)
    assert np.array_equal(back.excitation, curve.excitation)


def test_ground_fidelity_target_phase_insensitive(cubic_tf1):
    # fidelity compares against the ground state, so a branch-global phase
    # on the evolved state cannot change it
    psi0 = protocol_initial_state(cubic_tf1.pulse)
    f1 = final_ground_fidelity(cubic_tf1.pulse, 7.0, psi0)
    rotated = QubitState(amp0=psi0.amp0 * 1j, amp1=psi0.amp1 * 1j)
    f2 = final_ground_fidelity(cubic_tf1.pulse, 7.0, rotated)
    assert f1 == pytest.approx(f2, abs=1e-12)


def test_ground_state_target_values(cubic_tf1):
    # the transfer endpoints approach the designed populations f(+/-12)
    curve = transfer_function(cubic_tf1.pulse, np.array([-12.0, 12.0]))
    assert curve.excitation[1] == pytest.approx(
        ground_state(12.0, 1.0).prob_excited, abs=2e-3
    )
