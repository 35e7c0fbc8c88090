import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from qperceptron.ie_synth import (
    ConfigError,
    SynthesisConfig,
    SynthesisFailure,
    ThetaAnsatz,
    boundary_conditions,
    dynamical_state,
    extract_pulse,
    integrate_beta,
    read_pulse_csv,
    solve_theta,
    synthesize,
    write_pulse_csv,
)

PAPER = dict(kappa=2000.0, omega_f=1.0, y=12.0, epsilon=5e-5)


@pytest.fixture(scope="module")
def cubic_tf1():
    return synthesize(SynthesisConfig(t_f=1.0, degree=3, **PAPER))


def test_boundary_values_paper_case():
    cfg = SynthesisConfig(t_f=1.0, **PAPER)
    theta0, theta_f, dtheta0, dtheta_f = boundary_conditions(cfg)
    assert theta0 == pytest.approx(1.576, abs=1e-3)
    assert theta0 == pytest.approx(1.5767962547964518, abs=1e-12)
    # direct evaluation of 2 asin sqrt(f(12)), f(12) = 0.99827...
    assert theta_f == pytest.approx(
        2 * math.asin(math.sqrt(0.5 * (1 + 12 / math.sqrt(145)))), abs=0
    )
    assert theta_f == pytest.approx(3.058451421701351, abs=1e-12)
    assert dtheta0 == pytest.approx(2000.0 * math.sin(5e-5), abs=0)
    assert dtheta_f == 1.0  # Omega_f * sin(pi/2)


def test_boundary_conditions_subtract_bias():
    base = boundary_conditions(SynthesisConfig(t_f=1.0, **PAPER))
    biased = boundary_conditions(
        SynthesisConfig(t_f=1.0, kappa=2000.0, omega_f=1.0, y=14.0, epsilon=5e-5,
                        bias=2.0)
    )
    assert biased == base


def test_solve_theta_constant_solution():
    ansatz = solve_theta((math.pi / 2, math.pi / 2, 0.0, 0.0), t_f=1.0, degree=3)
    assert ansatz.coeffs[0] == pytest.approx(math.pi / 2, abs=1e-14)
    assert all(abs(a) < 1e-14 for a in ansatz.coeffs[1:])


def _boundary_residuals(ansatz, boundary):
    theta0, theta_f, dtheta0, dtheta_f = boundary
    return (
        abs(ansatz.theta(0.0) - theta0),
        abs(ansatz.theta(ansatz.t_f) - theta_f),
        abs(ansatz.theta_dot(0.0) - dtheta0),
        abs(ansatz.theta_dot(ansatz.t_f) - dtheta_f),
    )


def test_solve_theta_paper_quintic_residuals():
    cfg = SynthesisConfig(t_f=0.15, degree=5, free_coeffs=(-50.0, -3980.0), **PAPER)
    boundary = boundary_conditions(cfg)
    ansatz = solve_theta(boundary, 0.15, 5, (-50.0, -3980.0))
    assert ansatz.coeffs[2] == -50.0
    assert ansatz.coeffs[3] == -3980.0
    assert max(_boundary_residuals(ansatz, boundary)) < 1e-10


def test_solve_theta_paper_cubic_residuals():
    cfg = SynthesisConfig(t_f=1.0, **PAPER)
    boundary = boundary_conditions(cfg)
    assert max(_boundary_residuals(solve_theta(boundary, 1.0), boundary)) < 1e-10


@settings(max_examples=60, deadline=None)
@given(
    st.floats(0.1, 3.0), st.floats(0.1, 3.0), st.floats(-5.0, 5.0),
    st.floats(-5.0, 5.0), st.floats(0.05, 2.0),
    st.sampled_from([3, 4, 5]), st.floats(-100.0, 100.0), st.floats(-500.0, 500.0),
)
def test_solve_theta_residuals_property(v0, vf, d0, df, t_f, degree, a2, a3):
    free = {3: (), 4: (a2,), 5: (a2, a3)}[degree]
    boundary = (v0, vf, d0, df)
    ansatz = solve_theta(boundary, t_f, degree, free)
    assert max(_boundary_residuals(ansatz, boundary)) < 1e-10


def test_solve_theta_rejects_degenerate_time():
    with pytest.raises(SynthesisFailure):
        solve_theta((1.0, 2.0, 0.0, 1.0), t_f=0.0)


def test_solve_theta_rejects_bad_free_coeffs():
    with pytest.raises(ConfigError):
        solve_theta((1.0, 2.0, 0.0, 1.0), t_f=1.0, degree=4, free_coeffs=())
    with pytest.raises(ConfigError):
        solve_theta((1.0, 2.0, 0.0, 1.0), t_f=1.0, degree=6, free_coeffs=(0.0,))


def test_integrate_beta_constant_theta_closed_form():
    # theta = pi/2 kills the cot(theta) term, so beta(t) = pi/2 + y (t_f - t)
    ansatz = ThetaAnsatz(coeffs=(math.pi / 2, 0.0, 0.0, 0.0), t_f=1.0)
    y = 0.8
    traj = integrate_beta(ansatz, y, n_time=2001)
    expected = math.pi / 2 + y * (1.0 - traj.grid)
    assert np.max(np.abs(traj.beta - expected)) < 1e-9


def test_integrate_beta_terminal_condition_exact(cubic_tf1):
    assert cubic_tf1.beta.beta[-1] == math.pi / 2


def test_integrate_beta_paper_epsilon(cubic_tf1):
    # the backward solution lands on beta(0) = pi - epsilon
    assert cubic_tf1.beta.epsilon_achieved == pytest.approx(5e-5, rel=0.5)


def test_integrate_beta_no_branch_crossing(cubic_tf1):
    assert np.all(np.sin(cubic_tf1.beta.beta) > 0.0)


def test_beta_roundtrip_forward():
    # mild design without the pi-attractor: forward re-integration is
    # well-conditioned and must return to pi/2 (independent integrator)
    ansatz = solve_theta((math.pi / 2, 2.0, 0.5, 1.0), t_f=0.3, degree=3)
    y = 1.0
    traj = integrate_beta(ansatz, y, n_time=2001)

    def rhs(t, b):
        th = ansatz.theta(t)
        return ansatz.theta_dot(t) * (math.cos(th) / math.sin(th)) * (
            math.cos(b[0]) / math.sin(b[0])
        ) - y

    sol = solve_ivp(rhs, (0.0, 0.3), [traj.beta[0]], rtol=1e-12, atol=1e-12)
    assert abs(sol.y[0][-1] - math.pi / 2) < 1e-6


def test_grid_convergence_halved_step():
    cfg = SynthesisConfig(t_f=1.0, degree=3, **PAPER)
    coarse = synthesize(cfg).pulse
    fine = synthesize(SynthesisConfig(t_f=1.0, degree=3, n_time=39999, **PAPER)).pulse
    assert np.allclose(fine.grid[::2], coarse.grid, rtol=0, atol=1e-12)
    scale = np.max(np.abs(coarse.omega))
    assert np.max(np.abs(fine.omega[::2] - coarse.omega)) / scale < 1e-4


def test_extract_pulse_terminal_value(cubic_tf1):
    assert cubic_tf1.pulse.omega[-1] == pytest.approx(1.0, abs=1e-6)


def test_extract_pulse_constant_theta_zero_field():
    ansatz = ThetaAnsatz(coeffs=(math.pi / 2, 0.0, 0.0, 0.0), t_f=1.0)
    traj = integrate_beta(ansatz, 0.5, n_time=2001)
    pulse = extract_pulse(ansatz, traj)
    assert np.max(np.abs(pulse.omega)) < 1e-12


def test_pulse_opening_field_matches_kappa(cubic_tf1):
    assert cubic_tf1.pulse.omega[0] == pytest.approx(2000.0, rel=0.01)


def test_synthesize_diagnostics(cubic_tf1):
    diag = cubic_tf1.diagnostics
    assert diag["omega_start"] == pytest.approx(2000.0, rel=0.01)
    assert diag["epsilon_achieved"] == pytest.approx(5e-5, rel=0.5)
    assert not diag["clamped"]
    assert len(diag["config_hash"]) == 64


def test_synthesize_quintic_opens_near_zero():
    cfg = SynthesisConfig(t_f=0.15, degree=5, free_coeffs=(-50.0, -3980.0), **PAPER)
    pulse = synthesize(cfg).pulse
    assert abs(pulse.omega[0]) < 20.0
    assert pulse.provenance == "IE-quintic"


def test_synthesize_degenerate_time_fails():
    with pytest.raises(SynthesisFailure):
        synthesize(SynthesisConfig(t_f=0.0, **PAPER))


def test_config_validation_errors():
    with pytest.raises(ConfigError):
        synthesize(SynthesisConfig(t_f=1.0, kappa=100.0, omega_f=1.0, y=12.0))
    with pytest.raises(ConfigError):
        synthesize(SynthesisConfig(t_f=1.0, epsilon=0.5, **{k: v for k, v in PAPER.items() if k != "epsilon"}))
    with pytest.raises(ConfigError):
        synthesize(SynthesisConfig(t_f=1.0, n_time=10, **PAPER))
    with pytest.raises(ConfigError):
        synthesize(SynthesisConfig(t_f=1.0, degree=4, free_coeffs=(), **PAPER))


def test_clamped_pulse_is_flagged():
    cfg = SynthesisConfig(t_f=1.0, degree=3, omega_cap=100.0, **PAPER)
    result = synthesize(cfg)
    assert result.pulse.clamped
    assert np.max(np.abs(result.pulse.omega)) <= 100.0


def test_synthesis_failure_for_wild_coefficients():
    # steep free coefficients drive theta out of (0, pi)
    cfg = SynthesisConfig(t_f=0.15, degree=5, free_coeffs=(-2000.0, 0.0), **PAPER)
    with pytest.raises(SynthesisFailure):
        synthesize(cfg)


def test_config_hash_stable_and_sensitive():
    a = SynthesisConfig(t_f=1.0, **PAPER)
    b = SynthesisConfig(t_f=1.0, **PAPER)
    c = SynthesisConfig(t_f=0.5, **PAPER)
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != c.config_hash()


def test_dynamical_state_is_plus_at_reference_angles():
    plus = np.array([1.0, 1.0]) / math.sqrt(2)  # (amp1, amp0)
    state = dynamical_state(math.pi / 2, math.pi)
    assert abs(np.vdot(plus, state.as_vector())) == pytest.approx(1.0, abs=1e-12)


def test_pulse_csv_roundtrip(tmp_path, cubic_tf1):
    path = tmp_path / "pulse.csv"
    write_pulse_csv(cubic_tf1.pulse, path, "deadbeef")
    back = read_pulse_csv(path)
    assert np.array_equal(back.grid, cubic_tf1.pulse.grid)
    assert np.array_equal(back.omega, cubic_tf1.pulse.omega)
    assert back.provenance == cubic_tf1.pulse.provenance
    assert back.omega_f == cubic_tf1.pulse.omega_f
    assert back.theta0 == cubic_tf1.pulse.theta0
    assert back.beta0 == cubic_tf1.pulse.beta0
    assert back.clamped == cubic_tf1.pulse.clamped
