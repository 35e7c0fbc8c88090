"""Pulse synthesis and simulation toolkit for a sigmoid-activation qubit
perceptron: inverse-engineered controls, a fast quasi-adiabatic baseline,
exact two-level propagation, and deterministic parameter sweeps."""

from .evolve import (
    DistanceReport,
    TransferCurve,
    distance_C,
    final_ground_fidelity,
    final_state,
    propagate,
    protocol_initial_state,
    transfer_function,
)
from .faquad import (
    FaquadConfig,
    adiabaticity,
    ctilde,
    synthesize_faquad,
    worst_case_x,
)
from .ie_synth import (
    BetaTrajectory,
    ConfigError,
    Pulse,
    SynthesisConfig,
    SynthesisFailure,
    SynthesisResult,
    ThetaAnsatz,
    boundary_conditions,
    integrate_beta,
    read_pulse_csv,
    solve_theta,
    synthesize,
    write_pulse_csv,
)
from .model import (
    Eigensystem2,
    Hamiltonian2,
    QubitState,
    ansatz_state,
    eigensystem,
    ground_state,
    sigmoid,
)
from .network import (
    LayerSpec,
    RegisterState,
    full_evolution_oracle,
    hadamard_perceptron,
    perceptron_gate,
    phase_correction,
)
from .optimize import (
    SweepRecord,
    scan_coefficients,
    scan_y,
    sweep_omega_f,
    sweep_tf,
    time_optimal,
)

__version__ = "0.1.0"
