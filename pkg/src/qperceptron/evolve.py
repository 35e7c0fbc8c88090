"""Time-dependent Schroedinger propagation under a sampled pulse.

Each time step applies the exact 2x2 unitary exp(-i H dt) for the field
held at the step midpoint (average of adjacent samples).  For the traceless
generator H = -(x sigma_z + Omega sigma_x)/2 this is the rotation

    U = cos(r dt / 2) I + i sin(r dt / 2) (x sigma_z + Omega sigma_x) / r,

with r = sqrt(x^2 + Omega^2): second-order accurate and exactly unitary, so
norm drift is limited to rounding.  Propagations at distinct potentials are
independent; pulses are immutable and safely shared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ie_synth import Pulse, dynamical_state
from .model import QubitState, ground_state

__all__ = [
    "Trajectory",
    "TransferCurve",
    "DistanceReport",
    "propagate",
    "final_state",
    "protocol_initial_state",
    "transfer_function",
    "distance_C",
    "final_ground_fidelity",
    "write_transfer_csv",
    "read_transfer_csv",
]


@dataclass(frozen=True)
class Trajectory:
    """State history on the pulse grid, stored as amplitude arrays."""

    times: np.ndarray
    amp1: np.ndarray
    amp0: np.ndarray

    @property
    def prob_excited(self) -> np.ndarray:
        return np.abs(self.amp1) ** 2

    @property
    def norms(self) -> np.ndarray:
        return np.abs(self.amp1) ** 2 + np.abs(self.amp0) ** 2

    def final_state(self) -> QubitState:
        return QubitState(amp0=complex(self.amp0[-1]), amp1=complex(self.amp1[-1]))


@dataclass(frozen=True)
class TransferCurve:
    """Final excitation probability versus scaled potential x / Omega_f."""

    x_over_omega_f: np.ndarray
    excitation: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.x_over_omega_f) <= 0.0):
            raise ValueError("potential grid must be strictly increasing")
        if np.any(self.excitation < -1e-9) or np.any(self.excitation > 1.0 + 1e-9):
            raise ValueError("excitation probabilities must lie in [0, 1]")


@dataclass(frozen=True)
class DistanceReport:
    """Endpoint fidelities and the distance C = 2 - F0 - F1."""

    f0: float
    f1: float

    @property
    def c(self) -> float:
        return 2.0 - self.f0 - self.f1


def _check_uniform(grid: np.ndarray) -> None:
    diffs = np.diff(grid)
    dt = (grid[-1] - grid[0]) / (len(grid) - 1)
    if dt <= 0.0 or np.max(np.abs(diffs - dt)) > 1e-6 * abs(dt):
        raise ValueError("pulse grid must be uniform and increasing")


def propagate(pulse: Pulse, x: float, psi0: QubitState) -> Trajectory:
    """Evolve psi0 under (pulse, x), recording the state at every grid node."""
    _check_uniform(pulse.grid)
    n = len(pulse.grid)
    dt = pulse.dt
    omega = pulse.omega
    amp1 = np.empty(n, dtype=complex)
    amp0 = np.empty(n, dtype=complex)
    a1, a0 = complex(psi0.amp1), complex(psi0.amp0)
    amp1[0], amp0[0] = a1, a0
    xx = float(x)
    for k in range(n - 1):
        om = 0.5 * (omega[k] + omega[k + 1])
        r = math.hypot(xx, om)
        half = 0.5 * dt * r
        c = math.cos(half)
        w = math.sin(half) / r if r > 0.0 else 0.5 * dt
        u11 = complex(c, w * xx)
        u10 = complex(0.0, w * om)
        a1, a0 = u11 * a1 + u10 * a0, u10 * a1 + u11.conjugate() * a0
        amp1[k + 1], amp0[k + 1] = a1, a0
    return Trajectory(times=pulse.grid, amp1=amp1, amp0=amp0)


def _final_amplitudes_batch(omega, dt, x, a1, a0):
    """Batched endpoint propagation.

    omega: (M, n) field samples; dt, x: scalars or (M,); a1, a0: initial
    amplitudes, scalars or (M,).  Returns final (a1, a0) arrays.
    """
    omega = np.atleast_2d(np.asarray(omega, dtype=float))
    m, n = omega.shape
    dt = np.broadcast_to(np.asarray(dt, dtype=float), (m,))
    x = np.broadcast_to(np.asarray(x, dtype=float), (m,))
    a1 = np.array(np.broadcast_to(np.asarray(a1, dtype=complex), (m,)))
    a0 = np.array(np.broadcast_to(np.asarray(a0, dtype=complex), (m,)))
    for k in range(n - 1):
        om = 0.5 * (omega[:, k] + omega[:, k + 1])
        r = np.hypot(x, om)
        half = 0.5 * dt * r
        c = np.cos(half)
        safe = np.where(r > 0.0, r, 1.0)
        w = np.where(r > 0.0, np.sin(half) / safe, 0.5 * dt)
        u11 = c + 1j * (w * x)
        u10 = 1j * (w * om)
        a1, a0 = u11 * a1 + u10 * a0, u10 * a1 + np.conj(u11) * a0
    return a1, a0


def final_state(pulse: Pulse, x: float, psi0: QubitState) -> QubitState:
    """Endpoint-only propagation (no trajectory storage)."""
    tail = propagate_final_batch(pulse, [x], psi0)
    return QubitState(amp0=complex(tail[1][0]), amp1=complex(tail[0][0]))


def propagate_final_batch(pulse: Pulse, xs, psi0: QubitState):
    """Final (amp1, amp0) arrays for one pulse over many potentials."""
    _check_uniform(pulse.grid)
    xs = np.asarray(xs, dtype=float)
    omega = np.broadcast_to(pulse.omega, (len(xs), len(pulse.omega)))
    return _final_amplitudes_batch(omega, pulse.dt, xs, psi0.amp1, psi0.amp0)


def protocol_initial_state(pulse: Pulse) -> QubitState:
    """State the perceptron protocol starts from: the designed t = 0 state.

    For inverse-engineered pulses this is the Bloch ansatz at the stored
    (theta0, beta0), which approaches |+> = (|0> + |1>)/sqrt(2), the state a
    Hadamard prepares, as kappa grows.  FAQUAD pulses store theta0 = pi/2,
    beta0 = pi and yield |+> exactly (up to a global phase).
    """
    return dynamical_state(pulse.theta0, pulse.beta0)


def transfer_function(pulse: Pulse, x_grid=None, psi0: QubitState | None = None) -> TransferCurve:
    """Excitation probability P(x/Omega_f) over a potential grid.

    Defaults: 241 points spanning x/Omega_f in [-12, 12], initial state from
    :func:`protocol_initial_state`.
    """
    if x_grid is None:
        x_grid = np.linspace(-12.0, 12.0, 241) * pulse.omega_f
    x_grid = np.asarray(x_grid, dtype=float)
    if psi0 is None:
        psi0 = protocol_initial_state(pulse)
    a1, _ = propagate_final_batch(pulse, x_grid, psi0)
    return TransferCurve(
        x_over_omega_f=x_grid / pulse.omega_f, excitation=np.abs(a1) ** 2
    )


def _endpoint_fidelities(pulse: Pulse, x_low: float, x_high: float, psi0=None):
    # F0 = |<0|psi(t_f; x_low)>|^2, F1 = |<1|psi(t_f; x_high)>|^2
    if psi0 is None:
        psi0 = protocol_initial_state(pulse)
    a1, a0 = propagate_final_batch(pulse, [x_low, x_high], psi0)
    return float(abs(a0[0]) ** 2), float(abs(a1[1]) ** 2)


def distance_C(pulse: Pulse, x_max_scaled: float = 12.0, psi0: QubitState | None = None) -> DistanceReport:
    """Distance C = 2 - F0 - F1 at the extreme potentials -/+ x_max * Omega_f."""
    if not (x_max_scaled > 0.0):
        raise ValueError("x_max_scaled must be positive")
    edge = x_max_scaled * pulse.omega_f
    f0, f1 = _endpoint_fidelities(pulse, -edge, edge, psi0)
    return DistanceReport(f0=f0, f1=f1)


def final_ground_fidelity(pulse: Pulse, x: float, psi0: QubitState | None = None) -> float:
    """Squared overlap of the evolved state with the target ground state at
    (x, Omega_f), insensitive to global phase."""
    if psi0 is None:
        psi0 = protocol_initial_state(pulse)
    final = final_state(pulse, x, psi0)
    target = ground_state(x, pulse.omega_f)
    return float(abs(target.overlap(final)) ** 2)


def write_transfer_csv(curve: TransferCurve, path, config_hash: str = "") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# transfer config={config_hash or 'unspecified'}\n")
        fh.write("# columns: x_over_omega_f,excitation\n")
        for xv, pv in zip(curve.x_over_omega_f, curve.excitation):
            fh.write(f"{float(xv)!r},{float(pv)!r}\n")


def read_transfer_csv(path) -> TransferCurve:
    xs, ps = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            x_str, _, p_str = line.partition(",")
            xs.append(float(x_str))
            ps.append(float(p_str))
    return TransferCurve(x_over_omega_f=np.array(xs), excitation=np.array(ps))
