"""Closed-form physics of the driven perceptron qubit.

The qubit evolves under H = -(x sigma_z + Omega(t) sigma_x) / 2 with
hbar = 1 and time measured in units t0 = 1, so fields carry units 1/t0.
Basis convention throughout the package: |0> = (0, 1)^T and |1> = (1, 0)^T,
which puts <1|H|1> = -x/2 and <0|H|0> = +x/2.  State vectors are therefore
ordered (amp1, amp0).

Everything in this module is a pure function of its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "QubitState",
    "Hamiltonian2",
    "Eigensystem2",
    "sigmoid",
    "ground_state",
    "eigensystem",
    "ansatz_state",
]

_NORM_TOL = 1e-12


def sigmoid(x):
    """Excitation probability f(x) = (1 + x / sqrt(1 + x^2)) / 2.

    Strictly increasing, f(0) = 1/2, limits 0 and 1 at -/+ infinity.
    Accepts a scalar or an array; rejects non-finite input.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("sigmoid requires finite input")
    out = 0.5 * (1.0 + arr / np.sqrt(1.0 + arr * arr))
    return float(out) if arr.ndim == 0 else out


@dataclass(frozen=True)
class QubitState:
    """Normalized pair of complex amplitudes over {|0>, |1>}."""

    amp0: complex
    amp1: complex

    def __post_init__(self):
        norm = abs(self.amp0) ** 2 + abs(self.amp1) ** 2
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"state not normalized: |psi|^2 = {norm!r}")

    @classmethod
    def from_vector(cls, vec) -> "QubitState":
        """Build from a length-2 vector in (amp1, amp0) ordering."""
        a1, a0 = complex(vec[0]), complex(vec[1])
        return cls(amp0=a0, amp1=a1)

    def as_vector(self) -> np.ndarray:
        """Column vector (amp1, amp0) following |1> = (1, 0)^T."""
        return np.array([self.amp1, self.amp0], dtype=complex)

    def overlap(self, other: "QubitState") -> complex:
        """<self|other>."""
        return (
            np.conj(self.amp0) * other.amp0 + np.conj(self.amp1) * other.amp1
        )

    @property
    def prob_excited(self) -> float:
        return abs(self.amp1) ** 2


@dataclass(frozen=True)
class Hamiltonian2:
    """H = -(diag_z sigma_z + coupling_x sigma_x) / 2, Hermitian by construction."""

    diag_z: float
    coupling_x: float

    def matrix(self) -> np.ndarray:
        """2x2 matrix in (amp1, amp0) ordering."""
        x, om = self.diag_z, self.coupling_x
        return np.array([[-0.5 * x, -0.5 * om], [-0.5 * om, 0.5 * x]], dtype=complex)

    @property
    def gap(self) -> float:
        return math.hypot(self.diag_z, self.coupling_x)


@dataclass(frozen=True)
class Eigensystem2:
    energy_ground: float
    energy_excited: float
    state_ground: QubitState
    state_excited: QubitState
    mixing_angle: float


def ground_state(x: float, omega: float) -> QubitState:
    """Instantaneous ground state sqrt(1 - f(x/Omega)) |0> + sqrt(f(x/Omega)) |1>.

    Requires Omega > 0; both amplitudes are real and non-negative.
    """
    if not (omega > 0.0):
        raise ValueError("ground_state requires Omega > 0")
    u = x / omega
    return QubitState(
        amp0=complex(math.sqrt(sigmoid(-u))), amp1=complex(math.sqrt(sigmoid(u)))
    )


def _gauge(vec: np.ndarray) -> np.ndarray:
    # real eigenvector, amp1 >= 0 (amp0 >= 0 as tie-break when amp1 == 0)
    if vec[0] < 0.0 or (vec[0] == 0.0 and vec[1] < 0.0):
        return -vec
    return vec


def eigensystem(x: float, omega: float) -> Eigensystem2:
    """Exact eigensystem of H: energies -/+ sqrt(Omega^2 + x^2)/2.

    The mixing angle is alpha = arccos(-x / sqrt(Omega^2 + x^2)); the ground
    eigenvector matches ground_state(x, Omega) for Omega > 0.  Rejects the
    zero-gap point (x, Omega) = (0, 0).
    """
    r = math.hypot(x, omega)
    if r == 0.0:
        raise ValueError("eigensystem undefined at zero gap")
    # Pick the cancellation-free form of the (unnormalized) ground vector.
    if x >= 0.0:
        g = np.array([r + x, omega], dtype=float)
    else:
        g = np.array([omega, r - x], dtype=float)
    g = _gauge(g / np.linalg.norm(g))
    e = _gauge(np.array([g[1], -g[0]]))
    return Eigensystem2(
        energy_ground=-0.5 * r,
        energy_excited=0.5 * r,
        state_ground=QubitState.from_vector(g),
        state_excited=QubitState.from_vector(e),
        mixing_angle=math.acos(-x / r),
    )


def ansatz_state(theta: float, beta: float) -> QubitState:
    """Bloch-angle state cos(theta/2) e^{i beta/2} |0> + sin(theta/2) e^{-i beta/2} |1>."""
    return QubitState(
        amp0=math.cos(0.5 * theta) * np.exp(0.5j * beta),
        amp1=math.sin(0.5 * theta) * np.exp(-0.5j * beta),
    )
