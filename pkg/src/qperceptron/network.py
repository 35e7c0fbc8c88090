"""Perceptron gate on a register of previous-layer qubits.

The Ising coupling sum_k w_k sigma^z_k sigma^z_j - b sigma^z_j + Omega(t)
sigma^x_j commutes with every previous-layer sigma^z, so the register
decomposes over z-configurations: each configuration contributes a scalar
potential x(sigma) = sum_k w_k sigma_k - b and its perceptron amplitude pair
evolves independently under (pulse, x(sigma)).

Amplitude layout: previous-layer qubits are most significant (qubit 0
leftmost), the perceptron qubit is the least significant bit, so the pair
for configuration c sits at indices (2c, 2c+1) = (|0>_j, |1>_j).  A label
bit of 1 means sigma^z = +1, matching the package basis |1> = (1, 0)^T.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .evolve import _check_uniform, _final_amplitudes_batch
from .ie_synth import Pulse
from .model import ground_state

__all__ = [
    "LayerSpec",
    "RegisterState",
    "config_potentials",
    "hadamard_perceptron",
    "perceptron_gate",
    "phase_correction",
    "full_evolution_oracle",
    "branch_fidelities",
    "write_layer_json",
    "read_layer_json",
    "write_register_csv",
    "read_register_csv",
]

_MAX_PREV = 12
_ORACLE_MAX_PREV = 4
_SQRT1_2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class LayerSpec:
    """Couplings w_k to the previous layer plus the perceptron bias."""

    weights: tuple[float, ...]
    bias: float = 0.0

    def __post_init__(self):
        if len(self.weights) > _MAX_PREV:
            raise ValueError(f"at most {_MAX_PREV} previous-layer qubits supported")

    @property
    def n_prev(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class RegisterState:
    """Complex amplitudes over (previous qubits) x (perceptron qubit)."""

    amplitudes: np.ndarray

    def __post_init__(self):
        size = len(self.amplitudes)
        if size < 2 or size & (size - 1):
            raise ValueError("amplitude count must be a power of two, >= 2")
        norm = float(np.sum(np.abs(self.amplitudes) ** 2))
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"register not normalized: |psi|^2 = {norm!r}")

    @property
    def n_prev(self) -> int:
        return int(math.log2(len(self.amplitudes))) - 1

    def branch_pairs(self) -> np.ndarray:
        """(2^n_prev, 2) view: row c holds (amp |0>_j, amp |1>_j)."""
        return self.amplitudes.reshape(-1, 2)


def config_potentials(layer: LayerSpec) -> np.ndarray:
    """x(sigma) = sum_k w_k sigma_k - b for every configuration index."""
    n = layer.n_prev
    xs = np.full(2**n, -layer.bias)
    for k, w in enumerate(layer.weights):
        bit = n - 1 - k  # qubit 0 most significant
        signs = np.where((np.arange(2**n) >> bit) & 1, 1.0, -1.0)
        xs += w * signs
    return xs


def _require_dims(layer: LayerSpec, state: RegisterState) -> None:
    if state.n_prev != layer.n_prev:
        raise ValueError(
            f"register has {state.n_prev} previous qubits, layer expects {layer.n_prev}"
        )


def hadamard_perceptron(state: RegisterState) -> RegisterState:
    """Hadamard on the perceptron qubit only; previous qubits untouched."""
    pairs = state.branch_pairs()
    out = np.empty_like(pairs)
    out[:, 0] = (pairs[:, 0] + pairs[:, 1]) * _SQRT1_2
    out[:, 1] = (pairs[:, 0] - pairs[:, 1]) * _SQRT1_2
    return RegisterState(amplitudes=out.reshape(-1))


def perceptron_gate(pulse: Pulse, layer: LayerSpec, state: RegisterState) -> RegisterState:
    """Drive the perceptron qubit with the pulse across all configuration
    branches at once; equals the full time-ordered register evolution."""
    _require_dims(layer, state)
    xs = config_potentials(layer)
    pairs = state.branch_pairs()
    omega = np.broadcast_to(pulse.omega, (len(xs), len(pulse.omega)))
    a1, a0 = _final_amplitudes_batch(
        omega, pulse.dt, xs, pairs[:, 1].copy(), pairs[:, 0].copy()
    )
    out = np.empty_like(pairs)
    out[:, 0] = a0
    out[:, 1] = a1
    return RegisterState(amplitudes=out.reshape(-1))


def phase_correction(
    state: RegisterState, layer: LayerSpec | None = None, pulse: Pulse | None = None
) -> RegisterState:
    """Branch-diagonal phase gate leaving every perceptron amplitude real
    and non-negative (populations untouched, idempotent)."""
    if layer is not None:
        _require_dims(layer, state)
    return RegisterState(amplitudes=np.abs(state.amplitudes).astype(complex))


def full_evolution_oracle(
    pulse: Pulse, layer: LayerSpec, state: RegisterState
) -> RegisterState:
    """Brute-force validator: build the 2^(n+1)-dimensional Hamiltonian at
    each step and exponentiate it directly.  Capped at n_prev <= 4."""
    _require_dims(layer, state)
    n = layer.n_prev
    if n > _ORACLE_MAX_PREV:
        raise ValueError(f"oracle capped at n_prev <= {_ORACLE_MAX_PREV}")
    _check_uniform(pulse.grid)
    dim = 2 ** (n + 1)
    # single-qubit operators in label order (index bit 1 <-> sigma_z = +1)
    sz = np.diag([-1.0, 1.0]).astype(complex)
    sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    eye = np.eye(2, dtype=complex)

    def embed(op, pos):
        mats = [eye] * (n + 1)
        mats[pos] = op
        out = mats[0]
        for m in mats[1:]:
            out = np.kron(out, m)
        return out

    z_perc = embed(sz, n)
    x_perc = embed(sx, n)
    coupling = np.zeros((dim, dim), dtype=complex)
    for k, w in enumerate(layer.weights):
        coupling += w * (embed(sz, k) @ z_perc)
    h_static = -0.5 * (coupling - layer.bias * z_perc)
    psi = state.amplitudes.astype(complex).copy()
    dt = pulse.dt
    omega = pulse.omega
    for k in range(len(omega) - 1):
        om = 0.5 * (omega[k] + omega[k + 1])
        step = expm(-1j * dt * (h_static - 0.5 * om * x_perc))
        psi = step @ psi
    return RegisterState(amplitudes=psi)


def branch_fidelities(
    state: RegisterState, layer: LayerSpec, omega_f: float
) -> np.ndarray:
    """Per-configuration overlap with the target activation amplitudes
    (NaN for empty branches)."""
    _require_dims(layer, state)
    xs = config_potentials(layer)
    pairs = state.branch_pairs()
    out = np.empty(len(xs))
    for c, x in enumerate(xs):
        weight = float(np.sum(np.abs(pairs[c]) ** 2))
        if weight < 1e-300:
            out[c] = float("nan")
            continue
        target = ground_state(float(x), omega_f)
        amp = np.conj(target.amp0) * pairs[c, 0] + np.conj(target.amp1) * pairs[c, 1]
        out[c] = float(abs(amp) ** 2 / weight)
    return out


def write_layer_json(layer: LayerSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"weights": list(layer.weights), "bias": layer.bias}, fh)
        fh.write("\n")


def read_layer_json(path) -> LayerSpec:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    return LayerSpec(
        weights=tuple(float(w) for w in payload["weights"]),
        bias=float(payload.get("bias", 0.0)),
    )


def write_register_csv(state: RegisterState, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# columns: index,re,im\n")
        for i, amp in enumerate(state.amplitudes):
            fh.write(f"{i},{float(amp.real)!r},{float(amp.imag)!r}\n")


def read_register_csv(path) -> RegisterState:
    entries = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            idx_str, re_str, im_str = line.split(",")
            entries[int(idx_str)] = complex(float(re_str), float(im_str))
    amps = np.array([entries[i] for i in range(len(entries))], dtype=complex)
    return RegisterState(amplitudes=amps)
