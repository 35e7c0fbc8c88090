"""Inverse-engineering pulse synthesis for the perceptron qubit.

The control field is obtained backwards from a prescribed state history
written in Bloch angles,

    |Psi> = cos(theta/2) e^{i beta/2} |0> + sin(theta/2) e^{-i beta/2} |1>.

Substituting into the Schroedinger equation under the fixed basis gives the
design pair

    Omega(t) = theta_dot / sin(beta),
    beta_dot = theta_dot * cot(theta) * cot(beta) - x,

where the state that physically evolves is the ansatz above at azimuth
beta + pi (see :func:`dynamical_state`); the populations follow theta either
way.  theta is a low-order polynomial pinned by four boundary values; beta
is integrated backward from beta(t_f) = pi/2, with x frozen at a design
potential y so that one pulse serves every input.  Near t = 0 the
beta equation has an attracting manifold pi - beta ~= epsilon, which is what
drives Omega(0) up to the large reference gap kappa.

Synthesis is pure: identical configs give identical pulses, and runs are
safe to execute concurrently.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import _ode
from .model import QubitState, ansatz_state, sigmoid

__all__ = [
    "ConfigError",
    "SynthesisFailure",
    "SynthesisConfig",
    "ThetaAnsatz",
    "BetaTrajectory",
    "Pulse",
    "SynthesisResult",
    "boundary_conditions",
    "solve_theta",
    "integrate_beta",
    "extract_pulse",
    "synthesize",
    "dynamical_state",
    "write_pulse_csv",
    "read_pulse_csv",
]

_PROVENANCE = {3: "IE-cubic", 4: "IE-quartic", 5: "IE-quintic"}
_FREE_INDICES = {3: (), 4: (2,), 5: (2, 3)}


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


class SynthesisFailure(RuntimeError):
    """Pulse synthesis did not produce a usable control field."""

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message if time is None else f"{message} (t={time!r})")
        self.time = time


@dataclass(frozen=True)
class SynthesisConfig:
    """All scalar knobs of one inverse-engineering run."""

    t_f: float
    kappa: float = 2000.0
    omega_f: float = 1.0
    x_max: float = 12.0
    y: float = 12.0
    epsilon: float = 5e-5
    bias: float = 0.0
    degree: int = 3
    free_coeffs: tuple[float, ...] = ()
    n_time: int = 20000
    omega_cap: float | None = None  # None -> 10 * kappa

    def validate(self) -> None:
        if self.degree not in _FREE_INDICES:
            raise ConfigError(f"degree must be 3, 4 or 5, got {self.degree}")
        if len(self.free_coeffs) != self.degree - 3:
            raise ConfigError(
                f"degree {self.degree} needs {self.degree - 3} free coefficients, "
                f"got {len(self.free_coeffs)}"
            )
        if not (self.omega_f > 0.0):
            raise ConfigError("omega_f must be positive")
        if self.kappa < 100.0 * self.x_max * self.omega_f:
            raise ConfigError(
                "kappa must dominate the activation range: "
                f"kappa >= 100 * x_max * omega_f = {100.0 * self.x_max * self.omega_f}"
            )
        if not (0.0 < self.epsilon < 0.1):
            raise ConfigError("epsilon must lie in (0, 0.1)")
        if self.n_time < 1000:
            raise ConfigError("n_time must be at least 1000")
        if not math.isfinite(self.t_f):
            raise ConfigError("t_f must be finite")

    @property
    def cap(self) -> float:
        return 10.0 * self.kappa if self.omega_cap is None else self.omega_cap

    def config_hash(self) -> str:
        payload = asdict(self)
        payload["free_coeffs"] = list(self.free_coeffs)
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class ThetaAnsatz:
    """Polynomial polar angle theta(t) = sum_i a_i t^i on [0, t_f]."""

    coeffs: tuple[float, ...]
    t_f: float

    def theta(self, t):
        out = 0.0
        for a in reversed(self.coeffs):
            out = out * t + a
        return out

    def theta_dot(self, t):
        out = 0.0
        for i in range(len(self.coeffs) - 1, 0, -1):
            out = out * t + i * self.coeffs[i]
        return out


@dataclass(frozen=True)
class BetaTrajectory:
    """Azimuth samples on the uniform grid, integrated backward from pi/2."""

    grid: np.ndarray
    beta: np.ndarray
    epsilon_achieved: float


@dataclass(frozen=True)
class Pulse:
    """Sampled control field on a uniform time grid.

    theta0/beta0 are the designed Bloch angles at t = 0 and identify the
    protocol initial state; `clamped` marks fields truncated at the cap,
    which disqualifies the pulse from accepted-run statistics.
    """

    grid: np.ndarray
    omega: np.ndarray
    provenance: str
    omega_f: float
    theta0: float = math.pi / 2.0
    beta0: float = math.pi
    clamped: bool = False

    def __post_init__(self):
        if len(self.grid) != len(self.omega):
            raise ValueError("grid and omega must have equal length")
        if not np.all(np.isfinite(self.omega)):
            raise ValueError("pulse samples must be finite")
        if abs(self.omega[-1] - self.omega_f) > 1e-6:
            raise ValueError(
                f"pulse endpoint {self.omega[-1]!r} != omega_f {self.omega_f!r}"
            )

    @property
    def t_f(self) -> float:
        return float(self.grid[-1])

    @property
    def dt(self) -> float:
        return (float(self.grid[-1]) - float(self.grid[0])) / (len(self.grid) - 1)


@dataclass(frozen=True)
class SynthesisResult:
    pulse: Pulse
    theta: ThetaAnsatz
    beta: BetaTrajectory
    diagnostics: dict


def dynamical_state(theta: float, beta: float) -> QubitState:
    """State that actually solves the Schroedinger equation for design
    angles (theta, beta): the Bloch ansatz evaluated at azimuth beta + pi."""
    return ansatz_state(theta, beta + math.pi)


def boundary_conditions(cfg: SynthesisConfig) -> tuple[float, float, float, float]:
    """Four boundary values (theta(0), theta(t_f), theta_dot(0), theta_dot(t_f)).

    theta endpoints place the populations on the instantaneous ground state
    at potential y for the reference gap kappa and the final gap omega_f;
    the slopes come from Omega = theta_dot / sin(beta) with beta(0) = pi - eps
    and beta(t_f) = pi/2.
    """
    cfg.validate()
    y = cfg.y - cfg.bias
    theta0 = 2.0 * math.asin(math.sqrt(sigmoid(y / cfg.kappa)))
    theta_f = 2.0 * math.asin(math.sqrt(sigmoid(y / cfg.omega_f)))
    dtheta0 = cfg.kappa * math.sin(cfg.epsilon)
    dtheta_f = cfg.omega_f  # sin(pi/2) = 1
    return theta0, theta_f, dtheta0, dtheta_f


def solve_theta(
    boundary: tuple[float, float, float, float],
    t_f: float,
    degree: int = 3,
    free_coeffs: tuple[float, ...] = (),
) -> ThetaAnsatz:
    """Fit the polynomial ansatz to the four boundary values.

    Degree 3 is the unique interpolant; degrees 4 and 5 leave a_2 and
    (a_2, a_3) free and solve for the remaining four coefficients.
    """
    if degree not in _FREE_INDICES:
        raise ConfigError(f"degree must be 3, 4 or 5, got {degree}")
    free_idx = _FREE_INDICES[degree]
    if len(free_coeffs) != len(free_idx):
        raise ConfigError(
            f"degree {degree} needs {len(free_idx)} free coefficients"
        )
    if not (t_f > 0.0) or not math.isfinite(t_f):
        raise SynthesisFailure("degenerate final time: boundary system is singular", time=t_f)
    theta0, theta_f, dtheta0, dtheta_f = boundary
    n = degree + 1
    rows = np.zeros((4, n))
    rows[0, 0] = 1.0  # theta(0)
    rows[1, 1] = 1.0  # theta_dot(0)
    rows[2, :] = [t_f**i for i in range(n)]  # theta(t_f)
    rows[3, :] = [i * t_f ** (i - 1) if i else 0.0 for i in range(n)]  # theta_dot(t_f)
    rhs = np.array([theta0, dtheta0, theta_f, dtheta_f], dtype=float)
    solved_idx = [i for i in range(n) if i not in free_idx]
    for j, fi in enumerate(free_idx):
        rhs = rhs - rows[:, fi] * free_coeffs[j]
    solution = np.linalg.solve(rows[:, solved_idx], rhs)
    coeffs = np.zeros(n)
    coeffs[solved_idx] = solution
    for j, fi in enumerate(free_idx):
        coeffs[fi] = free_coeffs[j]
    return ThetaAnsatz(coeffs=tuple(float(a) for a in coeffs), t_f=t_f)


def integrate_beta(
    theta: ThetaAnsatz,
    y: float,
    n_time: int = 20000,
    rtol: float = 1e-10,
    atol: float = 1e-10,
    cot_cap: float = 1e8,
) -> BetaTrajectory:
    """Solve beta_dot = theta_dot cot(theta) cot(beta) - y backward from
    beta(t_f) = pi/2 and resample onto the uniform grid.

    Fails (with the time of failure) when theta reaches {0, pi} inside the
    interval, when beta leaves (0, pi), or when the stepper stalls.
    """
    t_f = theta.t_f
    coeffs = theta.coeffs
    ncoef = len(coeffs)
    sin, cos = math.sin, math.cos

    def rhs(t, beta):
        th = 0.0
        thd = 0.0
        for i in range(ncoef - 1, 0, -1):
            th = th * t + coeffs[i]
            thd = thd * t + i * coeffs[i]
        th = th * t + coeffs[0]
        s = sin(th)
        c = cos(th)
        if abs(c) > cot_cap * abs(s):
            raise SynthesisFailure("cot(theta) beyond cap", time=t)
        sb = sin(beta)
        if sb <= 0.0:
            raise SynthesisFailure("beta left (0, pi)", time=t)
        return thd * (c / s) * (cos(beta) / sb) - y

    def guard(t, beta):
        if not (0.0 < beta < math.pi):
            raise SynthesisFailure("beta left (0, pi)", time=t)

    try:
        ts, ys, fs = _ode.integrate_scalar(
            rhs, t_f, 0.0, math.pi / 2.0, rtol=rtol, atol=atol, guard=guard
        )
    except _ode.StepLimitExceeded as exc:
        raise SynthesisFailure(str(exc)) from exc
    grid = np.linspace(0.0, t_f, n_time)
    beta = _ode.hermite_resample(ts, ys, fs, grid)
    beta[-1] = math.pi / 2.0  # imposed terminal condition
    if np.any(np.sin(beta) <= 0.0):
        bad = int(np.argmax(np.sin(beta) <= 0.0))
        raise SynthesisFailure("beta branch crossing on grid", time=float(grid[bad]))
    return BetaTrajectory(
        grid=grid, beta=beta, epsilon_achieved=float(math.pi - beta[0])
    )


def extract_pulse(
    theta: ThetaAnsatz,
    beta: BetaTrajectory,
    omega_f: float | None = None,
    omega_cap: float = 2e4,
    provenance: str | None = None,
) -> Pulse:
    """Read the control field Omega = theta_dot / sin(beta) off the grid.

    Division overflow beyond ``omega_cap`` is clamped and flagged; clamped
    pulses are excluded from accepted-run statistics downstream.
    """
    grid = beta.grid
    theta_dot = np.array([theta.theta_dot(t) for t in grid])
    omega = theta_dot / np.sin(beta.beta)
    if not np.all(np.isfinite(omega)):
        bad = int(np.argmax(~np.isfinite(omega)))
        raise SynthesisFailure("non-finite control field", time=float(grid[bad]))
    clamped = bool(np.any(np.abs(omega) > omega_cap))
    if clamped:
        omega = np.clip(omega, -omega_cap, omega_cap)
    if omega_f is None:
        omega_f = float(omega[-1])
    if provenance is None:
        provenance = _PROVENANCE[len(theta.coeffs) - 1]
    return Pulse(
        grid=grid,
        omega=omega,
        provenance=provenance,
        omega_f=omega_f,
        theta0=float(theta.theta(0.0)),
        beta0=float(beta.beta[0]),
        clamped=clamped,
    )


def synthesize(cfg: SynthesisConfig) -> SynthesisResult:
    """Run the full pipeline: boundary values -> theta -> beta -> pulse."""
    bc = boundary_conditions(cfg)
    theta = solve_theta(bc, cfg.t_f, cfg.degree, cfg.free_coeffs)
    beta = integrate_beta(theta, cfg.y - cfg.bias, cfg.n_time)
    pulse = extract_pulse(theta, beta, cfg.omega_f, cfg.cap)
    diagnostics = {
        "epsilon_achieved": beta.epsilon_achieved,
        "omega_start": float(pulse.omega[0]),
        "omega_abs_max": float(np.max(np.abs(pulse.omega))),
        "clamped": pulse.clamped,
        "config_hash": cfg.config_hash(),
    }
    return SynthesisResult(pulse=pulse, theta=theta, beta=beta, diagnostics=diagnostics)


def write_pulse_csv(pulse: Pulse, path, config_hash: str = "") -> None:
    """Two-column CSV (time, omega) with a provenance comment header."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            "# pulse"
            f" provenance={pulse.provenance}"
            f" omega_f={pulse.omega_f!r}"
            f" theta0={pulse.theta0!r}"
            f" beta0={pulse.beta0!r}"
            f" clamped={int(pulse.clamped)}"
            f" config={config_hash or 'unspecified'}\n"
        )
        fh.write("# columns: time,omega\n")
        for t, om in zip(pulse.grid, pulse.omega):
            fh.write(f"{float(t)!r},{float(om)!r}\n")


def read_pulse_csv(path) -> Pulse:
    meta = {}
    times, omegas = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for token in line[1:].split():
                    if "=" in token:
                        key, _, value = token.partition("=")
                        meta[key] = value
                continue
            t_str, _, om_str = line.partition(",")
            times.append(float(t_str))
            omegas.append(float(om_str))
    if not times:
        raise ValueError(f"no pulse samples in {path}")
    return Pulse(
        grid=np.array(times),
        omega=np.array(omegas),
        provenance=meta.get("provenance", "unknown"),
        omega_f=float(meta.get("omega_f", omegas[-1])),
        theta0=float(meta.get("theta0", math.pi / 2.0)),
        beta0=float(meta.get("beta0", math.pi)),
        clamped=bool(int(meta.get("clamped", "0"))),
    )
