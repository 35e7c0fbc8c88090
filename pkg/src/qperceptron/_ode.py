"""Adaptive Dormand-Prince 5(4) stepping for scalar initial-value problems.

Plain-float implementation: the synthesis ODEs are scalar and get called
tens of thousands of times during coefficient scans, where per-call numpy
overhead would dominate.  Integration runs in either time direction; dense
output is reconstructed afterwards by cubic Hermite interpolation on the
accepted steps.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["StepLimitExceeded", "integrate_scalar", "hermite_resample"]

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = (
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
)
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = (
    35.0 / 384.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
)
# error weights: 5th-order minus embedded 4th-order solution
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)


class StepLimitExceeded(RuntimeError):
    """Raised when the step budget runs out before reaching the endpoint."""


def _initial_step(f, t0, y0, f0, direction, rtol, atol, span):
    # Hairer-style starting-step heuristic, clipped to the span.
    sc = atol + rtol * abs(y0)
    d0 = abs(y0) / sc
    d1 = abs(f0) / sc
    h0 = 1e-6 * span if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    y1 = y0 + h0 * direction * f0
    f1 = f(t0 + h0 * direction, y1)
    d2 = abs(f1 - f0) / sc / h0
    dm = max(d1, d2)
    h1 = max(1e-6, (0.01 / dm) ** 0.2) if dm > 1e-15 else max(1e-6 * span, h0 * 1e3)
    return min(100.0 * h0, h1, span)


def integrate_scalar(
    f,
    t0: float,
    t1: float,
    y0: float,
    rtol: float = 1e-10,
    atol: float = 1e-10,
    guard=None,
    max_steps: int = 5_000_000,
):
    """Integrate dy/dt = f(t, y) from t0 to t1 (t1 < t0 runs backward).

    Returns three float lists (ts, ys, fs) of accepted nodes and slope
    values, ordered from t0 to t1, suitable for Hermite resampling.

    ``guard(t, y)`` is called after every accepted step and may raise to
    abort on blow-up; exceptions from ``f`` and ``guard`` propagate.
    """
    if t1 == t0:
        fy = f(t0, y0)
        return [t0], [y0], [fy]
    direction = 1.0 if t1 > t0 else -1.0
    span = abs(t1 - t0)
    t, y = t0, y0
    fy = f(t, y)
    h = _initial_step(f, t, y, fy, direction, rtol, atol, span)
    ts, ys, fs = [t], [y], [fy]
    nsteps = 0
    while (t1 - t) * direction > 0.0:
        nsteps += 1
        if nsteps > max_steps:
            raise StepLimitExceeded(f"no convergence within {max_steps} steps at t={t!r}")
        h = min(h, abs(t1 - t))
        hd = h * direction
        k1 = fy
        k2 = f(t + _C2 * hd, y + hd * (_A21 * k1))
        k3 = f(t + _C3 * hd, y + hd * (_A31 * k1 + _A32 * k2))
        k4 = f(t + _C4 * hd, y + hd * (_A41 * k1 + _A42 * k2 + _A43 * k3))
        k5 = f(t + _C5 * hd, y + hd * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4))
        k6 = f(
            t + hd,
            y + hd * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5),
        )
        y_new = y + hd * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        t_new = t + hd
        k7 = f(t_new, y_new)  # FSAL
        err = hd * (
            _E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7
        )
        scale = atol + rtol * max(abs(y), abs(y_new))
        ratio = abs(err) / scale
        if ratio <= 1.0 or not math.isfinite(ratio):
            if not math.isfinite(ratio):
                # non-finite stage value: retry with a much smaller step
                h *= 0.1
                if h < 1e-16 * span:
                    raise StepLimitExceeded(f"step size underflow at t={t!r}")
                continue
            t, y, fy = t_new, y_new, k7
            if guard is not None:
                guard(t, y)
            ts.append(t)
            ys.append(y)
            fs.append(fy)
            factor = 5.0 if ratio == 0.0 else min(5.0, 0.9 * ratio ** -0.2)
            h *= factor
        else:
            h *= max(0.2, 0.9 * ratio ** -0.2)
            if h < 1e-16 * span:
                raise StepLimitExceeded(f"step size underflow at t={t!r}")
    return ts, ys, fs


def hermite_resample(ts, ys, fs, grid) -> np.ndarray:
    """Cubic Hermite interpolation of accepted nodes onto ``grid``.

    Nodes may be descending (backward integration); the grid must lie
    within the integrated range.
    """
    t = np.asarray(ts, dtype=float)
    y = np.asarray(ys, dtype=float)
    d = np.asarray(fs, dtype=float)
    if t[0] > t[-1]:
        t, y, d = t[::-1], y[::-1], d[::-1]
    grid = np.asarray(grid, dtype=float)
    idx = np.clip(np.searchsorted(t, grid, side="right") - 1, 0, len(t) - 2)
    t0, t1 = t[idx], t[idx + 1]
    h = t1 - t0
    s = np.where(h > 0.0, (grid - t0) / np.where(h > 0.0, h, 1.0), 0.0)
    s2, s3 = s * s, s * s * s
    h00 = 2.0 * s3 - 3.0 * s2 + 1.0
    h10 = s3 - 2.0 * s2 + s
    h01 = -2.0 * s3 + 3.0 * s2
    h11 = s3 - s2
    return h00 * y[idx] + h10 * h * d[idx] + h01 * y[idx + 1] + h11 * h * d[idx + 1]
