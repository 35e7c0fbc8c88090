"""Deterministic parameter sweeps over synthesis knobs.

Every sweep is an exhaustive scan with a fixed grid: one synthesis plus one
distance evaluation per cell, failures recorded as C = 2 rather than raised,
and the argmin tie-broken deterministically (smallest |a2|, then |a3|, then
t_f).  Cells are independent, so the synthesis phase can run on a process
pool; results are always gathered in grid order, which keeps emitted tables
byte-identical regardless of worker count.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .evolve import _final_amplitudes_batch
from .faquad import FaquadConfig, synthesize_faquad
from .ie_synth import (
    ConfigError,
    SynthesisConfig,
    SynthesisFailure,
    dynamical_state,
    synthesize,
)

__all__ = [
    "SweepRecord",
    "TimeOptimalResult",
    "UnattainableToleranceError",
    "scan_y",
    "scan_coefficients",
    "sweep_tf",
    "sweep_omega_f",
    "time_optimal",
    "write_sweep_csv",
    "write_sweep_summary",
    "default_y_grid",
    "default_tf_grid",
    "default_a2_grid_quartic",
    "default_a2_grid_quintic",
    "default_a3_grid_quintic",
    "default_inner_a2_grid",
    "default_inner_a3_grid",
]

_CHUNK = 512  # cells propagated per numpy batch; bounds scan memory


class UnattainableToleranceError(RuntimeError):
    """No sampled t_f meets the requested distance tolerance."""


@dataclass(frozen=True)
class SweepRecord:
    params: dict
    f0: float
    f1: float
    c: float
    epsilon_achieved: float
    omega_start: float
    failed: bool
    clamped: bool
    config_hash: str


def _record_key(rec: SweepRecord):
    p = rec.params
    return (rec.c, abs(p.get("a2", 0.0)), abs(p.get("a3", 0.0)), p.get("t_f", 0.0))


def best_record(records) -> SweepRecord:
    return min(records, key=_record_key)


# --- cell evaluation -------------------------------------------------------

def _synth_ie_cell(cfg: SynthesisConfig):
    try:
        res = synthesize(cfg)
    except SynthesisFailure:
        return None
    p = res.pulse
    return (p.omega, p.dt, p.theta0, p.beta0, res.beta.epsilon_achieved,
            float(p.omega[0]), p.clamped)


def _synth_faquad_cell(cfg: FaquadConfig):
    try:
        pulse = synthesize_faquad(cfg)
    except (SynthesisFailure, ConfigError):
        return None
    return (pulse.omega, pulse.dt, pulse.theta0, pulse.beta0, float("nan"),
            float(pulse.omega[0]), pulse.clamped)


def _map_ordered(fn, items, threads: int):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    chunksize = max(1, len(items) // (threads * 8))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))


def _evaluate_cells(synth_fn, cfgs, params_list, edges, hashes, threads):
    """Synthesize each cell, then batch-propagate the survivors at their
    two endpoint potentials.  Returns records in grid order."""
    records: list[SweepRecord | None] = [None] * len(cfgs)
    for start in range(0, len(cfgs), _CHUNK):
        chunk = list(range(start, min(start + _CHUNK, len(cfgs))))
        outs = _map_ordered(synth_fn, [cfgs[i] for i in chunk], threads)
        ok = [i for i, out in zip(chunk, outs) if out is not None]
        for i, out in zip(chunk, outs):
            if out is None:
                records[i] = SweepRecord(
                    params=params_list[i], f0=0.0, f1=0.0, c=2.0,
                    epsilon_achieved=float("nan"), omega_start=float("nan"),
                    failed=True, clamped=False, config_hash=hashes[i],
                )
        if not ok:
            continue
        outs_ok = [outs[chunk.index(i)] for i in ok]
        omega = np.stack([o[0] for o in outs_ok])
        dt = np.array([o[1] for o in outs_ok])
        psi0 = [dynamical_state(o[2], o[3]) for o in outs_ok]
        a1_0 = np.array([s.amp1 for s in psi0])
        a0_0 = np.array([s.amp0 for s in psi0])
        lo = np.array([edges[i][0] for i in ok])
        hi = np.array([edges[i][1] for i in ok])
        a1m, a0m = _final_amplitudes_batch(omega, dt, lo, a1_0, a0_0)
        a1p, a0p = _final_amplitudes_batch(omega, dt, hi, a1_0, a0_0)
        f0 = np.abs(a0m) ** 2
        f1 = np.abs(a1p) ** 2
        for j, i in enumerate(ok):
            records[i] = SweepRecord(
                params=params_list[i],
                f0=float(f0[j]), f1=float(f1[j]), c=float(2.0 - f0[j] - f1[j]),
                epsilon_achieved=float(outs_ok[j][4]),
                omega_start=float(outs_ok[j][5]),
                failed=False, clamped=bool(outs_ok[j][6]),
                config_hash=hashes[i],
            )
    return records


# --- default grids ---------------------------------------------------------

def default_y_grid() -> np.ndarray:
    return np.round(np.arange(-12.0, 12.0 + 0.25, 0.5), 10)


def default_tf_grid() -> np.ndarray:
    return np.round(np.arange(0.05, 1.0 + 0.005, 0.01), 10)


def default_a2_grid_quartic() -> np.ndarray:
    return np.arange(-600.0, 101.0, 1.0)


def default_a2_grid_quintic() -> np.ndarray:
    return np.arange(-200.0, 101.0, 5.0)


def default_a3_grid_quintic() -> np.ndarray:
    return np.arange(-6000.0, 1.0, 20.0)


def default_inner_a2_grid() -> np.ndarray:
    # coarser than the dedicated coefficient scan: used per t_f inside sweeps
    return np.arange(-200.0, 101.0, 10.0)


def default_inner_a3_grid() -> np.ndarray:
    return np.arange(-6000.0, 1.0, 200.0)


# --- sweeps ----------------------------------------------------------------

def scan_y(cfg: SynthesisConfig, y_grid=None, method: str = "IE", threads: int = 1):
    """Distance C per design potential y; returns (records, argmin record).

    IE cells synthesize at y and evaluate C at the fixed activation edges
    -/+ x_max * omega_f.  FAQUAD has no free design potential in the same
    sense: the sweep designs the sweep-rate at |y| and widens the evaluation
    endpoints to -/+ y, which is what exposes its asymmetric breakdown at
    negative y.
    """
    if y_grid is None:
        y_grid = default_y_grid()
    y_grid = [float(v) for v in np.atleast_1d(y_grid)]
    if not y_grid:
        raise ConfigError("y_grid must be non-empty")
    params = [{"y": v} for v in y_grid]
    if method.upper().startswith("IE"):
        cfgs = [replace(cfg, y=v) for v in y_grid]
        edge = cfg.x_max * cfg.omega_f
        edges = [(-edge, edge)] * len(cfgs)
        hashes = [c.config_hash() for c in cfgs]
        records = _evaluate_cells(_synth_ie_cell, cfgs, params, edges, hashes, threads)
    elif method.upper() == "FAQUAD":
        cfgs = [
            FaquadConfig(
                t_f=cfg.t_f, omega_start=cfg.kappa, omega_f=cfg.omega_f,
                x_star=abs(v - cfg.bias) if v != cfg.bias else None,
                n_s=cfg.n_time,
            )
            for v in y_grid
        ]
        edges = [(-v, v) for v in y_grid]
        hashes = [c.config_hash() for c in cfgs]
        records = _evaluate_cells(_synth_faquad_cell, cfgs, params, edges, hashes, threads)
    else:
        raise ConfigError(f"unknown method {method!r}")
    return records, best_record(records)


def scan_coefficients(cfg: SynthesisConfig, a2_grid, a3_grid=None, threads: int = 1):
    """Exhaustive scan over the free polynomial coefficients.

    One grid scans a2 at degree 4; two grids scan (a2, a3) at degree 5.  The
    grids must match cfg.degree.  Returns (records, argmin record).
    """
    a2_grid = [float(v) for v in np.atleast_1d(a2_grid)]
    expected_degree = 4 if a3_grid is None else 5
    if cfg.degree != expected_degree:
        raise ConfigError(
            f"degree {cfg.degree} config given {expected_degree - 3} coefficient grids"
        )
    if a3_grid is None:
        cells = [(v,) for v in a2_grid]
        params = [{"a2": v} for v in a2_grid]
    else:
        a3_grid = [float(v) for v in np.atleast_1d(a3_grid)]
        cells = [(v2, v3) for v2 in a2_grid for v3 in a3_grid]
        params = [{"a2": v2, "a3": v3} for v2, v3 in cells]
    cfgs = [replace(cfg, free_coeffs=cell) for cell in cells]
    edge = cfg.x_max * cfg.omega_f
    edges = [(-edge, edge)] * len(cfgs)
    hashes = [c.config_hash() for c in cfgs]
    records = _evaluate_cells(_synth_ie_cell, cfgs, params, edges, hashes, threads)
    return records, best_record(records)


def _method_degree(method: str) -> int:
    key = method.upper().replace("_", "-")
    if key in ("IE-CUBIC", "IE"):
        return 3
    if key in ("IE-QUARTIC",):
        return 4
    if key in ("IE-QUINTIC", "IE-QUINTIC(SCANNED)"):
        return 5
    if key == "FAQUAD":
        return 0
    raise ConfigError(f"unknown method {method!r}")


def sweep_tf(
    cfg_template: SynthesisConfig,
    tf_grid=None,
    method: str = "IE-cubic",
    threads: int = 1,
    inner_a2_grid=None,
    inner_a3_grid=None,
):
    """Distance C per final time; quintic cells take the best of an inner
    coefficient scan.  Returns (records, argmin record)."""
    if tf_grid is None:
        tf_grid = default_tf_grid()
    tf_grid = [float(v) for v in np.atleast_1d(tf_grid)]
    degree = _method_degree(method)
    if degree == 0:
        cfgs = [
            FaquadConfig(
                t_f=t, omega_start=cfg_template.kappa, omega_f=cfg_template.omega_f,
                x_star=abs(cfg_template.y - cfg_template.bias),
                n_s=cfg_template.n_time,
            )
            for t in tf_grid
        ]
        params = [{"t_f": t} for t in tf_grid]
        edge = cfg_template.x_max * cfg_template.omega_f
        edges = [(-edge, edge)] * len(cfgs)
        hashes = [c.config_hash() for c in cfgs]
        records = _evaluate_cells(_synth_faquad_cell, cfgs, params, edges, hashes, threads)
        return records, best_record(records)
    if degree == 3:
        cfgs = [replace(cfg_template, t_f=t, degree=3, free_coeffs=()) for t in tf_grid]
        params = [{"t_f": t} for t in tf_grid]
        edge = cfg_template.x_max * cfg_template.omega_f
        edges = [(-edge, edge)] * len(cfgs)
        hashes = [c.config_hash() for c in cfgs]
        records = _evaluate_cells(_synth_ie_cell, cfgs, params, edges, hashes, threads)
        return records, best_record(records)
    # scanned quintic (or quartic): best inner cell per t_f
    if inner_a2_grid is None:
        inner_a2_grid = default_inner_a2_grid()
    if degree == 5 and inner_a3_grid is None:
        inner_a3_grid = default_inner_a3_grid()
    records = []
    for t in tf_grid:
        cfg_t = replace(
            cfg_template, t_f=t, degree=degree,
            free_coeffs=(0.0,) * (degree - 3),
        )
        inner_records, inner_best = scan_coefficients(
            cfg_t, inner_a2_grid, inner_a3_grid if degree == 5 else None, threads
        )
        params = dict(inner_best.params)
        params["t_f"] = t
        records.append(replace(inner_best, params=params))
    return records, best_record(records)


def sweep_omega_f(
    cfg_template: SynthesisConfig, omega_f_grid, method: str = "IE-cubic",
    threads: int = 1,
):
    """Distance C per final control value omega_f, holding t_f and the
    ratio y / omega_f fixed.  Returns (records, argmin record)."""
    omega_f_grid = [float(v) for v in np.atleast_1d(omega_f_grid)]
    y_ratio = (cfg_template.y - cfg_template.bias) / cfg_template.omega_f
    degree = _method_degree(method)
    params = [{"omega_f": v} for v in omega_f_grid]
    if degree == 0:
        cfgs = [
            FaquadConfig(
                t_f=cfg_template.t_f, omega_start=cfg_template.kappa,
                omega_f=v, x_star=abs(y_ratio) * v, n_s=cfg_template.n_time,
            )
            for v in omega_f_grid
        ]
        edges = [(-cfg_template.x_max * v, cfg_template.x_max * v) for v in omega_f_grid]
        hashes = [c.config_hash() for c in cfgs]
        records = _evaluate_cells(_synth_faquad_cell, cfgs, params, edges, hashes, threads)
    else:
        cfgs = [
            replace(cfg_template, omega_f=v, y=y_ratio * v + cfg_template.bias,
                    degree=degree, free_coeffs=(0.0,) * max(0, degree - 3)
                    if degree > 3 else ())
            for v in omega_f_grid
        ]
        edges = [(-cfg_template.x_max * v, cfg_template.x_max * v) for v in omega_f_grid]
        hashes = [c.config_hash() for c in cfgs]
        records = _evaluate_cells(_synth_ie_cell, cfgs, params, edges, hashes, threads)
    return records, best_record(records)


@dataclass(frozen=True)
class TimeOptimalResult:
    t_f_min: float
    best: SweepRecord
    probed: list


def time_optimal(
    cfg_template: SynthesisConfig,
    c_tolerance: float,
    tf_grid=None,
    threads: int = 1,
    inner_a2_grid=None,
    inner_a3_grid=None,
) -> TimeOptimalResult:
    """Smallest sampled t_f whose (best-of-scan) distance meets c_tolerance.

    Bisection over the sorted grid, valid because C degrades monotonically
    below the feasibility threshold for the inverse-engineered ansatz
    family.  Raises UnattainableToleranceError when even the largest t_f
    fails.
    """
    if not (c_tolerance > 0.0):
        raise ConfigError("c_tolerance must be positive")
    if tf_grid is None:
        tf_grid = default_tf_grid()
    tf_grid = sorted(float(v) for v in np.atleast_1d(tf_grid))
    probed: dict[int, SweepRecord] = {}

    def best_at(idx: int) -> SweepRecord:
        if idx not in probed:
            _, best = sweep_tf(
                cfg_template, [tf_grid[idx]],
                method={3: "IE-cubic", 4: "IE-quartic", 5: "IE-quintic"}[cfg_template.degree],
                threads=threads,
                inner_a2_grid=inner_a2_grid,
                inner_a3_grid=inner_a3_grid,
            )
            probed[idx] = best
        return probed[idx]

    lo, hi = 0, len(tf_grid) - 1
    if best_at(hi).c > c_tolerance:
        raise UnattainableToleranceError(
            f"C <= {c_tolerance} unattainable up to t_f = {tf_grid[hi]}"
        )
    if best_at(lo).c <= c_tolerance:
        hi = lo
    while lo < hi:
        mid = (lo + hi) // 2
        if best_at(mid).c <= c_tolerance:
            hi = mid
        else:
            lo = mid + 1
    best = best_at(hi)
    return TimeOptimalResult(
        t_f_min=tf_grid[hi], best=best,
        probed=[probed[i] for i in sorted(probed)],
    )


# --- serialization ---------------------------------------------------------

def write_sweep_csv(records, path, config_hash: str = "") -> None:
    """One row per record; header names the swept parameters."""
    records = list(records)
    if not records:
        raise ValueError("no records to write")
    keys = list(records[0].params.keys())
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# sweep config={config_hash or 'unspecified'}\n")
        fh.write(
            "# columns: " + ",".join(
                keys + ["f0", "f1", "c", "epsilon_achieved", "omega_start",
                        "failed", "clamped", "config_hash"]
            ) + "\n"
        )
        for rec in records:
            cells = [repr(rec.params[k]) for k in keys]
            cells += [repr(rec.f0), repr(rec.f1), repr(rec.c),
                      repr(rec.epsilon_achieved), repr(rec.omega_start),
                      str(int(rec.failed)), str(int(rec.clamped)), rec.config_hash]
            fh.write(",".join(cells) + "\n")


def write_sweep_summary(records, best, path, config_hash: str = "") -> None:
    payload = {
        "config_hash": config_hash,
        "n_records": len(list(records)),
        "argmin": {
            "params": best.params, "c": best.c, "f0": best.f0, "f1": best.f1,
            "failed": best.failed, "config_hash": best.config_hash,
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
