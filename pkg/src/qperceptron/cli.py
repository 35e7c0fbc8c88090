"""Batch front-end: JSON config in, CSV/JSON tables out.

Exit codes: 0 success, 2 config error, 3 synthesis failure, 4 I/O error.
The --threads flag only affects wall time; emitted bytes are identical for
any worker count.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import evolve, faquad, ie_synth, network, optimize

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SYNTHESIS = 3
EXIT_IO = 4

_SYNTH_KEYS = {
    "t_f", "kappa", "omega_f", "x_max", "y", "epsilon", "bias",
    "degree", "free_coeffs", "n_time", "omega_cap",
}


def _hash_payload(payload) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _load_config(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if not isinstance(payload, dict):
        raise ie_synth.ConfigError("config must be a JSON object")
    return payload


def _parse_grid(spec) -> np.ndarray:
    if isinstance(spec, (list, tuple)):
        if not spec:
            raise ie_synth.ConfigError("grid must be non-empty")
        return np.array([float(v) for v in spec])
    if isinstance(spec, dict):
        start, stop = float(spec["start"]), float(spec["stop"])
        if "step" in spec:
            step = float(spec["step"])
            if step <= 0.0 or stop < start:
                raise ie_synth.ConfigError("grid needs step > 0 and stop >= start")
            return np.round(np.arange(start, stop + 0.5 * step, step), 12)
        num = int(spec["num"])
        if num < 1:
            raise ie_synth.ConfigError("grid needs num >= 1")
        return np.linspace(start, stop, num)
    raise ie_synth.ConfigError(f"cannot parse grid {spec!r}")


def _synthesis_config(payload: dict) -> ie_synth.SynthesisConfig:
    unknown = set(payload) - _SYNTH_KEYS
    if unknown:
        raise ie_synth.ConfigError(f"unknown synthesis keys: {sorted(unknown)}")
    if "t_f" not in payload:
        raise ie_synth.ConfigError("synthesis config requires t_f")
    kwargs = dict(payload)
    kwargs["free_coeffs"] = tuple(float(v) for v in kwargs.get("free_coeffs", ()))
    return ie_synth.SynthesisConfig(**kwargs)


def _faquad_config(payload: dict) -> faquad.FaquadConfig:
    keys = {"t_f", "omega_start", "omega_f", "x_star", "n_s"}
    unknown = set(payload) - keys
    if unknown:
        raise ie_synth.ConfigError(f"unknown faquad keys: {sorted(unknown)}")
    if "t_f" not in payload:
        raise ie_synth.ConfigError("faquad config requires t_f")
    return faquad.FaquadConfig(**payload)


def _write_summary(out_dir: Path, name: str, command: str, config: dict, extra: dict) -> None:
    payload = {
        "command": command,
        "config": config,
        "config_hash": _hash_payload(config),
    }
    payload.update(extra)
    with open(out_dir / name, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")


def _write_angles_csv(result: ie_synth.SynthesisResult, path, config_hash: str) -> None:
    theta = result.theta
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# angles config={config_hash}\n")
        fh.write("# columns: time,theta,beta\n")
        for t, b in zip(result.beta.grid, result.beta.beta):
            fh.write(f"{float(t)!r},{float(theta.theta(t))!r},{float(b)!r}\n")


def cmd_synth(config: dict, out_dir: Path, threads: int) -> int:
    cfg = _synthesis_config(config)
    result = ie_synth.synthesize(cfg)
    chash = cfg.config_hash()
    ie_synth.write_pulse_csv(result.pulse, out_dir / "pulse.csv", chash)
    _write_angles_csv(result, out_dir / "angles.csv", chash)
    _write_summary(out_dir, "synth_summary.json", "synth", config,
                   {"diagnostics": result.diagnostics})
    return EXIT_OK


def cmd_faquad(config: dict, out_dir: Path, threads: int) -> int:
    cfg = _faquad_config(config)
    pulse = faquad.synthesize_faquad(cfg)
    chash = cfg.config_hash()
    ie_synth.write_pulse_csv(pulse, out_dir / "faquad_pulse.csv", chash)
    x_star = cfg.resolved_x_star
    c_t = faquad.ctilde(x_star, cfg.omega_start, cfg.omega_f)
    mu = faquad.measured_adiabaticity(pulse, x_star)
    core = mu[len(mu) // 100: -max(1, len(mu) // 100)]
    _write_summary(out_dir, "faquad_summary.json", "faquad", config, {
        "diagnostics": {
            "x_star": x_star,
            "ctilde": c_t,
            "c": c_t / cfg.t_f,
            "mu_rel_spread": float(np.std(core) / np.mean(core)),
            "worst_case_x": faquad.worst_case_x(cfg.omega_f),
            "numeric_worst_case_x": faquad.numeric_worst_case_x(
                cfg.omega_f, cfg.omega_start),
        },
    })
    return EXIT_OK


def cmd_transfer(config: dict, out_dir: Path, threads: int) -> int:
    pulse_path = config.get("pulse")
    if not pulse_path:
        raise ie_synth.ConfigError("transfer config requires a 'pulse' CSV path")
    pulse = ie_synth.read_pulse_csv(pulse_path)
    grid_spec = config.get("x_grid")
    x_grid = None if grid_spec is None else _parse_grid(grid_spec) * pulse.omega_f
    curve = evolve.transfer_function(pulse, x_grid)
    chash = _hash_payload(config)
    evolve.write_transfer_csv(curve, out_dir / "transfer.csv", chash)
    report = evolve.distance_C(pulse, float(config.get("x_max", 12.0)))
    _write_summary(out_dir, "transfer_summary.json", "transfer", config, {
        "distance": {"f0": report.f0, "f1": report.f1, "c": report.c},
    })
    return EXIT_OK


def cmd_scan(config: dict, out_dir: Path, threads: int) -> int:
    template = _synthesis_config(config.get("template", {}))
    a2_grid = _parse_grid(config["a2_grid"])
    a3_grid = _parse_grid(config["a3_grid"]) if "a3_grid" in config else None
    records, best = optimize.scan_coefficients(template, a2_grid, a3_grid, threads)
    chash = template.config_hash()
    optimize.write_sweep_csv(records, out_dir / "scan.csv", chash)
    optimize.write_sweep_summary(records, best, out_dir / "scan_summary.json", chash)
    _write_summary(out_dir, "scan_config.json", "scan", config, {})
    return EXIT_OK


def cmd_sweep(config: dict, out_dir: Path, threads: int) -> int:
    template = _synthesis_config(config.get("template", {}))
    kind = config.get("kind", "tf")
    method = config.get("method", "IE-cubic")
    chash = template.config_hash()
    if kind == "tf":
        grid = _parse_grid(config["grid"]) if "grid" in config else None
        records, best = optimize.sweep_tf(template, grid, method, threads)
    elif kind == "omega_f":
        records, best = optimize.sweep_omega_f(
            template, _parse_grid(config["grid"]), method, threads)
    elif kind == "y":
        grid = _parse_grid(config["grid"]) if "grid" in config else None
        records, best = optimize.scan_y(template, grid, method, threads)
    elif kind == "time_optimal":
        grid = _parse_grid(config["grid"]) if "grid" in config else None
        result = optimize.time_optimal(
            template, float(config.get("c_tolerance", 0.01)), grid, threads)
        records, best = result.probed, result.best
        _write_summary(out_dir, "time_optimal.json", "sweep", config, {
            "t_f_min": result.t_f_min,
            "argmin": {"params": best.params, "c": best.c},
        })
    else:
        raise ie_synth.ConfigError(f"unknown sweep kind {kind!r}")
    optimize.write_sweep_csv(records, out_dir / "sweep.csv", chash)
    optimize.write_sweep_summary(records, best, out_dir / "sweep_summary.json", chash)
    _write_summary(out_dir, "sweep_config.json", "sweep", config, {})
    return EXIT_OK


def cmd_network(config: dict, out_dir: Path, threads: int) -> int:
    pulse_path = config.get("pulse")
    if not pulse_path:
        raise ie_synth.ConfigError("network config requires a 'pulse' CSV path")
    pulse = ie_synth.read_pulse_csv(pulse_path)
    layer = network.LayerSpec(
        weights=tuple(float(w) for w in config.get("weights", ())),
        bias=float(config.get("bias", 0.0)),
    )
    init = config.get("initial", "zero")
    dim = 2 ** (layer.n_prev + 1)
    if init == "zero":
        amps = np.zeros(dim, dtype=complex)
        amps[0] = 1.0
        state = network.RegisterState(amplitudes=amps)
    else:
        amps = np.array([complex(re, im) for re, im in init])
        state = network.RegisterState(amplitudes=amps)
    if config.get("apply_hadamard", True):
        state = network.hadamard_perceptron(state)
    state = network.perceptron_gate(pulse, layer, state)
    if config.get("apply_phase_correction", False):
        state = network.phase_correction(state, layer, pulse)
    network.write_register_csv(state, out_dir / "register.csv")
    fid = network.branch_fidelities(state, layer, pulse.omega_f)
    pops = np.sum(np.abs(state.branch_pairs()) ** 2, axis=1)
    _write_summary(out_dir, "network_summary.json", "network", config, {
        "branch_populations": [float(p) for p in pops],
        "branch_fidelities": [None if math.isnan(v) else float(v) for v in fid],
        "potentials": [float(v) for v in network.config_potentials(layer)],
    })
    return EXIT_OK


# --- bundled presets --------------------------------------------------------

_PAPER_TEMPLATE = dict(kappa=2000.0, omega_f=1.0, x_max=12.0, y=12.0,
                       epsilon=5e-5, bias=0.0)


def _preset_fig2(out_dir: Path, threads: int) -> None:
    cfg = ie_synth.SynthesisConfig(t_f=1.0, degree=3, **_PAPER_TEMPLATE)
    result = ie_synth.synthesize(cfg)
    chash = cfg.config_hash()
    ie_synth.write_pulse_csv(result.pulse, out_dir / "fig2_pulse_ie.csv", chash)
    _write_angles_csv(result, out_dir / "fig2_angles.csv", chash)
    evolve.write_transfer_csv(
        evolve.transfer_function(result.pulse), out_dir / "fig2_transfer_ie.csv", chash)
    fq_cfg = faquad.FaquadConfig(t_f=1.0, omega_start=2000.0, omega_f=1.0, x_star=12.0)
    fq = faquad.synthesize_faquad(fq_cfg)
    ie_synth.write_pulse_csv(fq, out_dir / "fig2_pulse_faquad.csv", fq_cfg.config_hash())
    evolve.write_transfer_csv(
        evolve.transfer_function(fq), out_dir / "fig2_transfer_faquad.csv",
        fq_cfg.config_hash())


def _preset_fig3(out_dir: Path, threads: int, method: str) -> None:
    tag = "fig3a" if method == "IE" else "fig3b"
    for t_f in (0.1, 0.2, 0.5, 1.0):
        cfg = ie_synth.SynthesisConfig(t_f=t_f, degree=3, **_PAPER_TEMPLATE)
        records, best = optimize.scan_y(cfg, optimize.default_y_grid(), method, threads)
        chash = cfg.config_hash()
        name = f"{tag}_tf{t_f:g}.csv"
        optimize.write_sweep_csv(records, out_dir / name, chash)


def _preset_fig4(out_dir: Path, threads: int) -> None:
    grid = np.round(np.arange(0.5, 1.5001, 0.05), 10)
    cfg = ie_synth.SynthesisConfig(t_f=0.2, degree=3, **_PAPER_TEMPLATE)
    for method, tag in (("IE-cubic", "ie"), ("FAQUAD", "faquad")):
        records, best = optimize.sweep_omega_f(cfg, grid, method, threads)
        optimize.write_sweep_csv(records, out_dir / f"fig4_{tag}.csv", cfg.config_hash())


def _preset_fig5a(out_dir: Path, threads: int) -> None:
    cfg = ie_synth.SynthesisConfig(t_f=0.2, degree=3, **_PAPER_TEMPLATE)
    grid = optimize.default_tf_grid()
    for method, tag in (("IE-cubic", "cubic"), ("IE-quintic", "quintic"),
                        ("FAQUAD", "faquad")):
        records, best = optimize.sweep_tf(cfg, grid, method, threads)
        optimize.write_sweep_csv(records, out_dir / f"fig5a_{tag}.csv", cfg.config_hash())
        optimize.write_sweep_summary(
            records, best, out_dir / f"fig5a_{tag}_summary.json", cfg.config_hash())


def _preset_fig5b(out_dir: Path, threads: int) -> None:
    cubic = ie_synth.SynthesisConfig(t_f=0.15, degree=3, **_PAPER_TEMPLATE)
    quintic = ie_synth.SynthesisConfig(
        t_f=0.15, degree=5, free_coeffs=(-50.0, -3980.0), **_PAPER_TEMPLATE)
    for cfg, tag in ((cubic, "cubic"), (quintic, "quintic")):
        result = ie_synth.synthesize(cfg)
        ie_synth.write_pulse_csv(
            result.pulse, out_dir / f"fig5b_pulse_{tag}.csv", cfg.config_hash())
        evolve.write_transfer_csv(
            evolve.transfer_function(result.pulse),
            out_dir / f"fig5b_transfer_{tag}.csv", cfg.config_hash())
    fq_cfg = faquad.FaquadConfig(t_f=0.15, omega_start=2000.0, omega_f=1.0, x_star=12.0)
    fq = faquad.synthesize_faquad(fq_cfg)
    evolve.write_transfer_csv(
        evolve.transfer_function(fq), out_dir / "fig5b_transfer_faquad.csv",
        fq_cfg.config_hash())


def _preset_figs1(out_dir: Path, threads: int) -> None:
    cfg = ie_synth.SynthesisConfig(t_f=0.3, degree=3, **_PAPER_TEMPLATE)
    result = ie_synth.synthesize(cfg)
    ie_synth.write_pulse_csv(result.pulse, out_dir / "figS1_pulse_ie.csv",
                             cfg.config_hash())
    evolve.write_transfer_csv(
        evolve.transfer_function(result.pulse), out_dir / "figS1_transfer_ie.csv",
        cfg.config_hash())
    fq_cfg = faquad.FaquadConfig(t_f=0.3, omega_start=2000.0, omega_f=1.0, x_star=12.0)
    fq = faquad.synthesize_faquad(fq_cfg)
    ie_synth.write_pulse_csv(fq, out_dir / "figS1_pulse_faquad.csv",
                             fq_cfg.config_hash())
    evolve.write_transfer_csv(
        evolve.transfer_function(fq), out_dir / "figS1_transfer_faquad.csv",
        fq_cfg.config_hash())


def _preset_figs2(out_dir: Path, threads: int) -> None:
    cfg = ie_synth.SynthesisConfig(t_f=0.15, degree=4, free_coeffs=(0.0,),
                                   **_PAPER_TEMPLATE)
    records, best = optimize.scan_coefficients(
        cfg, optimize.default_a2_grid_quartic(), None, threads)
    optimize.write_sweep_csv(records, out_dir / "figS2.csv", cfg.config_hash())
    optimize.write_sweep_summary(records, best, out_dir / "figS2_summary.json",
                                 cfg.config_hash())


def _preset_figs3(out_dir: Path, threads: int) -> None:
    cfg = ie_synth.SynthesisConfig(t_f=0.15, degree=5, free_coeffs=(0.0, 0.0),
                                   **_PAPER_TEMPLATE)
    records, best = optimize.scan_coefficients(
        cfg, optimize.default_a2_grid_quintic(),
        optimize.default_a3_grid_quintic(), threads)
    optimize.write_sweep_csv(records, out_dir / "figS3.csv", cfg.config_hash())
    optimize.write_sweep_summary(records, best, out_dir / "figS3_summary.json",
                                 cfg.config_hash())


_PRESETS = {
    "fig2": _preset_fig2,
    "fig3a": lambda out, th: _preset_fig3(out, th, "IE"),
    "fig3b": lambda out, th: _preset_fig3(out, th, "FAQUAD"),
    "fig4": _preset_fig4,
    "fig5a": _preset_fig5a,
    "fig5b": _preset_fig5b,
    "figS1": _preset_figs1,
    "figS2": _preset_figs2,
    "figS3": _preset_figs3,
}


def cmd_preset(name: str, out_dir: Path, threads: int) -> int:
    if name not in _PRESETS:
        raise ie_synth.ConfigError(
            f"unknown preset {name!r}; available: {sorted(_PRESETS)}")
    _PRESETS[name](out_dir, threads)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qperceptron",
        description="Pulse synthesis and simulation for a sigmoid-activation "
                    "qubit perceptron.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("synth", "faquad", "transfer", "sweep", "scan", "network"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--threads", type=int, default=1,
                       help="worker count (speed only; output bytes unchanged)")
    p = sub.add_parser("preset")
    p.add_argument("name", help=f"one of {sorted(_PRESETS)}")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--threads", type=int, default=1)
    return parser


_COMMANDS = {
    "synth": cmd_synth,
    "faquad": cmd_faquad,
    "transfer": cmd_transfer,
    "sweep": cmd_sweep,
    "scan": cmd_scan,
    "network": cmd_network,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "preset":
            code = cmd_preset(args.name, out_dir, args.threads)
        else:
            config = _load_config(args.config)
            code = _COMMANDS[args.command](config, out_dir, args.threads)
    except (ie_synth.ConfigError, json.JSONDecodeError, KeyError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ie_synth.SynthesisFailure, optimize.UnattainableToleranceError) as exc:
        print(f"synthesis failure: {exc}", file=sys.stderr)
        return EXIT_SYNTHESIS
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    return code


if __name__ == "__main__":
    sys.exit(main())
