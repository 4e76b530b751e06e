"""Configuration-driven experiment runner with machine-readable outputs.

Usage:

    hologate run CONFIG.json [--out DIR] [--steps N] [--seed S]
    hologate list [--schema NAME]

A config is a JSON object ``{"version": "1", "experiment": ..., "model":
{...}, "params": {...}}`` plus optional ``seed`` and ``steps``; every config
is schema-validated (unknown keys rejected) before any computation runs.
Each run writes its tabular/operator outputs plus a ``*.manifest.json``
echoing the config, the effective seed and resolution, wall time and the
kernel backend.  Output bodies are deterministic for a fixed seed;
timestamps only ever appear in the manifest.

Exit codes: 0 success, 2 config/schema violation, 4 unreachable phase or
non-converged resolution, 3 any other numerical failure.  Failures emit a
single-line JSON error record on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .gates import (
    Loop,
    analytic_gate,
    curvature_density,
    pacman_loop,
    phase_integrals,
    sampled_loop,
    solve_beta_for_phase,
)
from .dynamics import fidelity_time_sweep
from .geometry import parallel_transport
from .model import ModelConfig, ParameterPoint, spectral_gap
from .noise import (
    COHERENT_CSV_HEADER,
    NoiseProcessSpec,
    coherent_error_sweep,
    noisy_average_vs_master,
)

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_NUMERIC = 3
EXIT_UNREACHABLE = 4

GAP_CSV_HEADER = ["W", "gap_arc", "gap_min_path", "asymptotic_gap", "quintic_mismatch"]
RADIAL_CSV_HEADER = ["r", "C1", "C2"]
LOOP_CSV_HEADER = ["t", "re", "im"]


class ConfigError(ValueError):
    pass


class UnreachableError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Schemas
# ---------------------------------------------------------------------------

_COMPLEX = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}

_MODEL_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "d": {"type": "integer", "minimum": 2},
        "omega_d": _COMPLEX,
        "W": {"type": "number", "minimum": 0},
        "gamma": {"type": "number", "minimum": 0},
    },
}

_LOOP_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["profile", "R", "beta", "t1", "t2"],
            "properties": {
                "profile": {"const": "pacman"},
                "R": {"type": "number", "exclusiveMinimum": 0},
                "beta": {"type": "number", "exclusiveMinimum": 0},
                "t1": {"type": "number", "exclusiveMinimum": 0},
                "t2": {"type": "number", "exclusiveMinimum": 0},
                "schedule": {"type": "string"},
            },
        },
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["profile", "times", "values"],
            "properties": {
                "profile": {"const": "samples"},
                "times": {"type": "array", "items": {"type": "number"}, "minItems": 4},
                "values": {
                    "type": "array",
                    "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                    "minItems": 4,
                },
            },
        },
    ]
}

_OMEGA_SCHEMA = {"type": "array", "items": _COMPLEX, "minItems": 2}

_GRID = {"type": "array", "items": {"type": "number"}, "minItems": 1}

EXPERIMENTS: dict[str, dict] = {
    "gate": {
        "description": "closed-form gate and both phase integrals of one loop",
        "params": {
            "type": "object",
            "additionalProperties": False,
            "required": ["loop", "omega", "arity"],
            "properties": {
                "loop": _LOOP_SCHEMA,
                "omega": _OMEGA_SCHEMA,
                "arity": {"enum": ["one", "two"]},
                "target_alpha2": {"type": "number"},
                "radial_r_max": {"type": "number", "exclusiveMinimum": 0},
                "radial_points": {"type": "integer", "minimum": 8},
            },
        },
    },
    "transport": {
        "description": "parallel-transport holonomy of one loop vs the closed form",
        "params": {
            "type": "object",
            "additionalProperties": False,
            "required": ["loop", "omega", "arity"],
            "properties": {
                "loop": _LOOP_SCHEMA,
                "omega": _OMEGA_SCHEMA,
                "arity": {"enum": ["one", "two"]},
                "target_alpha2": {"type": "number"},
            },
        },
    },
    "gap": {
        "description": "two-atom spectral gap versus blockade strength",
        "params": {
            "type": "object",
            "additionalProperties": False,
            "required": ["W_list", "R"],
            "properties": {
                "W_list": _GRID,
                "R": {"type": "number", "exclusiveMinimum": 0},
                "omega": _OMEGA_SCHEMA,
                "n_path": {"type": "integer", "minimum": 2},
            },
        },
    },
    "time-sweep": {
        "description": "fidelity/leakage of the driven two-atom gate over protocol times",
        "params": {
            "type": "object",
            "additionalProperties": False,
            "required": ["R", "schedule", "t1_grid", "t2_grid", "gamma_list"],
            "properties": {
                "R": {"type": "number", "exclusiveMinimum": 0},
                "schedule": {"type": "string"},
                "t1_grid": _GRID,
                "t2_grid": _GRID,
                "gamma_list": _GRID,
                "steps_per_unit": {"type": "number", "exclusiveMinimum": 0},
            },
        },
    },
    "coherent-sweep": {
        "description": "gate fidelity under constant loop-amplitude errors",
        "params": {
            "type": "object",
            "additionalProperties": False,
            "required": ["R_list", "epsilon_list"],
            "properties": {
                "R_list": _GRID,
                "epsilon_list": _GRID,
                "t1": {"type": "number", "exclusiveMinimum": 0},
                "t2": {"type": "number", "exclusiveMinimum": 0},
            },
        },
    },
    "stochastic": {
        "description": "trajectory-averaged drive noise vs master equation",
        "params": {
            "type": "object",
            "additionalProperties": False,
            "required": ["loop", "omega", "sigma2", "tau_c", "gamma_noise", "n_traj"],
            "properties": {
                "loop": _LOOP_SCHEMA,
                "omega": _OMEGA_SCHEMA,
                "sigma2": {"type": "number", "minimum": 0},
                "tau_c": {"type": "number", "exclusiveMinimum": 0},
                "gamma_noise": {"type": "number", "minimum": 0},
                "n_traj": {"type": "integer", "minimum": 1},
                "arity": {"enum": ["one", "two"]},
                "master_mode": {"enum": ["lindblad", "frozen", "exact"]},
                "check_doubling": {"type": "boolean"},
            },
        },
    },
}


def config_schema(experiment: str) -> dict:
    return {
        "type": "object",
        "additionalProperties": False,
        "required": ["version", "experiment", "model", "params"],
        "properties": {
            "version": {"const": "1"},
            "experiment": {"const": experiment},
            "model": _MODEL_SCHEMA,
            "params": EXPERIMENTS[experiment]["params"],
            "seed": {"type": "integer", "minimum": 0},
            "steps": {"type": "integer", "minimum": 64},
        },
    }


# ---------------------------------------------------------------------------
# Config materialisation
# ---------------------------------------------------------------------------


def _as_complex(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    return complex(v[0], v[1])


def _model_from(cfg_block: dict) -> ModelConfig:
    return ModelConfig(
        d=int(cfg_block.get("d", 2)),
        omega_d=_as_complex(cfg_block.get("omega_d", 1.0)),
        W=float(cfg_block.get("W", 10.0)),
        gamma=float(cfg_block.get("gamma", 0.0)),
    )


def _omega_from(params: dict, d: int) -> np.ndarray:
    omega = np.array([_as_complex(v) for v in params["omega"]])
    if omega.size != d:
        raise ConfigError(f"omega has length {omega.size}, model has d={d}")
    nrm = np.linalg.norm(omega)
    if nrm == 0:
        raise ConfigError("omega must be nonzero")
    return omega / nrm


def _loop_from(params: dict, omega: np.ndarray) -> Loop:
    spec = params["loop"]
    if spec["profile"] == "pacman":
        beta = float(spec["beta"])
        if "target_alpha2" in params:
            sol = solve_beta_for_phase(float(spec["R"]), float(params["target_alpha2"]), "alpha2")
            if sol.is_noop:
                raise UnreachableError("target phase 0 yields a no-op loop")
            beta = sol.beta
        return pacman_loop(
            float(spec["R"]), beta, float(spec["t1"]), float(spec["t2"]), omega,
            schedule=spec.get("schedule", "linear"),
        )
    if "target_alpha2" in params:
        raise ConfigError("target_alpha2 tunes the arc angle and needs a pacman profile")
    times = np.asarray(spec["times"], dtype=float)
    values = np.array([complex(v[0], v[1]) for v in spec["values"]])
    return sampled_loop(times, values, omega)


# ---------------------------------------------------------------------------
# Serialisation helpers
# ---------------------------------------------------------------------------


def _cpair(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def _matrix_json(u: np.ndarray) -> list:
    return [[_cpair(z) for z in row] for row in u]


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header: list[str], rows: list[dict]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join("" if row[k] is None else repr(float(row[k])) for k in header))
    path.write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Experiment implementations
# ---------------------------------------------------------------------------


def _run_gate(model: ModelConfig, params: dict, steps: int, seed, outdir: Path, stem: str) -> list[str]:
    omega = _omega_from(params, model.d)
    loop = _loop_from(params, omega)
    line = phase_integrals(loop, "line")
    surface = phase_integrals(loop, "surface")
    rep = analytic_gate(model, loop, params["arity"], phases=line)
    payload = {
        "alpha1": line.alpha1,
        "alpha2": line.alpha2,
        "alpha1_surface": surface.alpha1,
        "alpha2_surface": surface.alpha2,
        "quad_error": max(line.quad_error, surface.quad_error),
        "U": _matrix_json(rep.U),
        "unitarity_defect": rep.unitarity_defect,
        "arity": params["arity"],
        "loop": loop.meta,
        "duration": loop.duration,
    }
    _write_json(outdir / f"{stem}.gate.json", payload)
    r_max = float(params.get("radial_r_max", max(6.0, 1.2 * loop.meta.get("R", 5.0))))
    n_r = int(params.get("radial_points", 200))
    rs = np.linspace(0.0, r_max, n_r + 1)[1:]
    _write_csv(
        outdir / f"{stem}.radial.csv",
        RADIAL_CSV_HEADER,
        [{"r": r, "C1": curvature_density(1, r), "C2": curvature_density(2, r)} for r in rs],
    )
    ts = np.linspace(0.0, loop.duration, 400)
    fs = loop.f(ts)
    _write_csv(
        outdir / f"{stem}.loop.csv",
        LOOP_CSV_HEADER,
        [{"t": t, "re": z.real, "im": z.imag} for t, z in zip(ts, fs)],
    )
    return [f"{stem}.gate.json", f"{stem}.radial.csv", f"{stem}.loop.csv"]


def _run_transport(model: ModelConfig, params: dict, steps: int, seed, outdir: Path, stem: str) -> list[str]:
    omega = _omega_from(params, model.d)
    loop = _loop_from(params, omega)
    arity = params["arity"]
    frame = "single" if arity == "one" else "two_atom"
    hol = parallel_transport(model, loop, steps, frame)
    ref = analytic_gate(model, loop, arity)
    payload = {
        "U": _matrix_json(hol.U),
        "unitarity_defect": hol.unitarity_defect,
        "steps": hol.steps,
        "method": hol.method,
        "op_distance_to_analytic": float(np.linalg.norm(hol.U - ref.U, 2)),
        "block_offdiag": hol.block_offdiag,
        "w0_phase": _cpair(hol.w0_phase) if hol.w0_phase is not None else None,
        "alpha1": ref.alpha1,
        "alpha2": ref.alpha2,
    }
    _write_json(outdir / f"{stem}.transport.json", payload)
    return [f"{stem}.transport.json"]


def _run_gap(model: ModelConfig, params: dict, steps: int, seed, outdir: Path, stem: str) -> list[str]:
    omega = (
        _omega_from(params, model.d)
        if "omega" in params
        else np.eye(model.d)[model.d - 1].astype(complex)
    )
    R = float(params["R"])
    n_path = int(params.get("n_path", 9))
    # Sample the drive path: radial spoke to R plus the circle of radius R.
    radii = np.linspace(0.0, R, n_path + 1)[1:]
    rows = []
    for w in params["W_list"]:
        cfg_w = model.replace(W=float(w), gamma=0.0)
        gap_arc = None
        gap_min = np.inf
        mismatch = 0.0
        for r in radii:
            p = ParameterPoint.from_omegas(abs(model.omega_d) * r * omega)
            rep = spectral_gap(cfg_w, p)
            gap_min = min(gap_min, rep.gap)
            mismatch = max(mismatch, rep.root_match_error)
            if r == radii[-1]:
                gap_arc = rep.gap
                asym = rep.asymptotic_gap
        rows.append(
            {
                "W": float(w),
                "gap_arc": gap_arc,
                "gap_min_path": gap_min,
                "asymptotic_gap": asym,
                "quintic_mismatch": mismatch,
            }
        )
    _write_csv(outdir / f"{stem}.gap.csv", GAP_CSV_HEADER, rows)
    return [f"{stem}.gap.csv"]


def _run_time_sweep(model: ModelConfig, params: dict, steps: int, seed, outdir: Path, stem: str) -> list[str]:
    table = fidelity_time_sweep(
        model,
        float(params["R"]),
        params["schedule"],
        [float(x) for x in params["t1_grid"]],
        [float(x) for x in params["t2_grid"]],
        [float(x) for x in params["gamma_list"]],
        steps_per_unit=float(params.get("steps_per_unit", 64.0)),
    )
    (outdir / f"{stem}.sweep.csv").write_text(table.to_csv())
    return [f"{stem}.sweep.csv"]


def _run_coherent(model: ModelConfig, params: dict, steps: int, seed, outdir: Path, stem: str) -> list[str]:
    rows = coherent_error_sweep(
        model.replace(gamma=0.0),
        [float(r) for r in params["R_list"]],
        [float(e) for e in params["epsilon_list"]],
        t1=float(params.get("t1", 3.0)),
        t2=float(params.get("t2", 4.0)),
    )
    _write_csv(outdir / f"{stem}.coherent.csv", COHERENT_CSV_HEADER, rows)
    return [f"{stem}.coherent.csv"]


def _run_stochastic(model: ModelConfig, params: dict, steps: int, seed, outdir: Path, stem: str) -> list[str]:
    if seed is None:
        raise ConfigError("stochastic experiment requires a seed")
    omega = _omega_from(params, model.d)
    loop = _loop_from(params, omega)
    spec = NoiseProcessSpec(
        sigma2=float(params["sigma2"]),
        tau_c=float(params["tau_c"]),
        gamma=float(params["gamma_noise"]),
        seed=int(seed),
    )
    cmp_ = noisy_average_vs_master(
        model.replace(gamma=0.0),
        loop,
        spec,
        int(params["n_traj"]),
        steps,
        arity=params.get("arity", "one"),
        master_mode=params.get("master_mode", "lindblad"),
        check_doubling=bool(params.get("check_doubling", False)),
    )
    payload = {
        "gamma": spec.gamma,
        "tau_c": spec.tau_c,
        "sigma2": spec.sigma2,
        "n_traj": cmp_.n_traj,
        "trace_distance": cmp_.trace_distance,
        "seed": spec.seed,
        "master_mode": cmp_.master_mode,
        "master_trace": cmp_.rho_master.trace,
        "mean_final_norm": cmp_.mean_final_norm,
        "doubling_change": cmp_.doubling_change,
        "backend": cmp_.backend,
    }
    _write_json(outdir / f"{stem}.stochastic.json", payload)
    return [f"{stem}.stochastic.json"]


_RUNNERS = {
    "gate": _run_gate,
    "transport": _run_transport,
    "gap": _run_gap,
    "time-sweep": _run_time_sweep,
    "coherent-sweep": _run_coherent,
    "stochastic": _run_stochastic,
}

_DEFAULT_STEPS = {
    "gate": 4096,
    "transport": 4096,
    "gap": 4096,
    "time-sweep": 4096,
    "coherent-sweep": 4096,
    "stochastic": 512,
}


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------


def _error(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": {"kind": kind, "message": message}}) + "\n")


def run_config(config_path: str, out_dir: str | None = None, steps: int | None = None, seed: int | None = None) -> int:
    import jsonschema

    t_start = time.perf_counter()
    path = Path(config_path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        _error("schema", f"cannot read config: {exc}")
        return EXIT_SCHEMA
    experiment = raw.get("experiment")
    if experiment not in EXPERIMENTS:
        _error("schema", f"unknown experiment {experiment!r}")
        return EXIT_SCHEMA
    try:
        jsonschema.validate(raw, config_schema(experiment))
    except jsonschema.ValidationError as exc:
        _error("schema", exc.message)
        return EXIT_SCHEMA

    outdir = Path(out_dir or os.environ.get("HOLOGATE_OUT_DIR", "."))
    effective_steps = steps if steps is not None else raw.get("steps", _DEFAULT_STEPS[experiment])
    effective_seed = seed if seed is not None else raw.get("seed")
    stem = path.stem
    try:
        model = _model_from(raw.get("model", {}))
        outdir.mkdir(parents=True, exist_ok=True)
        outputs = _RUNNERS[experiment](model, raw["params"], int(effective_steps), effective_seed, outdir, stem)
    except (ConfigError,) as exc:
        _error("schema", str(exc))
        return EXIT_SCHEMA
    except (UnreachableError,) as exc:
        _error("unreachable", str(exc))
        return EXIT_UNREACHABLE
    except ValueError as exc:
        if "unreachable" in str(exc):
            _error("unreachable", str(exc))
            return EXIT_UNREACHABLE
        _error("numeric", str(exc))
        return EXIT_NUMERIC
    except (RuntimeError, np.linalg.LinAlgError) as exc:
        _error("numeric", str(exc))
        return EXIT_NUMERIC

    manifest = {
        "config": raw,
        "experiment": experiment,
        "seed": effective_seed,
        "steps": int(effective_steps),
        "outputs": outputs,
        "version": __version__,
        "backend": kernels.backend(),
        "wall_time_s": time.perf_counter() - t_start,
        "finished_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    _write_json(outdir / f"{stem}.manifest.json", manifest)
    return EXIT_OK


def list_experiments(schema_name: str | None = None) -> int:
    if schema_name is not None:
        if schema_name not in EXPERIMENTS:
            _error("schema", f"unknown experiment {schema_name!r}")
            return EXIT_SCHEMA
        sys.stdout.write(json.dumps(config_schema(schema_name), indent=2, sort_keys=True) + "\n")
        return EXIT_OK
    for name in sorted(EXPERIMENTS):
        sys.stdout.write(f"{name}: {EXPERIMENTS[name]['description']}\n")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="hologate", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute one experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output directory (default: $HOLOGATE_OUT_DIR or cwd)")
    p_run.add_argument("--steps", type=int, default=None, help="integrator resolution override")
    p_run.add_argument("--seed", type=int, default=None, help="seed override")
    p_list = sub.add_parser("list", help="list experiments or print one schema")
    p_list.add_argument("--schema", default=None, metavar="NAME")
    args = parser.parse_args(argv)
    if args.command == "run":
        return run_config(args.config, args.out, args.steps, args.seed)
    return list_experiments(args.schema)


if __name__ == "__main__":
    sys.exit(main())
