"""Configuration-driven command line: solve, optimize, validate, dump artifacts.

    mfpmp <command> --config <path> [--output <dir>] [--override key=value ...]

Commands: solve-forward, solve-adjoint, optimize, validate.  All artifacts
(JSON summaries, CSV tables, snapshot dumps) are written atomically and are
byte-identical across repeated runs of the same configuration, timing
fields aside; the pipeline contains no randomness.

Exit codes: 0 success, 2 config error, 3 divergence, 4 line-search failure,
5 validation failure, 1 io error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from .adjoint import integrate_backward
from .checks import (
    fig1_slope_pair,
    increment_slope_check,
    local_adjoint_check,
    meanfield_vs_particles,
    synthetic_control_pairs,
)
from .config import COMMANDS, RunConfig, apply_overrides, parse_config_dict
from .descent import STATUS_LINE_SEARCH, run_descent
from .errors import ConfigError, DivergenceError, LineSearchFailure, ValidationFailure
from .forward import density_min, integrate_forward, mass_drift
from .spectral import grid_points, reconstruct_rows
from .timegrid import ControlSignal, Trajectory


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return repr(float(value))


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def _write_json(path: Path, obj) -> None:
    _atomic_write(path, json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def _write_snapshots(path: Path, traj: Trajectory, times) -> None:
    """Dump (t, x, value) rows of the reconstructed field at chosen times."""
    x = grid_points(traj.n_modes)
    rows = []
    for t in times:
        idx = traj.node_index(float(t))
        values = reconstruct_rows(traj.coeffs[idx])[0]
        t_node = idx * 0.5 * traj.tau_effective
        rows.extend((t_node, xj, vj) for xj, vj in zip(x, values))
    _write_csv(path, ("t", "x", "value"), rows)


def _write_control(path: Path, u: ControlSignal) -> None:
    header = ("t",) + tuple(f"u{j + 1}" for j in range(u.m))
    times = u.grid.full_times()
    rows = [(t, *row) for t, row in zip(times, u.values)]
    _write_csv(path, header, rows)


def _run_optimize(config: RunConfig, t_start: float) -> int:
    out = config.output_dir

    def progress(rec):
        print(
            f"iter {rec.k:3d}  cost {rec.cost:.6e}  E {rec.non_extremality:.3e}  "
            f"lambda {rec.lam:.3e}  j {rec.backtrack_count}",
            file=sys.stderr,
        )

    result = run_descent(config.rho0, config.u0, config.model, config.grid,
                         config.descent, progress=progress)
    traj = integrate_forward(config.rho0, result.u_final, config.model, config.grid)

    _write_csv(
        out / "convergence.csv",
        ("k", "cost", "non_extremality", "lambda", "backtrack_count", "wall_time"),
        [(r.k, r.cost, r.non_extremality, r.lam, r.backtrack_count, r.wall_time)
         for r in result.history],
    )
    _write_control(out / "control_final.csv", result.u_final)
    if config.snapshot_times:
        _write_snapshots(out / "density_snapshots.csv", traj, config.snapshot_times)
        if config.adjoint_snapshots:
            cotraj = integrate_backward(traj, result.u_final, config.model)
            _write_snapshots(out / "adjoint_snapshots.csv", cotraj, config.snapshot_times)

    last = result.history[-1]
    summary = {
        "command": "optimize",
        "status": result.status,
        "iterations": result.iterations,
        "initial_cost": result.history[0].cost,
        "final_cost": result.final_cost,
        "final_non_extremality": last.non_extremality,
        "lambda_last": last.lam,
        "density_min": density_min(traj),
        "mass_drift": mass_drift(traj),
        "timings": {"total_seconds": time.perf_counter() - t_start},
    }
    _write_json(out / "summary.json", summary)
    return 4 if result.status == STATUS_LINE_SEARCH else 0


def _run_solve_forward(config: RunConfig, t_start: float) -> int:
    out = config.output_dir
    traj = integrate_forward(config.rho0, config.u0, config.model, config.grid)
    if config.snapshot_times:
        _write_snapshots(out / "density_snapshots.csv", traj, config.snapshot_times)
    summary = {
        "command": "solve-forward",
        "terminal_cost": config.model.cost.eval(traj.terminal_field()),
        "density_min": density_min(traj),
        "mass_drift": mass_drift(traj),
        "timings": {"total_seconds": time.perf_counter() - t_start},
    }
    _write_json(out / "summary.json", summary)
    return 0


def _run_solve_adjoint(config: RunConfig, t_start: float) -> int:
    out = config.output_dir
    traj = integrate_forward(config.rho0, config.u0, config.model, config.grid)
    cotraj = integrate_backward(traj, config.u0, config.model)
    if config.snapshot_times:
        _write_snapshots(out / "density_snapshots.csv", traj, config.snapshot_times)
        _write_snapshots(out / "adjoint_snapshots.csv", cotraj, config.snapshot_times)
    summary = {
        "command": "solve-adjoint",
        "terminal_cost": config.model.cost.eval(traj.terminal_field()),
        "density_min": density_min(traj),
        "mass_drift": mass_drift(traj),
        "adjoint_max_coeff": float(np.max(np.abs(cotraj.coeffs))),
        "timings": {"total_seconds": time.perf_counter() - t_start},
    }
    _write_json(out / "summary.json", summary)
    return 0


def _local_u1_profile(spec: dict, grid) -> np.ndarray:
    kind = spec.get("kind")
    t = grid.full_times()
    if kind == "constant":
        return np.full(t.shape, float(spec.get("value", 1.0)))
    if kind == "sinusoidal":
        amp = float(spec.get("amplitude", 1.0))
        freq = float(spec.get("frequency", 1.0))
        return amp * np.sin(freq * t)
    raise ConfigError(f"validate.local_u1.kind: unknown kind {kind!r}")


def _run_validate(config: RunConfig, t_start: float) -> int:
    out = config.output_dir
    params = config.validate_params
    report: dict = {}
    passed = True

    # Particle oracle over increasing ensemble sizes.
    runs = {}
    discrepancies = []
    for n in params["n_particles"]:
        rep = meanfield_vs_particles(config.rho0, config.u0, config.model,
                                     config.grid, int(n))
        runs[str(int(n))] = rep
        discrepancies.append(rep["moment_discrepancy"])
    cost_gap = runs[str(int(max(params["n_particles"])))]["cost_gap"]
    monotone = all(b <= a for a, b in zip(discrepancies, discrepancies[1:]))
    particles_ok = cost_gap <= params["cost_tol"]
    if params["require_moment_monotone"]:
        particles_ok = particles_ok and monotone
    report["particles"] = {
        "runs": runs,
        "cost_gap": cost_gap,
        "cost_tol": params["cost_tol"],
        "moment_monotone": monotone,
        "passed": particles_ok,
    }
    passed = passed and particles_ok

    # First-order decrement probe on the configured pair plus synthetic ones.
    pairs = [fig1_slope_pair(config.rho0, config.u0, config.model, config.grid)]
    pairs += synthetic_control_pairs(config.grid, config.model.control_set,
                                     int(params["extra_pairs"]))
    slope_reports = []
    slope_ok = True
    for u_ref, u_tgt in pairs:
        rep = increment_slope_check(config.rho0, u_ref, u_tgt, config.model,
                                    config.grid, params["lambdas"])
        ratio_ok = all(np.isfinite(r) and abs(r - 1.0) <= params["ratio_tol"]
                       for r in rep["ratios"])
        order_ok = rep["residual_order"] >= params["order_min"]
        rep["passed"] = bool(ratio_ok and order_ok)
        slope_ok = slope_ok and rep["passed"]
        slope_reports.append(rep)
    report["increment_slope"] = {
        "pairs": slope_reports,
        "ratio_tol": params["ratio_tol"],
        "order_min": params["order_min"],
        "passed": slope_ok,
    }
    passed = passed and slope_ok

    # Closed-form co-density in the rotation-only case.
    u1 = _local_u1_profile(params["local_u1"], config.grid)
    local = local_adjoint_check(u1, config.rho0,
                                float(config.model.params["x0"]), config.grid)
    local["tol"] = params["local_tol"]
    local["passed"] = local["max_error"] <= params["local_tol"]
    report["local_adjoint"] = local
    passed = passed and local["passed"]

    report["passed"] = passed
    report["timings"] = {"total_seconds": time.perf_counter() - t_start}
    _write_json(out / "validation_report.json", report)
    if not passed:
        raise ValidationFailure("one or more oracle tolerances failed; see validation_report.json")
    return 0


_RUNNERS = {
    "optimize": _run_optimize,
    "solve-forward": _run_solve_forward,
    "solve-adjoint": _run_solve_adjoint,
    "validate": _run_validate,
}


def run(config: RunConfig) -> int:
    """Execute one command and write its artifacts under output_dir."""
    t_start = time.perf_counter()
    _write_json(config.output_dir / "config_expanded.json", config.expanded)
    return _RUNNERS[config.command](config, t_start)


def _fail(category: str, message: str) -> None:
    print(json.dumps({"error": {"category": category, "message": message}}),
          file=sys.stderr)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mfpmp",
        description="Descent solver for controlled nonlocal transport on the circle.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="path to a JSON run configuration")
    parser.add_argument("--output", help="override the configured output directory")
    parser.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                        help="dotted-path config override, value parsed as JSON")
    args = parser.parse_args(argv)

    try:
        path = Path(args.config)
        try:
            doc = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
        doc = apply_overrides(doc, args.override)
        doc["command"] = args.command
        if args.output is not None:
            doc["output_dir"] = args.output
        config = parse_config_dict(doc)
        return run(config)
    except ConfigError as exc:
        _fail("config", str(exc))
        return 2
    except DivergenceError as exc:
        _fail("divergence", str(exc))
        return 3
    except LineSearchFailure as exc:
        _fail("line-search", str(exc))
        return 4
    except ValidationFailure as exc:
        _fail("validation", str(exc))
        return 5
    except OSError as exc:
        _fail("io", str(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())
