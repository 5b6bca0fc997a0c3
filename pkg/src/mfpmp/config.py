"""Run configuration: a single JSON document, strictly validated.

Unknown keys are rejected everywhere (no silent typo tolerance), named
presets are expanded to explicit values at parse time, and the expanded
document is what gets echoed next to the run artifacts, so a run can be
reproduced without the original file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .descent import DescentConfig
from .errors import ConfigError
from .models import AdmissibleSet, ModelSpec, ball, box, kuramoto_model
from .presets import CONTROL_PRESETS, DENSITY_PRESETS
from .spectral import FourierField, field_from_harmonics
from .timegrid import ControlSignal, TimeGrid, constant_control

COMMANDS = ("solve-forward", "solve-adjoint", "optimize", "validate")

_VALIDATE_DEFAULTS = {
    "n_particles": [1000, 10000],
    "cost_tol": 0.02,
    "require_moment_monotone": False,
    "lambdas": [1e-3, 2e-3, 4e-3, 8e-3],
    "ratio_tol": 0.05,
    "order_min": 1.8,
    "extra_pairs": 2,
    "local_tol": 1e-6,
    "local_u1": {"kind": "constant", "value": 1.0},
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    model: ModelSpec
    grid: TimeGrid
    n_modes: int
    rho0: FourierField
    u0: ControlSignal
    descent: DescentConfig
    output_dir: Path
    snapshot_times: tuple
    adjoint_snapshots: bool
    validate_params: dict
    expanded: dict = field(repr=False, default_factory=dict)


def _require_keys(doc: dict, allowed: set, required: set, where: str) -> None:
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected an object, got {type(doc).__name__}")
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - set(doc)
    if missing:
        raise ConfigError(f"{where}: missing keys {sorted(missing)}")


def _number(doc, key, where, positive=False):
    v = doc.get(key)
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ConfigError(f"{where}.{key}: expected a number, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(f"{where}.{key}: must be positive, got {v}")
    return float(v)


def _parse_constraint(doc: dict) -> AdmissibleSet:
    where = "model.constraint"
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ConfigError(f"{where}: expected an object with a 'kind'")
    if doc["kind"] == "ball":
        _require_keys(doc, {"kind", "radius"}, {"kind", "radius"}, where)
        return ball(_number(doc, "radius", where, positive=True), m=2)
    if doc["kind"] == "box":
        _require_keys(doc, {"kind", "lower", "upper"}, {"kind", "lower", "upper"}, where)
        try:
            return box(doc["lower"], doc["upper"])
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}.kind: must be 'ball' or 'box', got {doc['kind']!r}")


def _parse_density(doc, n_modes: int) -> tuple[FourierField, dict]:
    where = "initial_density"
    if isinstance(doc, str):
        preset = DENSITY_PRESETS.get(doc)
        if preset is None:
            raise ConfigError(f"{where}: unknown preset {doc!r}")
        rho0 = preset(n_modes)
    elif isinstance(doc, dict):
        _require_keys(doc, {"harmonics"}, {"harmonics"}, where)
        harmonics = {}
        for key, pair in doc["harmonics"].items():
            try:
                n = int(key)
                re, im = float(pair[0]), float(pair[1])
            except (ValueError, TypeError, IndexError) as exc:
                raise ConfigError(f"{where}.harmonics[{key!r}]: expected [re, im]") from exc
            harmonics[n] = complex(re, im)
        try:
            rho0 = field_from_harmonics(n_modes, harmonics)
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from exc
    else:
        raise ConfigError(f"{where}: expected a preset name or harmonics object")
    center = rho0.center
    echoed = {}
    for n in range(center + 1):
        c = rho0.coeffs[center + n]
        if c != 0:
            echoed[str(n)] = [c.real, c.imag]
    return rho0, {"harmonics": echoed}


def _parse_control(doc, grid: TimeGrid, control_set: AdmissibleSet
                   ) -> tuple[ControlSignal, dict]:
    where = "initial_control"
    if isinstance(doc, str):
        preset = CONTROL_PRESETS.get(doc)
        if preset is None:
            raise ConfigError(f"{where}: unknown preset {doc!r}")
        u0 = preset(grid)
    elif isinstance(doc, dict) and "constant" in doc:
        _require_keys(doc, {"constant"}, {"constant"}, where)
        u0 = constant_control(grid, doc["constant"])
    elif isinstance(doc, dict) and "values" in doc:
        _require_keys(doc, {"values"}, {"values"}, where)
        try:
            u0 = ControlSignal(grid, np.asarray(doc["values"], dtype=float))
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{where}: {exc}") from exc
    else:
        raise ConfigError(f"{where}: expected a preset name, 'constant', or 'values'")
    if u0.m != control_set.m:
        raise ConfigError(f"{where}: control dimension {u0.m} != constraint dimension")
    for i, row in enumerate(u0.values):
        if not control_set.contains(row):
            raise ConfigError(f"{where}: node {i} value {row.tolist()} outside the admissible set")
    return u0, {"values": [list(map(float, row)) for row in u0.values]}


def _parse_descent(doc: dict | None) -> DescentConfig:
    if doc is None:
        return DescentConfig()
    where = "descent"
    allowed = {"c", "theta", "lambda_tol", "j_max", "k_max", "eps_tol", "lambda_patience"}
    _require_keys(doc, allowed, set(), where)
    kwargs = {}
    for key in allowed & set(doc):
        v = doc[key]
        if key in ("j_max", "k_max", "lambda_patience"):
            if not isinstance(v, int) or isinstance(v, bool):
                raise ConfigError(f"{where}.{key}: expected an integer, got {v!r}")
            kwargs[key] = v
        else:
            kwargs[key] = _number(doc, key, where)
    try:
        return DescentConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _parse_validate(doc: dict | None) -> dict:
    params = dict(_VALIDATE_DEFAULTS)
    if doc is None:
        return params
    _require_keys(doc, set(_VALIDATE_DEFAULTS), set(), "validate")
    params.update(doc)
    return params


def parse_config_dict(doc: dict) -> RunConfig:
    top_allowed = {
        "command", "model", "grid", "initial_density", "initial_control",
        "descent", "output_dir", "snapshot_times", "adjoint_snapshots", "validate",
    }
    _require_keys(doc, top_allowed,
                  {"command", "model", "grid", "initial_density", "initial_control",
                   "output_dir"}, "config")

    command = doc["command"]
    if command not in COMMANDS:
        raise ConfigError(f"config.command: must be one of {COMMANDS}, got {command!r}")

    _require_keys(doc["model"], {"alpha", "x0", "constraint"},
                  {"alpha", "x0", "constraint"}, "model")
    alpha = _number(doc["model"], "alpha", "model")
    x0 = _number(doc["model"], "x0", "model")
    control_set = _parse_constraint(doc["model"]["constraint"])
    model = kuramoto_model(alpha, x0, control_set)

    _require_keys(doc["grid"], {"T", "tau", "n_modes"}, {"T", "tau", "n_modes"}, "grid")
    T = _number(doc["grid"], "T", "grid", positive=True)
    tau = _number(doc["grid"], "tau", "grid", positive=True)
    n_modes = doc["grid"]["n_modes"]
    if not isinstance(n_modes, int) or isinstance(n_modes, bool) or n_modes % 2 or n_modes < 4:
        raise ConfigError(f"grid.n_modes: must be an even integer >= 4, got {n_modes!r}")
    try:
        grid = TimeGrid(T, tau)
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from exc

    rho0, density_echo = _parse_density(doc["initial_density"], n_modes)
    u0, control_echo = _parse_control(doc["initial_control"], grid, control_set)
    descent = _parse_descent(doc.get("descent"))
    validate_params = _parse_validate(doc.get("validate"))

    snapshot_times = doc.get("snapshot_times", [])
    if not isinstance(snapshot_times, list):
        raise ConfigError("config.snapshot_times: expected a list of times")
    for t in snapshot_times:
        if not isinstance(t, (int, float)) or isinstance(t, bool) or t < 0 or t > T:
            raise ConfigError(f"config.snapshot_times: time {t!r} outside [0, T]")

    adjoint_snapshots = doc.get("adjoint_snapshots", False)
    if not isinstance(adjoint_snapshots, bool):
        raise ConfigError("config.adjoint_snapshots: expected a boolean")

    output_dir = Path(doc["output_dir"])  # relative paths resolve against the CWD

    expanded = {
        "command": command,
        "model": {"alpha": alpha, "x0": x0, "constraint": dict(doc["model"]["constraint"])},
        "grid": {"T": T, "tau": tau, "n_modes": n_modes},
        "initial_density": density_echo,
        "initial_control": control_echo,
        "descent": {
            "c": descent.c, "theta": descent.theta, "lambda_tol": descent.lambda_tol,
            "j_max": descent.j_max, "k_max": descent.k_max, "eps_tol": descent.eps_tol,
            "lambda_patience": descent.lambda_patience,
        },
        "output_dir": str(doc["output_dir"]),
        "snapshot_times": [float(t) for t in snapshot_times],
        "adjoint_snapshots": adjoint_snapshots,
        "validate": validate_params,
    }
    return RunConfig(
        command=command,
        model=model,
        grid=grid,
        n_modes=n_modes,
        rho0=rho0,
        u0=u0,
        descent=descent,
        output_dir=output_dir,
        snapshot_times=tuple(float(t) for t in snapshot_times),
        adjoint_snapshots=adjoint_snapshots,
        validate_params=validate_params,
        expanded=expanded,
    )


def apply_overrides(doc: dict, overrides) -> dict:
    """Apply dotted key=value pairs (values parsed as JSON, else strings)."""
    out = json.loads(json.dumps(doc))
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        dotted, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = out
        keys = dotted.split(".")
        for key in keys[:-1]:
            if key not in node or not isinstance(node[key], dict):
                node[key] = {}
            node = node[key]
        node[keys[-1]] = value
    return out


def parse_config(path, overrides=None) -> RunConfig:
    """Load, override, validate, and expand a JSON run configuration."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    doc = apply_overrides(doc, overrides)
    return parse_config_dict(doc)
