"""Experiment configuration: TOML schema, validation, and problem assembly.

The schema is flat keys plus one table per model family::

    model = "wave_heat"        # wave_heat | lshape | scalar_demo | custom
    T = 2.0
    N_t = 200
    lambda = [1.0]             # resolvent parameters, each > 0
    omega = [0.25]             # weight exponents, each >= 0 (default 1/(2T))
    tol_update = 1e-10
    max_iter = 500
    out_dir = "results"
    seed = 0

    [wave]                     # wave_heat only
    n_cells = 16
    rho = 1.0
    modulus = 1.0
    damping = 0.0
    external_mode = "none"     # none | velocity_in_force_out | force_in_velocity_out

    [heat]                     # wave_heat only
    n_nodes = 16

    [lshape]                   # lshape only
    refine = 1
    damping = 0.0

    [scalar]                   # scalar_demo only
    a = -1.0
    x0 = 1.0

    [custom]                   # custom only
    path = "matrices.npz"      # arrays A,B_ext,B_int,C_ext,C_int,H,N_c (+ optional D,x0)

    [input]                    # external drive, any model
    kind = "zero"              # zero | sine
    amplitude = 1.0
    frequency = 1.0

Unknown keys are rejected.  ``parse_config`` and ``dump_config`` round-trip:
parsing the dump of a config reproduces it exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ParseError, ValidationError
from .models import (
    HeatCGParams,
    Wave1dParams,
    build_lshape_problem,
    build_scalar_demo,
    build_wave_heat_problem,
)
from .node import CouplingOperator, assemble_node
from .operators import CoupledProblem
from .trajectory import MIDPOINT, GridTrajectory, TimeGrid

__all__ = ["ExperimentConfig", "parse_config", "dump_config", "build_problem"]

MODELS = ("wave_heat", "lshape", "scalar_demo", "custom")
INPUT_KINDS = ("zero", "sine")
PORT_MODES = ("none", "velocity_in_force_out", "force_in_velocity_out")

_MODEL_TABLES = {
    "wave_heat": ("wave", "heat"),
    "lshape": ("lshape",),
    "scalar_demo": ("scalar",),
    "custom": ("custom",),
}

_DEFAULTS = {
    "wave": {
        "n_cells": 16,
        "rho": 1.0,
        "modulus": 1.0,
        "damping": 0.0,
        "external_mode": "none",
    },
    "heat": {"n_nodes": 16},
    "lshape": {"refine": 1, "damping": 0.0},
    "scalar": {"a": -1.0, "x0": 1.0},
    "custom": {"path": ""},
    "input": {"kind": "zero", "amplitude": 1.0, "frequency": 1.0},
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description; all defaults already applied."""

    model: str
    T: float
    N_t: int
    lambdas: tuple
    omegas: tuple
    tol_update: float
    max_iter: int
    out_dir: str
    seed: int
    model_params: dict
    input_params: dict

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(self.T, self.N_t)


def _want(value, kinds, field: str):
    if isinstance(value, bool) or not isinstance(value, kinds):
        raise ValidationError(field, f"expected {kinds[0].__name__}, got {value!r}")
    return value


def _want_float(value, field: str) -> float:
    return float(_want(value, (int, float), field))


def _want_int(value, field: str) -> int:
    return int(_want(value, (int,), field))


def _want_str(value, field: str) -> str:
    return str(_want(value, (str,), field))


def _take_table(raw: dict, name: str, allowed: bool) -> dict:
    block = raw.pop(name, None)
    if block is None:
        block = {}
    elif not allowed:
        raise ValidationError(name, "table not valid for this model")
    if not isinstance(block, dict):
        raise ValidationError(name, "must be a table")
    out = dict(_DEFAULTS[name])
    for key, value in block.items():
        if key not in out:
            raise ValidationError(f"{name}.{key}", "unknown key")
        out[key] = value
    return out


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a TOML experiment description."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(str(exc)) from exc

    model = _want_str(raw.pop("model", "wave_heat"), "model")
    if model not in MODELS:
        raise ValidationError("model", f"unknown model {model!r}")

    T = _want_float(raw.pop("T", 2.0), "T")
    if T <= 0.0:
        raise ValidationError("T", f"must be positive, got {T}")
    N_t = _want_int(raw.pop("N_t", 200), "N_t")
    if N_t < 1:
        raise ValidationError("N_t", f"must be >= 1, got {N_t}")

    lambdas = raw.pop("lambda", [1.0])
    if not isinstance(lambdas, list) or not lambdas:
        raise ValidationError("lambda", "must be a nonempty list")
    lambdas = tuple(_want_float(v, "lambda") for v in lambdas)
    if any(lam <= 0.0 for lam in lambdas):
        raise ValidationError("lambda", f"entries must be positive, got {list(lambdas)}")

    omegas = raw.pop("omega", [0.5 / T])
    if not isinstance(omegas, list) or not omegas:
        raise ValidationError("omega", "must be a nonempty list")
    omegas = tuple(_want_float(v, "omega") for v in omegas)
    if any(om < 0.0 for om in omegas):
        raise ValidationError("omega", f"entries must be nonnegative, got {list(omegas)}")

    tol_update = _want_float(raw.pop("tol_update", 1e-10), "tol_update")
    if tol_update <= 0.0:
        raise ValidationError("tol_update", f"must be positive, got {tol_update}")
    max_iter = _want_int(raw.pop("max_iter", 500), "max_iter")
    if max_iter < 1:
        raise ValidationError("max_iter", f"must be >= 1, got {max_iter}")
    out_dir = _want_str(raw.pop("out_dir", "results"), "out_dir")
    seed = _want_int(raw.pop("seed", 0), "seed")
    if seed < 0:
        raise ValidationError("seed", f"must be >= 0, got {seed}")

    model_params = {}
    for table in ("wave", "heat", "lshape", "scalar", "custom"):
        allowed = table in _MODEL_TABLES[model]
        block = _take_table(raw, table, allowed)
        if allowed:
            model_params[table] = block
    input_params = _take_table(raw, "input", True)

    for key in raw:
        raise ValidationError(key, "unknown key")

    _validate_model_params(model, model_params)
    kind = _want_str(input_params["kind"], "input.kind")
    if kind not in INPUT_KINDS:
        raise ValidationError("input.kind", f"unknown kind {kind!r}")
    input_params["kind"] = kind
    input_params["amplitude"] = _want_float(input_params["amplitude"], "input.amplitude")
    input_params["frequency"] = _want_float(input_params["frequency"], "input.frequency")

    return ExperimentConfig(
        model=model,
        T=T,
        N_t=N_t,
        lambdas=lambdas,
        omegas=omegas,
        tol_update=tol_update,
        max_iter=max_iter,
        out_dir=out_dir,
        seed=seed,
        model_params=model_params,
        input_params=input_params,
    )


def _validate_model_params(model: str, params: dict) -> None:
    if model == "wave_heat":
        wave = params["wave"]
        wave["n_cells"] = _want_int(wave["n_cells"], "wave.n_cells")
        for key in ("rho", "modulus", "damping"):
            wave[key] = _want_float(wave[key], f"wave.{key}")
        mode = _want_str(wave["external_mode"], "wave.external_mode")
        if mode not in PORT_MODES:
            raise ValidationError("wave.external_mode", f"unknown mode {mode!r}")
        wave["external_mode"] = mode
        heat = params["heat"]
        heat["n_nodes"] = _want_int(heat["n_nodes"], "heat.n_nodes")
    elif model == "lshape":
        block = params["lshape"]
        block["refine"] = _want_int(block["refine"], "lshape.refine")
        block["damping"] = _want_float(block["damping"], "lshape.damping")
    elif model == "scalar_demo":
        block = params["scalar"]
        block["a"] = _want_float(block["a"], "scalar.a")
        block["x0"] = _want_float(block["x0"], "scalar.x0")
    else:
        block = params["custom"]
        path = _want_str(block["path"], "custom.path")
        if not path:
            raise ValidationError("custom.path", "required for model = custom")
        block["path"] = path


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {value!r}")


def dump_config(config: ExperimentConfig) -> str:
    """Serialize a config to TOML; ``parse_config`` of the result is equal."""
    lines = [
        f"model = {_toml_value(config.model)}",
        f"T = {_toml_value(config.T)}",
        f"N_t = {_toml_value(config.N_t)}",
        f"lambda = {_toml_value(list(config.lambdas))}",
        f"omega = {_toml_value(list(config.omegas))}",
        f"tol_update = {_toml_value(config.tol_update)}",
        f"max_iter = {_toml_value(config.max_iter)}",
        f"out_dir = {_toml_value(config.out_dir)}",
        f"seed = {_toml_value(config.seed)}",
    ]
    for table in _MODEL_TABLES[config.model]:
        lines.append("")
        lines.append(f"[{table}]")
        for key, value in config.model_params[table].items():
            lines.append(f"{key} = {_toml_value(value)}")
    lines.append("")
    lines.append("[input]")
    for key, value in config.input_params.items():
        lines.append(f"{key} = {_toml_value(value)}")
    return "\n".join(lines) + "\n"


def _external_input(config: ExperimentConfig, grid: TimeGrid, m_ext: int) -> GridTrajectory:
    kind = config.input_params["kind"]
    if kind == "zero" or m_ext == 0:
        return GridTrajectory.zeros(grid, MIDPOINT, m_ext)
    amp = config.input_params["amplitude"]
    freq = config.input_params["frequency"]
    signal = amp * np.sin(2.0 * np.pi * freq * grid.midpoint_times)
    return GridTrajectory(grid, MIDPOINT, np.tile(signal[:, None], (1, m_ext)))


def _load_custom(config: ExperimentConfig, grid: TimeGrid) -> CoupledProblem:
    path = config.model_params["custom"]["path"]
    with np.load(path) as data:
        required = ("A", "B_ext", "B_int", "C_ext", "C_int", "H", "N_c")
        missing = [key for key in required if key not in data]
        if missing:
            raise ValidationError("custom.path", f"missing arrays: {missing}")
        node = assemble_node(
            A=data["A"],
            B_ext=data["B_ext"],
            B_int=data["B_int"],
            C_ext=data["C_ext"],
            C_int=data["C_int"],
            D=data["D"] if "D" in data else None,
            H=data["H"],
        )
        coupling = CouplingOperator(data["N_c"])
        x0 = data["x0"] if "x0" in data else np.zeros(node.n)
    u_ext = _external_input(config, grid, node.m_ext)
    return CoupledProblem(node=node, coupling=coupling, grid=grid, x0=x0, u_ext=u_ext)


def build_problem(config: ExperimentConfig) -> CoupledProblem:
    """Assemble the CoupledProblem described by a config.

    Raises the node/coupling certificate errors (NotDissipative and friends)
    for inadmissible custom matrices; the CLI reports these per problem.
    """
    grid = config.grid
    if config.model == "wave_heat":
        wave = config.model_params["wave"]
        heat = config.model_params["heat"]
        mode = wave["external_mode"]
        external = None if mode == "none" else mode
        wave_params = Wave1dParams(
            n_cells=wave["n_cells"],
            rho=wave["rho"],
            modulus=wave["modulus"],
            damping=wave["damping"],
        )
        m_ext = 0 if external is None else 1
        return build_wave_heat_problem(
            wave_params,
            HeatCGParams(n_nodes=heat["n_nodes"]),
            grid,
            u_ext=_external_input(config, grid, m_ext),
            external_mode=external,
        )
    if config.model == "lshape":
        block = config.model_params["lshape"]
        refine = block["refine"]
        # external stress port spans the top edge of body 1: 4*refine faces
        u_ext = _external_input(config, grid, 4 * refine)
        return build_lshape_problem(
            grid, refine=refine, damping=block["damping"], u_ext=u_ext
        )
    if config.model == "scalar_demo":
        block = config.model_params["scalar"]
        return build_scalar_demo(grid, a=block["a"], x0=block["x0"])
    return _load_custom(config, grid)
