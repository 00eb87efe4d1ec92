"""Run configuration and file formats for the command-line tools.

Configs are TOML with one section per concern (scenario, model, filter,
observation, benchmark, io) and full round-tripping: parsing a config and
serialising it back yields a canonical form that reparses identically.
Tracks and measurements travel as CSV with a mandatory header row
(columns ``t, x[, y, z][, vx, vy, vz]``); ground-truth metadata travels
as JSON. Every writer is deterministic: fixed column orders, sorted JSON
keys, shortest round-trip float formatting, no timestamps.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .benchmark import DEFAULTS, BenchmarkResult
from .errors import ConfigError, DataError
from .filter import FilterRun
from .jumps import JumpPrior
from .models import DestinationSet, IntentModel, ModelKind, ModelParams
from .query import Region
from .simulate import GeneratorKind, ScenarioConfig, Trajectory

_AXES = ("x", "y", "z")


def _fmt(value: float) -> str:
    """Shortest exact decimal form; also valid TOML."""
    return repr(float(value))


@dataclass(frozen=True)
class ModelConfig:
    """Filter-model selection plus its continuous-time parameters."""

    kind: str = "piecewise_constant"
    dims: int = 3
    reversion: float = DEFAULTS.reversion
    damping: float = DEFAULTS.damping
    sigma_motion: float = DEFAULTS.sigma_motion
    sigma_intent: float = DEFAULTS.leader_diffusion
    mu_jump: float = 0.0
    sigma_jump: float = DEFAULTS.sigma_jump
    jump_shape: float = DEFAULTS.switch_shape
    jump_scale: float = DEFAULTS.switch_scale
    destinations: "tuple | None" = None

    def build(self) -> IntentModel:
        try:
            kind = ModelKind(self.kind)
        except ValueError:
            names = ", ".join(k.value for k in ModelKind)
            raise ConfigError(f"unknown model kind {self.kind!r} (expected one of {names})") from None
        params = ModelParams(
            reversion=self.reversion,
            damping=self.damping,
            sigma_motion=self.sigma_motion,
            sigma_intent=self.sigma_intent,
            mu_jump=self.mu_jump,
            sigma_jump=self.sigma_jump,
            dims=self.dims,
        )
        prior = None
        if kind is not ModelKind.BASELINE:
            prior = JumpPrior(self.jump_shape, self.jump_scale)
        destinations = None
        if self.destinations is not None:
            if kind is not ModelKind.MULTI_HYPOTHESIS:
                raise ConfigError(f"model kind {self.kind!r} does not take destinations")
            positions, extents, transition, initial = self.destinations
            destinations = DestinationSet(
                positions=np.asarray(positions, dtype=float),
                extents=np.asarray(extents, dtype=float),
                transition=np.asarray(transition, dtype=float),
                initial=np.asarray(initial, dtype=float),
            )
        elif kind is ModelKind.MULTI_HYPOTHESIS:
            raise ConfigError("multi_hypothesis requires a [model.destinations] table")
        return IntentModel(kind, params, jump_prior=prior, destinations=destinations)


@dataclass(frozen=True)
class FilterSettings:
    particles: int = DEFAULTS.n_particles
    ess_threshold: float = DEFAULTS.ess_threshold
    seed: int = 0
    intent_prior_std: float = DEFAULTS.intent_prior_std
    velocity_prior_std: float = DEFAULTS.velocity_prior_std


@dataclass(frozen=True)
class ObservationConfig:
    sigma: float = 15.0


@dataclass(frozen=True)
class BenchmarkConfig:
    realisations: int = 50
    methods: "tuple[str, ...] | None" = None


@dataclass(frozen=True)
class IoConfig:
    measurements: "str | None" = None
    out_dir: str = "."


@dataclass(frozen=True, eq=False)
class RunConfig:
    """Everything a command needs, resolved from TOML plus flag overrides."""

    scenario: ScenarioConfig
    model: ModelConfig
    filter: FilterSettings
    observation: ObservationConfig
    benchmark: BenchmarkConfig
    io: IoConfig
    seed_given: bool = False


def default_config() -> RunConfig:
    return RunConfig(
        scenario=ScenarioConfig(),
        model=ModelConfig(),
        filter=FilterSettings(),
        observation=ObservationConfig(),
        benchmark=BenchmarkConfig(),
        io=IoConfig(),
    )


def _coerce(section: str, key: str, value, target_type):
    if target_type is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"[{section}] {key} must be a number, got {value!r}")
        return float(value)
    if target_type is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"[{section}] {key} must be an integer, got {value!r}")
        return value
    if target_type is str:
        if not isinstance(value, str):
            raise ConfigError(f"[{section}] {key} must be a string, got {value!r}")
        return value
    raise ConfigError(f"[{section}] {key} is not a recognised setting")


def _nested_tuple(value):
    if isinstance(value, list):
        return tuple(_nested_tuple(item) for item in value)
    return value


_SCENARIO_FIELDS = {
    "dims": int,
    "n_waypoints": int,
    "sigma_dynamics": float,
    "sigma_measurement": float,
    "period": float,
    "jitter": float,
    "mu_jump": float,
    "sigma_jump": float,
    "manoeuvre_shape": float,
    "manoeuvre_scale": float,
    "reversion": float,
    "damping": float,
    "capture_radius": float,
    "sim_step": float,
    "max_duration": float,
    "seed": int,
}

_MODEL_FIELDS = {
    "kind": str,
    "dims": int,
    "reversion": float,
    "damping": float,
    "sigma_motion": float,
    "sigma_intent": float,
    "mu_jump": float,
    "sigma_jump": float,
    "jump_shape": float,
    "jump_scale": float,
}

_FILTER_FIELDS = {
    "particles": int,
    "ess_threshold": float,
    "seed": int,
    "intent_prior_std": float,
    "velocity_prior_std": float,
}


def _check_keys(section: str, table: dict, allowed) -> None:
    unknown = sorted(set(table) - set(allowed))
    if unknown:
        raise ConfigError(f"[{section}] has unknown keys: {', '.join(unknown)}")


def _parse_scenario(table: dict) -> ScenarioConfig:
    allowed = set(_SCENARIO_FIELDS) | {"generator", "bounds", "start"}
    _check_keys("scenario", table, allowed)
    kwargs = {}
    for key, target in _SCENARIO_FIELDS.items():
        if key in table:
            kwargs[key] = _coerce("scenario", key, table[key], target)
    if "generator" in table:
        name = _coerce("scenario", "generator", table["generator"], str)
        try:
            kwargs["generator"] = GeneratorKind(name)
        except ValueError:
            names = ", ".join(k.value for k in GeneratorKind)
            raise ConfigError(f"unknown generator {name!r} (expected one of {names})") from None
    for key in ("bounds", "start"):
        if key in table:
            if not isinstance(table[key], list):
                raise ConfigError(f"[scenario] {key} must be an array")
            kwargs[key] = _nested_tuple(table[key])
    return ScenarioConfig(**kwargs)


def _parse_model(table: dict) -> ModelConfig:
    allowed = set(_MODEL_FIELDS) | {"destinations"}
    _check_keys("model", table, allowed)
    kwargs = {}
    for key, target in _MODEL_FIELDS.items():
        if key in table:
            kwargs[key] = _coerce("model", key, table[key], target)
    if "destinations" in table:
        dest = table["destinations"]
        if not isinstance(dest, dict):
            raise ConfigError("[model.destinations] must be a table")
        _check_keys("model.destinations", dest, ("positions", "extents", "transition", "initial"))
        try:
            kwargs["destinations"] = tuple(
                _nested_tuple(dest[key]) for key in ("positions", "extents", "transition", "initial")
            )
        except KeyError as missing:
            raise ConfigError(f"[model.destinations] is missing {missing.args[0]!r}") from None
    return ModelConfig(**kwargs)


def _parse_simple(section: str, table: dict, fields: dict, factory):
    _check_keys(section, table, fields)
    kwargs = {
        key: _coerce(section, key, table[key], target)
        for key, target in fields.items()
        if key in table
    }
    return factory(**kwargs)


def parse_config(text: str) -> RunConfig:
    """Parse a TOML run config; unknown sections or keys are errors."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"config is not valid TOML: {err}") from None
    _check_keys("config", data, ("scenario", "model", "filter", "observation", "benchmark", "io"))

    benchmark_table = dict(data.get("benchmark", {}))
    methods = None
    if "methods" in benchmark_table:
        raw = benchmark_table.pop("methods")
        if not isinstance(raw, list) or not all(isinstance(item, str) for item in raw):
            raise ConfigError("[benchmark] methods must be an array of strings")
        methods = tuple(raw)
    benchmark = _parse_simple(
        "benchmark", benchmark_table, {"realisations": int}, BenchmarkConfig
    )
    if methods is not None:
        benchmark = dataclasses.replace(benchmark, methods=methods)

    io_table = dict(data.get("io", {}))
    _check_keys("io", io_table, ("measurements", "out_dir"))
    io_config = IoConfig(
        measurements=_coerce("io", "measurements", io_table["measurements"], str)
        if "measurements" in io_table
        else None,
        out_dir=_coerce("io", "out_dir", io_table["out_dir"], str)
        if "out_dir" in io_table
        else ".",
    )

    return RunConfig(
        scenario=_parse_scenario(data.get("scenario", {})),
        model=_parse_model(data.get("model", {})),
        filter=_parse_simple("filter", data.get("filter", {}), _FILTER_FIELDS, FilterSettings),
        observation=_parse_simple(
            "observation", data.get("observation", {}), {"sigma": float}, ObservationConfig
        ),
        benchmark=benchmark,
        io=io_config,
        seed_given="seed" in data.get("scenario", {}) or "seed" in data.get("filter", {}),
    )


def read_config(path: "str | Path") -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise DataError(f"cannot read config {path}: {err}") from None
    return parse_config(text)


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ConfigError(f"cannot serialise non-finite value {value}")
        return _fmt(value)
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(value, (tuple, list, np.ndarray)):
        return "[" + ", ".join(_toml_value(item) for item in value) + "]"
    raise ConfigError(f"cannot serialise {value!r} into TOML")


def write_config(config: RunConfig) -> str:
    """Canonical TOML form of a config; parsing it back is an identity."""
    scenario = config.scenario
    lines = ["[scenario]"]
    lines.append(f'generator = "{scenario.generator.value}"')
    for key in _SCENARIO_FIELDS:
        lines.append(f"{key} = {_toml_value(getattr(scenario, key))}")
    if scenario.bounds is not None:
        lines.append(f"bounds = {_toml_value(scenario.bounds)}")
    if scenario.start is not None:
        lines.append(f"start = {_toml_value(scenario.start)}")

    model = config.model
    lines += ["", "[model]"]
    for key in _MODEL_FIELDS:
        lines.append(f"{key} = {_toml_value(getattr(model, key))}")

    lines += ["", "[filter]"]
    for key in _FILTER_FIELDS:
        lines.append(f"{key} = {_toml_value(getattr(config.filter, key))}")

    lines += ["", "[observation]", f"sigma = {_toml_value(config.observation.sigma)}"]

    lines += ["", "[benchmark]"]
    lines.append(f"realisations = {config.benchmark.realisations}")
    if config.benchmark.methods is not None:
        lines.append(f"methods = {_toml_value(config.benchmark.methods)}")

    lines += ["", "[io]"]
    if config.io.measurements is not None:
        lines.append(f"measurements = {_toml_value(config.io.measurements)}")
    lines.append(f"out_dir = {_toml_value(config.io.out_dir)}")

    if model.destinations is not None:
        positions, extents, transition, initial = model.destinations
        lines += [
            "",
            "[model.destinations]",
            f"positions = {_toml_value(positions)}",
            f"extents = {_toml_value(extents)}",
            f"transition = {_toml_value(transition)}",
            f"initial = {_toml_value(initial)}",
        ]
    return "\n".join(lines) + "\n"


def _position_header(dims: int) -> list[str]:
    return ["t"] + list(_AXES[:dims])


def write_measurements_csv(path: "str | Path", times: np.ndarray, measurements: np.ndarray) -> None:
    measurements = np.atleast_2d(np.asarray(measurements, dtype=float))
    dims = measurements.shape[1]
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(_position_header(dims))
        for t, row in zip(np.asarray(times, dtype=float), measurements):
            writer.writerow([_fmt(t)] + [_fmt(v) for v in row])


def write_trajectory_csv(path: "str | Path", traj: Trajectory) -> None:
    dims = traj.positions.shape[1]
    header = _position_header(dims) + [f"v{axis}" for axis in _AXES[:dims]]
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for t, pos, vel in zip(traj.times, traj.positions, traj.velocities):
            writer.writerow([_fmt(t)] + [_fmt(v) for v in pos] + [_fmt(v) for v in vel])


def read_positions_csv(path: "str | Path") -> tuple[np.ndarray, np.ndarray]:
    """Times and positions from a measurement or trajectory CSV.

    The header must be ``t`` followed by 1 to 3 axis columns (velocity
    columns, if present, are ignored). Any malformed row is reported with
    its line number.

    Raises:
        DataError: On a missing file, bad header, or malformed row.
    """
    try:
        handle = open(path, newline="")
    except OSError as err:
        raise DataError(f"cannot read {path}: {err}") from None
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}:1: empty file, expected a header row") from None
        header = [column.strip() for column in header]
        dims = 0
        while dims < 3 and len(header) > dims + 1 and header[dims + 1] == _AXES[dims]:
            dims += 1
        expected = _position_header(dims)
        velocity = [f"v{axis}" for axis in _AXES[:dims]]
        if dims == 0 or header not in (expected, expected + velocity):
            raise DataError(
                f"{path}:1: header must be t,x[,y,z][,vx,vy,vz], got {','.join(header)}"
            )
        times: list[float] = []
        rows: list[list[float]] = []
        for number, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataError(
                    f"{path}:{number}: expected {len(header)} columns, got {len(row)}"
                )
            try:
                values = [float(cell) for cell in row]
            except ValueError:
                raise DataError(f"{path}:{number}: non-numeric value in row") from None
            if not all(math.isfinite(v) for v in values):
                raise DataError(f"{path}:{number}: non-finite value in row")
            times.append(values[0])
            rows.append(values[1 : dims + 1])
    if not times:
        raise DataError(f"{path}:2: no data rows")
    return np.array(times), np.array(rows)


def write_truth_json(path: "str | Path", traj: Trajectory, config: ScenarioConfig) -> None:
    payload = {
        "generator": config.generator.value,
        "seed": config.seed,
        "dims": int(traj.positions.shape[1]),
        "waypoints": [[float(v) for v in row] for row in traj.waypoints],
        "switch_times": [float(t) for t in traj.switch_times],
        "manoeuvre_times": [float(t) for t in traj.manoeuvre_times],
        "duration": float(traj.times[-1]),
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _state_column_names(dims: int) -> list[str]:
    names = []
    for axis in _AXES[:dims]:
        names += [axis, f"v{axis}", f"r{axis}"]
    return names


def format_events(events) -> str:
    """Jump events as ``time`` or ``time:indicator`` joined by ``;``."""
    parts = []
    for time, indicator in events:
        parts.append(_fmt(time) if indicator is None else f"{_fmt(time)}:{indicator}")
    return ";".join(parts)


def write_track_csv(path: "str | Path", run: FilterRun, dims: int) -> None:
    """Per-step posterior records.

    Columns: t; posterior mean per state coordinate (position, velocity,
    leader per axis); marginal variance per coordinate; ESS (empty for
    exact-filter runs); resampled flag; MAP jump events.
    """
    names = _state_column_names(dims)
    header = (
        ["t"] + names + [f"var_{name}" for name in names] + ["ess", "resampled", "map_jumps"]
    )
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for record in run.records:
            ess = "" if math.isnan(record.ess) else _fmt(record.ess)
            writer.writerow(
                [_fmt(record.t)]
                + [_fmt(v) for v in record.mean]
                + [_fmt(v) for v in record.marginal_var]
                + [ess, int(record.resampled), format_events(record.map_events)]
            )


def write_queries_csv(path: "str | Path", records: list[tuple[float, str, float]]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["t", "query", "value"])
        for t, kind, value in records:
            writer.writerow([_fmt(t), kind, _fmt(value)])


def write_benchmark_csv(path: "str | Path", result: BenchmarkResult) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["method", "position_rmse", "destination_rmse"])
        for row in result.table_rows():
            dest = row["destination_rmse"]
            writer.writerow(
                [
                    row["method"],
                    _fmt(row["position_rmse"]),
                    "" if dest is None else _fmt(dest),
                ]
            )


def write_benchmark_text(path: "str | Path", result: BenchmarkResult) -> None:
    Path(path).write_text(result.table_text())


def parse_region(text: str, dims: int) -> Region:
    """Region from a flag string ``xlo,xhi,ylo,yhi[,zlo,zhi]``."""
    try:
        values = [float(part) for part in text.split(",")]
    except ValueError:
        raise ConfigError(f"region {text!r} is not a comma-separated number list") from None
    if len(values) != 2 * dims:
        raise ConfigError(
            f"region needs {2 * dims} numbers (lo,hi per axis) for {dims} axes, got {len(values)}"
        )
    bounds = np.array(values).reshape(dims, 2)
    return Region(lower=bounds[:, 0], upper=bounds[:, 1])


def parse_point(text: str, dims: int) -> np.ndarray:
    """Point from a flag string ``x,y[,z]``."""
    try:
        values = [float(part) for part in text.split(",")]
    except ValueError:
        raise ConfigError(f"point {text!r} is not a comma-separated number list") from None
    if len(values) != dims:
        raise ConfigError(f"point needs {dims} coordinates, got {len(values)}")
    return np.array(values)
