"""Deterministic rendering of the four standard figure kinds.

Figures are drawn with the Agg backend at fixed geometry and saved with
pinned metadata, so identical inputs give byte-identical image files.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .data import SchemaError, axis_columns, read_columns, read_queries, read_truth

# 95% quantile of chi-squared with 2 degrees of freedom: the ellipse
# (or per-axis band) radius multiplier for 2-dof position confidence.
CHI2_95_2DOF = 5.991464547107979

FIGURE_KINDS = ("trajectory", "timeline", "jumps", "region")

_SAVE_STYLE = {
    "png": {"metadata": {"Software": "intentfigs"}},
    "svg": {"metadata": {"Date": None}},
}


@dataclass(frozen=True)
class PlotSpec:
    """One figure request: inputs, kind, and output image path.

    Attributes:
        kind: One of ``FIGURE_KINDS``.
        out: Output image path; the suffix picks PNG or SVG.
        track: Per-step track CSV (trajectory, timeline, jumps kinds).
        measurements: Measurement CSV overlay (trajectory kind, optional).
        truth: Truth metadata JSON (timeline overlay, trajectory waypoints).
        queries: Query series CSV (region kind).
        stride: Keep every ``stride``-th step for ellipses and rasters.
        xlim: Optional x-axis limits.
        ylim: Optional y-axis limits.
    """

    kind: str
    out: Path
    track: "Path | None" = None
    measurements: "Path | None" = None
    truth: "Path | None" = None
    queries: "Path | None" = None
    stride: int = 5
    xlim: "tuple[float, float] | None" = None
    ylim: "tuple[float, float] | None" = None

    def __post_init__(self) -> None:
        if self.kind not in FIGURE_KINDS:
            raise SchemaError(
                f"unknown figure kind {self.kind!r} (expected one of {', '.join(FIGURE_KINDS)})"
            )
        if self.stride < 1:
            raise SchemaError(f"stride must be positive, got {self.stride}")
        suffix = Path(self.out).suffix.lower().lstrip(".")
        if suffix not in _SAVE_STYLE:
            raise SchemaError(f"output suffix must be .png or .svg, got {self.out}")


def _require(spec: PlotSpec, field: str) -> Path:
    value = getattr(spec, field)
    if value is None:
        raise SchemaError(f"{spec.kind} figure needs --{field}")
    return Path(value)


def _new_axes() -> tuple[plt.Figure, plt.Axes]:
    return plt.subplots(figsize=(6.4, 4.8), dpi=120)


def _finish(fig: plt.Figure, spec: PlotSpec, ax: "plt.Axes | None" = None) -> Path:
    if ax is not None:
        if spec.xlim is not None:
            ax.set_xlim(*spec.xlim)
        if spec.ylim is not None:
            ax.set_ylim(*spec.ylim)
    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    style = _SAVE_STYLE[out.suffix.lower().lstrip(".")]
    fig.savefig(out, **style)
    plt.close(fig)
    return out


def _draw_trajectory(spec: PlotSpec) -> Path:
    track = _require(spec, "track")
    data = read_columns(track, ("t", "x", "y", "var_x", "var_y"))
    fig, ax = _new_axes()
    if spec.measurements is not None:
        meas = read_columns(spec.measurements, ("x", "y"))
        ax.scatter(meas["x"], meas["y"], s=6, c="0.75", label="measurements")
    ax.plot(data["x"], data["y"], color="tab:blue", lw=1.2, label="posterior mean")
    for k in range(0, data["t"].size, spec.stride):
        width = 2.0 * np.sqrt(CHI2_95_2DOF * data["var_x"][k])
        height = 2.0 * np.sqrt(CHI2_95_2DOF * data["var_y"][k])
        ax.add_patch(
            matplotlib.patches.Ellipse(
                (data["x"][k], data["y"][k]), width, height,
                fill=False, color="tab:blue", lw=0.5, alpha=0.6,
            )
        )
    if spec.truth is not None:
        waypoints = read_truth(spec.truth)["waypoints"]
        ax.scatter(
            waypoints[:, 0], waypoints[:, 1],
            marker="x", s=60, c="tab:red", label="waypoints",
        )
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_aspect("equal", adjustable="datalim")
    ax.legend(loc="best")
    ax.set_title("track with 95% position confidence")
    return _finish(fig, spec, ax)


def _true_waypoint_steps(truth: dict, axis: int, horizon: float) -> tuple[np.ndarray, np.ndarray]:
    """Step-function samples of the active true waypoint coordinate."""
    switches = [0.0, *truth["switch_times"], horizon]
    waypoints = truth["waypoints"]
    ts, values = [], []
    for leg in range(len(switches) - 1):
        coordinate = waypoints[min(leg, waypoints.shape[0] - 1), axis]
        ts += [switches[leg], switches[leg + 1]]
        values += [coordinate, coordinate]
    return np.array(ts), np.array(values)


def _draw_timeline(spec: PlotSpec) -> Path:
    track = _require(spec, "track")
    truth = read_truth(_require(spec, "truth"))
    dims = int(truth["dims"])
    columns = axis_columns(dims)
    data = read_columns(
        track, ("t", *(c for _, intent, var in columns for c in (intent, var)))
    )
    fig, axes = plt.subplots(dims, 1, figsize=(6.4, 2.4 * dims), dpi=120, sharex=True)
    axes = np.atleast_1d(axes)
    for axis, (ax, (name, intent, var)) in enumerate(zip(axes, columns)):
        spread = np.sqrt(CHI2_95_2DOF * data[var])
        ax.fill_between(
            data["t"], data[intent] - spread, data[intent] + spread,
            color="tab:blue", alpha=0.2, lw=0,
        )
        ax.plot(data["t"], data[intent], color="tab:blue", lw=1.2, label="estimate")
        ts, values = _true_waypoint_steps(truth, axis, float(data["t"][-1]))
        ax.plot(ts, values, color="tab:red", lw=1.0, ls="--", label="true waypoint")
        ax.set_ylabel(f"{name} destination (m)")
        if axis == 0:
            ax.legend(loc="best")
            ax.set_title("destination posterior against true waypoints")
    axes[-1].set_xlabel("t (s)")
    return _finish(fig, spec)


def _read_jump_histories(path: Path) -> tuple[np.ndarray, list[list[float]]]:
    """Per-record (time, MAP jump times so far) from a track CSV."""
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise SchemaError(f"{path}: file is empty")
        for column in ("t", "map_jumps"):
            if column not in header:
                raise SchemaError(f"{path}: missing column {column!r}; found {', '.join(header)}")
        t_idx, jumps_idx = header.index("t"), header.index("map_jumps")
        times, histories = [], []
        for k, row in enumerate(reader):
            try:
                times.append(float(row[t_idx]))
            except ValueError:
                raise SchemaError(f"{path}:{k + 2}: column 't' is not numeric") from None
            cell = row[jumps_idx]
            try:
                histories.append(
                    [float(event.split(":")[0]) for event in cell.split(";")] if cell else []
                )
            except ValueError:
                raise SchemaError(f"{path}:{k + 2}: malformed map_jumps cell {cell!r}") from None
    if not times:
        raise SchemaError(f"{path}: no data rows")
    return np.array(times), histories


def _draw_jumps(spec: PlotSpec) -> Path:
    track = _require(spec, "track")
    times, histories = _read_jump_histories(track)
    fig, ax = _new_axes()
    xs, ys = [], []
    for k in range(0, times.size, spec.stride):
        xs += [times[k]] * len(histories[k])
        ys += histories[k]
    ax.scatter(xs, ys, s=8, c="tab:blue", label="MAP jump times")
    if spec.truth is not None:
        for i, switch in enumerate(read_truth(spec.truth)["switch_times"]):
            ax.axhline(
                switch, color="tab:red", lw=0.8, ls="--",
                label="true switch" if i == 0 else None,
            )
    ax.set_xlabel("record time (s)")
    ax.set_ylabel("jump time (s)")
    ax.set_title("MAP jump history per step")
    ax.legend(loc="best")
    return _finish(fig, spec, ax)


def _draw_region(spec: PlotSpec) -> Path:
    series = read_queries(_require(spec, "queries"))
    fig, ax = _new_axes()
    for label, (ts, values) in series.items():
        ax.plot(ts, values, lw=1.2, label=label)
    ax.set_ylim(0.0, 1.0)
    ax.set_xlabel("t (s)")
    ax.set_ylabel("probability")
    ax.set_title("intent query against time")
    ax.legend(loc="best")
    spec_clamped = spec if spec.ylim is None else PlotSpec(
        kind=spec.kind, out=spec.out, queries=spec.queries, stride=spec.stride,
        xlim=spec.xlim, ylim=(max(0.0, spec.ylim[0]), min(1.0, spec.ylim[1])),
    )
    return _finish(fig, spec_clamped, ax)


_DRAWERS = {
    "trajectory": _draw_trajectory,
    "timeline": _draw_timeline,
    "jumps": _draw_jumps,
    "region": _draw_region,
}


def render(spec: PlotSpec) -> Path:
    """Render one figure; returns the written image path.

    Raises:
        SchemaError: On a missing input, a malformed file, or a column
            absent from an input CSV.
    """
    plt.rcParams["svg.hashsalt"] = "intentfigs"
    return _DRAWERS[spec.kind](spec)
