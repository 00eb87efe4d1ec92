"""Readers for the tracker's CSV and JSON emissions.

Every reader names the file and the offending column or line in its
errors; nothing is coerced silently. Inputs are never modified.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    """An input file does not match the expected schema."""


def _rows(path: Path) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, newline="") as handle:
            reader = csv.reader(handle)
            try:
                header = next(reader)
            except StopIteration:
                raise SchemaError(f"{path}: file is empty") from None
            return header, list(reader)
    except OSError as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def read_columns(path: "str | Path", names: "tuple[str, ...]") -> dict[str, np.ndarray]:
    """Read named numeric columns from a CSV with a header row.

    Args:
        path: CSV file whose first row names its columns.
        names: Columns to extract, in any order.

    Returns:
        Column name to float array, all of equal length.

    Raises:
        SchemaError: On a missing column, a missing file, no data rows, or
            a non-numeric cell (reported with its line number).
    """
    path = Path(path)
    header, rows = _rows(path)
    missing = [name for name in names if name not in header]
    if missing:
        raise SchemaError(
            f"{path}: missing column(s) {', '.join(repr(m) for m in missing)};"
            f" found {', '.join(header)}"
        )
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    indices = {name: header.index(name) for name in names}
    out = {name: np.empty(len(rows)) for name in names}
    for k, row in enumerate(rows):
        if len(row) != len(header):
            raise SchemaError(f"{path}:{k + 2}: expected {len(header)} cells, got {len(row)}")
        for name, idx in indices.items():
            try:
                out[name][k] = float(row[idx])
            except ValueError:
                raise SchemaError(
                    f"{path}:{k + 2}: column {name!r} is not numeric: {row[idx]!r}"
                ) from None
    return out


def read_map_jumps(path: "str | Path") -> list[float]:
    """Jump times of the final MAP history in a track CSV.

    The ``map_jumps`` cell of the last row holds the full history as
    ``;``-separated events, each ``time`` or ``time:indicator``.
    """
    path = Path(path)
    header, rows = _rows(path)
    if "map_jumps" not in header:
        raise SchemaError(f"{path}: missing column 'map_jumps'; found {', '.join(header)}")
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    cell = rows[-1][header.index("map_jumps")]
    if not cell:
        return []
    times = []
    for event in cell.split(";"):
        try:
            times.append(float(event.split(":")[0]))
        except ValueError:
            raise SchemaError(f"{path}: malformed map_jumps event {event!r}") from None
    return times


def read_queries(path: "str | Path") -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Per-label (times, values) series from a queries CSV."""
    columns = read_columns(path, ("t", "value"))
    path = Path(path)
    header, rows = _rows(path)
    labels = [row[header.index("query")] for row in rows]
    series: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    for label in dict.fromkeys(labels):
        mask = np.array([lab == label for lab in labels])
        series[label] = (columns["t"][mask], columns["value"][mask])
    return series


def read_truth(path: "str | Path") -> dict:
    """Truth metadata JSON: waypoints, switch times, duration, dims."""
    path = Path(path)
    try:
        with open(path) as handle:
            payload = json.load(handle)
    except OSError as exc:
        raise SchemaError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    for key in ("dims", "duration", "switch_times", "waypoints"):
        if key not in payload:
            raise SchemaError(f"{path}: missing key {key!r}")
    payload["waypoints"] = np.atleast_2d(np.asarray(payload["waypoints"], dtype=float))
    return payload


def axis_columns(dims: int) -> list[tuple[str, str, str]]:
    """Track-CSV (position, intent, intent variance) column names per axis."""
    names = ["x", "y", "z"][:dims]
    return [(n, f"r{n}", f"var_r{n}") for n in names]
