"""CSV and JSON serialization with reproducibility headers.

Every CSV starts with ``# key: value`` comment lines (version, seed, basis
convention, config hash) followed by a column header row. Floats are written
with ``repr`` so files round-trip exactly and identical inputs give
byte-identical files.
"""
from __future__ import annotations

import csv
import hashlib
import io as _io
import json
from pathlib import Path

import numpy as np

from . import __version__
from .dualrail import BASIS_CONVENTION
from .geometry import ControlPulse, SpaceCurve
from .linalg import TimeGrid
from .sweep import SweepTable

__all__ = [
    "ParseError", "config_hash", "make_header", "write_csv", "read_csv", "write_json",
    "write_pulse_csv", "read_pulse_csv", "write_curve_csv", "read_curve_csv",
    "write_sweep", "PULSE_COLUMNS", "CURVE_COLUMNS",
]

PULSE_COLUMNS = ("t", "omega", "phi", "delta")
CURVE_COLUMNS = ("t", "rx", "ry", "rz")


class ParseError(ValueError):
    """Malformed input file; the message names the offending line."""


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(config: dict) -> str:
    """First 16 hex digits of the SHA-256 of the canonical JSON form of ``config``."""
    return hashlib.sha256(_canonical(config).encode()).hexdigest()[:16]


def make_header(config: dict | None = None, seed: int | None = None, **extra) -> dict:
    """Header fields embedded in every output file."""
    config = config or {}
    head = {"version": __version__, "seed": seed, "basis_convention": BASIS_CONVENTION,
            "config_hash": config_hash(config), "config": config}
    head.update(extra)
    return head


def write_csv(path, columns, rows, header: dict | None = None) -> None:
    buf = _io.StringIO()
    for key, val in (header or {}).items():
        buf.write(f"# {key}: {_canonical(val)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(float(x)) for x in row])
    Path(path).write_text(buf.getvalue())


def read_csv(path, columns) -> tuple[dict, np.ndarray]:
    """Read a headered CSV; returns ``(header, data)`` with ``data`` of shape ``(n, len(columns))``."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc.strerror})") from None
    header: dict = {}
    rows = []
    seen_columns = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            key, sep, val = line[1:].partition(":")
            if not sep:
                raise ParseError(f"{path}:{lineno}: header line without ':'")
            try:
                header[key.strip()] = json.loads(val)
            except json.JSONDecodeError:
                header[key.strip()] = val.strip()
            continue
        fields = next(csv.reader([line]))
        if not seen_columns:
            if tuple(f.strip() for f in fields) != tuple(columns):
                raise ParseError(f"{path}:{lineno}: expected columns {','.join(columns)}, "
                                 f"got {line.strip()!r}")
            seen_columns = True
            continue
        if len(fields) != len(columns):
            raise ParseError(f"{path}:{lineno}: expected {len(columns)} fields, got {len(fields)}")
        try:
            vals = [float(f) for f in fields]
        except ValueError:
            raise ParseError(f"{path}:{lineno}: non-numeric field in {line.strip()!r}") from None
        if not all(np.isfinite(vals)):
            raise ParseError(f"{path}:{lineno}: non-finite value")
        rows.append(vals)
    if not seen_columns:
        raise ParseError(f"{path}:1: empty file or missing column header")
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return header, np.asarray(rows)


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _grid_from_times(path, t: np.ndarray) -> TimeGrid:
    if t.size < 2:
        raise ParseError(f"{path}: need at least two samples")
    grid = TimeGrid(float(t[-1]), t.size - 1, float(t[0])) if t[-1] > t[0] else None
    if grid is None:
        raise ParseError(f"{path}: times must increase")
    dev = np.abs(t - grid.times)
    bad = np.flatnonzero(dev > 1e-9 * max(1.0, grid.duration))
    if bad.size:
        raise ParseError(f"{path}: data row {bad[0] + 1}: time {t[bad[0]]!r} is off the uniform grid")
    return grid


def write_pulse_csv(path, pulse: ControlPulse, header: dict | None = None) -> None:
    rows = np.column_stack([pulse.times, pulse.omega, pulse.phi, pulse.delta])
    write_csv(path, PULSE_COLUMNS, rows, header)


def read_pulse_csv(path) -> tuple[ControlPulse, dict]:
    header, data = read_csv(path, PULSE_COLUMNS)
    grid = _grid_from_times(path, data[:, 0])
    if np.any(data[:, 1] < 0):
        row = int(np.flatnonzero(data[:, 1] < 0)[0]) + 1
        raise ParseError(f"{path}: data row {row}: negative omega")
    return ControlPulse(grid, data[:, 1], data[:, 2], data[:, 3]), header


def write_curve_csv(path, curve: SpaceCurve, header: dict | None = None) -> None:
    write_csv(path, CURVE_COLUMNS, np.column_stack([curve.times, curve.r]), header)


def read_curve_csv(path) -> tuple[SpaceCurve, dict]:
    header, data = read_csv(path, CURVE_COLUMNS)
    grid = _grid_from_times(path, data[:, 0])
    return SpaceCurve.from_points(grid, data[:, 1:], parameterization="general"), header


def write_sweep(path, table: SweepTable, header: dict | None = None) -> Path:
    """Write ``<axis>,<metric>`` rows and a ``.json`` sidecar with the fit; returns the sidecar path."""
    path = Path(path)
    write_csv(path, (table.axis, table.metric), table.rows(), header)
    sidecar = path.with_suffix(".json")
    write_json(sidecar, table.summary())
    return sidecar
