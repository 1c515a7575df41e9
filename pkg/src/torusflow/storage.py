"""Persistence: binary field container, CSV emission, key-value manifests.

Container layout (little-endian):
    magic   4 bytes  b"TFB1"
    u32     format version (1)
    u32     dim
    u32     points_per_axis
    f64*dim side lengths
    u8      kind (0 tensor, 1 metric)
    u32,u32 rank (contravariant, covariant)
    payload row-major float64 components, grid axes first

Manifests and summaries are plain "key = value" text, one entry per line,
with '#' comments; values are written with repr so reruns are bit-identical.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import ManifestMissing
from .grid import MetricField, TensorField, TorusGrid

MAGIC = b"TFB1"
FORMAT_VERSION = 1


def write_field(path, field):
    grid = field.grid
    kind = 1 if isinstance(field, MetricField) else 0
    header = MAGIC + struct.pack(
        "<III", FORMAT_VERSION, grid.dim, grid.points_per_axis)
    header += struct.pack(f"<{grid.dim}d", *grid.side_lengths)
    header += struct.pack("<BII", kind, field.rank[0], field.rank[1])
    payload = np.ascontiguousarray(field.components, dtype="<f8").tobytes()
    Path(path).write_bytes(header + payload)


def read_field(path):
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise ValueError(f"{path}: not a field container")
    off = 4
    version, dim, n = struct.unpack_from("<III", raw, off)
    off += 12
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported container version {version}")
    sides = struct.unpack_from(f"<{dim}d", raw, off)
    off += 8 * dim
    kind, up, down = struct.unpack_from("<BII", raw, off)
    off += 9
    grid = TorusGrid(dim, n, sides)
    shape = grid.shape + (dim,) * (up + down)
    comps = np.frombuffer(raw, dtype="<f8", offset=off).reshape(shape).copy()
    if kind == 1:
        return MetricField(grid, comps)
    return TensorField(grid, comps, (up, down))


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return repr(int(x))
    if isinstance(x, (list, tuple)):
        return ",".join(_fmt(v) for v in x)
    return str(x)


def write_keyvalues(path, entries, header=None):
    lines = []
    if header:
        lines.append(f"# {header}")
    for key, value in entries.items():
        lines.append(f"{key} = {_fmt(value)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_keyvalues(path):
    path = Path(path)
    if not path.is_file():
        raise ManifestMissing(f"no manifest at {path}")
    out = {}
    for ln, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{ln}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def field_to_csv(path, field):
    grid = field.grid
    comps = field.components
    comp_shape = comps.shape[grid.dim:]
    coords = grid.coordinates()
    with open(path, "w") as fh:
        cols = [f"x{a}" for a in range(grid.dim)]
        for idx in np.ndindex(comp_shape):
            cols.append("c" + "".join(str(i) for i in idx))
        fh.write(",".join(cols) + "\n")
        flat_coords = [coords[a].ravel() for a in range(grid.dim)]
        flat = comps.reshape(grid.n_points, -1)
        for p in range(grid.n_points):
            row = [repr(float(flat_coords[a][p])) for a in range(grid.dim)]
            row += [repr(float(v)) for v in flat[p]]
            fh.write(",".join(row) + "\n")


def write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def matrix_to_csv(path, row_labels, col_labels, matrix):
    header = ["row"] + [_fmt(c) for c in col_labels]
    rows = []
    for label, row in zip(row_labels, np.asarray(matrix)):
        rows.append([label] + [repr(float(v)) for v in row])
    write_csv(path, header, rows)


def save_trajectory(directory, traj, label="trajectory"):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = {
        "label": label,
        "dim": traj.grid.dim,
        "points_per_axis": traj.grid.points_per_axis,
        "side_lengths": list(traj.grid.side_lengths),
        "n_times": len(traj.times),
        "times": [float(t) for t in traj.times],
        "bilipschitz": traj.bilipschitz(),
    }
    for key, value in traj.provenance.items():
        entries[f"provenance.{key}"] = value
    for i, (t, d) in enumerate(zip(traj.times, traj.sup_distances)):
        entries[f"sup_distance.{i:04d}"] = d
    write_keyvalues(directory / "manifest.txt", entries, header="flow trajectory")
    write_field(directory / "background.tfb", traj.background)
    if traj.initial is not None:
        write_field(directory / "initial.tfb", traj.initial)
    for i, state in enumerate(traj.states):
        write_field(directory / f"state_{i:04d}.tfb", state)


def load_trajectory(directory):
    from .trajectory import FlowTrajectory
    directory = Path(directory)
    meta = read_keyvalues(directory / "manifest.txt")
    n = int(meta["n_times"])
    times = [float(v) for v in meta["times"].split(",")]
    background = read_field(directory / "background.tfb")
    initial_path = directory / "initial.tfb"
    initial = read_field(initial_path) if initial_path.is_file() else None
    states = [read_field(directory / f"state_{i:04d}.tfb") for i in range(n)]
    return FlowTrajectory(times, states, background, config=None, initial=initial,
                          provenance={"loaded_from": str(directory)})


def report_to_files(directory, report, prefix=None):
    """Emit an AnalysisReport: one CSV per matrix plus a key-value summary."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    prefix = prefix or report.name
    entries = {"analysis": report.name}
    for key, value in sorted(report.scalars.items()):
        entries[f"scalar.{key}"] = value
    for key, (value, resid) in sorted(report.exponents.items()):
        entries[f"exponent.{key}"] = value
        entries[f"exponent_residual.{key}"] = resid
    for key, (ok, tol) in sorted(report.flags.items()):
        entries[f"flag.{key}"] = bool(ok)
        entries[f"flag_tolerance.{key}"] = tol
    for i, note in enumerate(report.notes):
        entries[f"note.{i}"] = note
    write_keyvalues(directory / f"{prefix}_summary.txt", entries)
    for key, (row_labels, col_labels, matrix) in report.matrices.items():
        matrix_to_csv(directory / f"{prefix}_{key}.csv", row_labels, col_labels, matrix)
