"""Snapshots, visualizer exports, trace files and checkpoints.

Binary snapshot layout (all little-endian)::

    magic     8 bytes   b"CHMGSNAP" (vector field) or b"CHMGSCAL" (scalar map)
    version   uint32
    nx ny nz  3 x int32
    hx hy hz  3 x float64 (dimensionless)
    L         float64 (metres)
    payload   float64, component-major (all m1, then m2, then m3), x fastest

Scalar maps carry one component.  Reading checks the magic, the version and
the payload length.
"""

from __future__ import annotations

import csv
import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from chiralmag.grid import GridSpec, MagnetizationField
from chiralmag.stepping import SolverState, TraceRecord

SNAPSHOT_MAGIC = b"CHMGSNAP"
SCALAR_MAGIC = b"CHMGSCAL"
SNAPSHOT_VERSION = 1
CHECKPOINT_VERSION = 1
_HEADER = struct.Struct("<8sI3i4d")

TRACE_UNITS = ("1", "ps", "1", "J", "1", "1", "1", "1")


class SnapshotError(ValueError):
    pass


class CheckpointError(ValueError):
    pass


def _header(magic, grid):
    return _HEADER.pack(magic, SNAPSHOT_VERSION, grid.nx, grid.ny, grid.nz,
                        grid.hx, grid.hy, grid.hz, grid.L)


def _payload(arr):
    # (c, x, y, z) -> (c, z, y, x) so that x varies fastest in C order
    return np.ascontiguousarray(arr.transpose(0, 3, 2, 1), dtype="<f8").tobytes()


def write_snapshot(path, field):
    with open(path, "wb") as fh:
        fh.write(_header(SNAPSHOT_MAGIC, field.grid))
        fh.write(_payload(field.data))


def write_scalar_snapshot(path, grid, values):
    values = np.asarray(values, dtype=float)
    if values.shape != grid.shape:
        raise ValueError(f"scalar map shape {values.shape} does not match grid {grid.shape}")
    with open(path, "wb") as fh:
        fh.write(_header(SCALAR_MAGIC, grid))
        fh.write(_payload(values[None]))


def _read(path, magic, ncomp):
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise SnapshotError(f"{path}: file too short for a snapshot header")
    got, version, nx, ny, nz, hx, hy, hz, L = _HEADER.unpack_from(raw)
    if got != magic:
        raise SnapshotError(f"{path}: bad magic {got!r}")
    if version != SNAPSHOT_VERSION:
        raise SnapshotError(f"{path}: unsupported snapshot version {version}")
    grid = GridSpec(nx, ny, nz, hx, hy, hz, L)
    n = ncomp * nx * ny * nz
    body = raw[_HEADER.size:]
    if len(body) != 8 * n:
        raise SnapshotError(f"{path}: payload has {len(body)} bytes, expected {8 * n}")
    arr = np.frombuffer(body, dtype="<f8").reshape(ncomp, nz, ny, nx).transpose(0, 3, 2, 1)
    return grid, np.array(arr, dtype=np.float64)


def read_snapshot(path):
    grid, data = _read(path, SNAPSHOT_MAGIC, 3)
    return MagnetizationField(grid, data)


def read_scalar_snapshot(path):
    grid, data = _read(path, SCALAR_MAGIC, 1)
    return grid, data[0]


def write_vtk(path, field, scalars=None):
    """Legacy ASCII VTK structured points with the vector field ``m``.

    ``scalars`` maps names to per-cell arrays written as extra point data.
    Coordinates are in nanometres.
    """
    g = field.grid
    h_nm = [h * g.L * 1e9 for h in g.spacing]
    n = g.n_cells
    lines = [
        "# vtk DataFile Version 3.0",
        "magnetization",
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {g.nx} {g.ny} {g.nz}",
        "ORIGIN " + " ".join(repr(0.5 * h) for h in h_nm),
        "SPACING " + " ".join(repr(h) for h in h_nm),
        f"POINT_DATA {n}",
        "VECTORS m double",
    ]
    vec = field.data.transpose(3, 2, 1, 0).reshape(-1, 3).tolist()
    lines.extend(f"{a!r} {b!r} {c!r}" for a, b, c in vec)
    for name, values in (scalars or {}).items():
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        lines.extend(repr(v) for v in np.asarray(values, float).transpose(2, 1, 0).ravel().tolist())
    Path(path).write_text("\n".join(lines) + "\n")


def trace_header():
    return [f"{c} [{u}]" for c, u in zip(TraceRecord.COLUMNS, TRACE_UNITS)]


def _fmt(v):
    return str(v) if isinstance(v, (int, np.integer)) else repr(float(v))


def write_trace(path, records, append=False):
    """Comma-separated trace; the header row names columns with units."""
    path = Path(path)
    new = not append or not path.exists()
    with open(path, "a" if append else "w", newline="") as fh:
        w = csv.writer(fh)
        if new:
            w.writerow(trace_header())
        for r in records:
            w.writerow([_fmt(v) for v in r.row()])


def read_trace(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], [[float(v) for v in row] for row in rows[1:]]


def config_hash(config_dict):
    """Stable hash of a configuration mapping (keys sorted, JSON encoded)."""
    text = json.dumps(config_dict, sort_keys=True, default=str)
    return hashlib.sha256(text.encode()).hexdigest()


def save_checkpoint(path, state, cfg_hash, rng_state=None):
    """Both history levels, the cached explicit fields and the counters."""
    g = state.grid
    arrays = {
        "version": np.array(CHECKPOINT_VERSION),
        "grid": np.array([g.nx, g.ny, g.nz], dtype=np.int64),
        "spacing": np.array([g.hx, g.hy, g.hz, g.L]),
        "m_curr": state.m_curr,
        "hhat_curr": state.hhat_curr,
        "step": np.array(state.step, dtype=np.int64),
        "dt_ps": np.array(state.dt_ps),
        "kind": np.array(state.kind),
        "config_hash": np.array(cfg_hash),
        "rng_state": np.array(json.dumps(rng_state)),
        "energies": np.asarray(state.energies, dtype=float),
    }
    if state.m_prev is not None:
        arrays["m_prev"] = state.m_prev
        arrays["hhat_prev"] = state.hhat_prev
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_checkpoint(path, cfg_hash=None):
    """Restore a :class:`SolverState`; refuses a foreign config hash.

    A checkpoint with one history level restarts through BDF1.
    """
    with np.load(path, allow_pickle=False) as z:
        version = int(z["version"])
        if version != CHECKPOINT_VERSION:
            raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
        stored = str(z["config_hash"])
        if cfg_hash is not None and stored != cfg_hash:
            raise CheckpointError(f"{path}: config hash {stored[:12]} does not match {cfg_hash[:12]}")
        nx, ny, nz = (int(v) for v in z["grid"])
        hx, hy, hz, L = (float(v) for v in z["spacing"])
        grid = GridSpec(nx, ny, nz, hx, hy, hz, L)
        has_prev = "m_prev" in z.files
        state = SolverState(
            grid,
            np.array(z["m_curr"]),
            float(z["dt_ps"]),
            str(z["kind"]),
            m_prev=np.array(z["m_prev"]) if has_prev else None,
            hhat_curr=np.array(z["hhat_curr"]),
            hhat_prev=np.array(z["hhat_prev"]) if has_prev else None,
            step=int(z["step"]),
            energies=list(z["energies"]),
        )
        rng_state = json.loads(str(z["rng_state"]))
    return state, rng_state
