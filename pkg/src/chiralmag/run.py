"""Run orchestration for the four scenario modes.

Each mode writes into the configured output directory:

* ``trace.csv``: delimited trace with units in the header row
* ``snapshots/``: binary field snapshots (and ASCII VTK when enabled)
* ``report.txt``: ``key = value`` summary of the run
* ``checkpoint.npz``: solver state for bitwise restart (relax and evolve)
* ``figures/``: PNG renderings of the fields, traces and energy maps
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from chiralmag import io, plots
from chiralmag.grid import MagnetizationField, new_uniform
from chiralmag.initial import init_blocks, init_radial, init_random_circle
from chiralmag.operators import energy, energy_density_maps, skyrmion_number, spatial_average
from chiralmag.stepping import KrylovConfig, new_state, run_steps, run_to_steady
from chiralmag.string_method import StringSchedule
from chiralmag.string_method import run_string as _run_string

log = logging.getLogger(__name__)


@dataclass
class RunSummary:
    mode: str
    converged: bool
    steps: int
    output_dir: Path
    values: dict


def build_initial(spec, grid, seed=0, base_dir="."):
    """Field described by an ``initial`` mapping of the config."""
    kind = spec["type"]
    if kind == "uniform":
        return new_uniform(grid, spec.get("direction", (0, 0, 1)))
    if kind == "blocks":
        return init_blocks(grid, spec["block_size_nm"], spec["spacing_nm"], spec["layout"])
    if kind == "random_circle":
        base = build_initial(spec.get("base", {"type": "uniform"}), grid, seed, base_dir)
        return init_random_circle(base, spec["center_nm"], spec["radius_nm"], seed)
    if kind == "radial":
        return init_radial(grid, spec["center_nm"], spec["radius_nm"], int(spec.get("turns", 1)),
                           spec.get("core", 1.0), spec.get("helicity", np.pi / 2))
    if kind == "snapshot":
        path = Path(spec["path"])
        if not path.is_absolute():
            path = Path(base_dir) / path
        field = io.read_snapshot(path)
        if field.grid.shape != grid.shape:
            raise ValueError(f"snapshot {path} has grid {field.grid.shape}, config has {grid.shape}")
        return MagnetizationField(grid, field.data)
    raise ValueError(f"unknown initializer {kind!r}")


def _krylov(cfg):
    return KrylovConfig(rtol=cfg.krylov_rtol, maxiter=cfg.krylov_maxiter)


def _dirs(cfg):
    out = cfg.output_dir
    (out / "snapshots").mkdir(parents=True, exist_ok=True)
    if cfg.output.get("figures", True):
        (out / "figures").mkdir(parents=True, exist_ok=True)
    return out


def _write_report(path, values):
    with open(path, "w") as fh:
        for k, v in values.items():
            fh.write(f"{k} = {v}\n")


def write_field_outputs(cfg, out, name, field, drive=None):
    """Snapshot, optional VTK with energy densities, and figures for one field."""
    params = cfg.params
    io.write_snapshot(out / "snapshots" / f"{name}.snap", field)
    L, D, T = energy_density_maps(field, params, drive)
    for label, arr in (("L", L), ("D", D), ("T", T)):
        io.write_scalar_snapshot(out / "snapshots" / f"{name}_energy_{label}.snap", field.grid, arr)
    if cfg.output.get("vtk", True):
        io.write_vtk(out / "snapshots" / f"{name}.vtk", field, {"L": L, "D": D, "T": T})
    if cfg.output.get("figures", True):
        z = cfg.output.get("z_layer")
        plots.plot_m3(out / "figures" / f"{name}_m3.png", field, z, title=name)
        plots.plot_energy_maps(out / "figures" / f"{name}_energy.png", field.grid, (L, D, T), z)


def _summary_values(field, params, drive, z_layer):
    e = energy(field, params, drive)
    avg = spatial_average(field)
    return {
        "energy": repr(e),
        "energy_J": repr(e * params.energy_scale),
        "m1_avg": repr(float(avg[0])),
        "m2_avg": repr(float(avg[1])),
        "m3_avg": repr(float(avg[2])),
        "Q": repr(skyrmion_number(field, z_layer)),
        "max_norm_error": repr(field.max_norm_error()),
    }


def run_dynamics(cfg, restart=None):
    """Relax or evolve according to ``cfg``; optionally resume a checkpoint.

    The trace on disk is truncated to the checkpoint step before appending,
    so a resumed run leaves the same file as an uninterrupted one.
    """
    params = cfg.params
    drive = cfg.drive
    out = _dirs(cfg)
    cfg_hash = io.config_hash(cfg.hash_payload())
    trace_path = out / "trace.csv"
    stride = cfg.output["stride"]
    snap_stride = cfg.output["snapshot_stride"]
    ckpt_every = cfg.output["checkpoint_every"]
    z_layer = cfg.output.get("z_layer")

    if restart is not None:
        state, _ = io.load_checkpoint(restart, cfg_hash)
        if state.kind != cfg.kind or state.dt_ps != cfg.dt_ps:
            raise io.CheckpointError("checkpoint dynamics do not match the config")
        _truncate_trace(trace_path, state.step)
        append = True
    else:
        init = build_initial(cfg.initial, cfg.grid, cfg.seed, cfg.base_dir)
        write_field_outputs(cfg, out, "initial", init, drive)
        state = new_state(init, params, drive, cfg.dt_ps, cfg.kind)
        append = False

    def callback(st, e):
        if snap_stride and st.step % snap_stride == 0:
            io.write_snapshot(out / "snapshots" / f"m_{st.step:08d}.snap", st.field)
        if ckpt_every and st.step % ckpt_every == 0:
            io.save_checkpoint(out / "checkpoint.npz", st, cfg_hash, {"seed": cfg.seed})

    remaining = max(cfg.max_steps - state.step, 0)
    if cfg.steady:
        result = run_to_steady(state, params, drive, remaining, stride, cfg.steady_rtol,
                               _krylov(cfg), callback)
    else:
        result = run_steps(state, params, drive, remaining, stride, _krylov(cfg), callback)
    trace = result.trace[1:] if append else result.trace
    io.write_trace(trace_path, trace, append=append)
    final = result.field
    io.save_checkpoint(out / "checkpoint.npz", result.state, cfg_hash, {"seed": cfg.seed})
    write_field_outputs(cfg, out, "final", final, drive)
    if cfg.output.get("figures", True):
        _, rows = io.read_trace(trace_path)
        plots.plot_trace(out / "figures" / "trace.png", [_Row(r) for r in rows])
    values = {"mode": cfg.mode, "kind": cfg.kind, "steps": result.state.step,
              "t_ps": repr(result.state.t_ps), "converged": result.converged if cfg.steady else "n/a",
              "config_hash": cfg_hash}
    values.update(_summary_values(final, params, drive, z_layer))
    _write_report(out / "report.txt", values)
    return RunSummary(cfg.mode, result.converged if cfg.steady else True, result.state.step, out, values)


class _Row:
    """Trace row read back from disk, shaped like a TraceRecord for plotting."""

    def __init__(self, row):
        self.step, self.t_ps, self.energy, self.energy_J = int(row[0]), row[1], row[2], row[3]
        self.m_avg = tuple(row[4:7])
        self.Q = row[7]


def _truncate_trace(path, step):
    if not path.exists():
        return
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    keep = [rows[0]] + [r for r in rows[1:] if int(r[0]) <= step]
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(keep)


def run_string_mode(cfg):
    params = cfg.params
    out = _dirs(cfg)
    sc = cfg.string
    ends = []
    for name in ("start", "end"):
        f = build_initial(sc[name], cfg.grid, cfg.seed, cfg.base_dir)
        if sc["relax_endpoints"]:
            st = new_state(f, params, None, cfg.dt_ps, "heat")
            res = run_to_steady(st, params, None, cfg.max_steps, cfg.output["stride"],
                                cfg.steady_rtol, _krylov(cfg))
            if not res.converged:
                log.warning("endpoint %s did not reach a steady state", name)
            f = res.field
        ends.append(f)
    schedule = StringSchedule(dt_ps=sc["dt_ps"], inner_steps=sc["inner_steps"], tol=sc["tol"],
                              max_iter=sc["max_iter"], krylov=_krylov(cfg))
    report = _run_string(ends[0], ends[1], sc["images"], params, schedule)
    z_layer = cfg.output.get("z_layer")
    charges = np.array([skyrmion_number(f, z_layer) for f in report.string.fields()])
    labels = report.labels()
    with open(out / "mep.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["image [1]", "a [1]", "energy [1]", "energy_J [J]", "Q [1]", "label"])
        for i, (a, e, q) in enumerate(zip(report.string.a, report.energies, charges)):
            w.writerow([i, repr(float(a)), repr(float(e)), repr(float(e * params.energy_scale)),
                        repr(float(q)), labels[i]])
    with open(out / "string_convergence.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration [1]", "max_energy_change [1]"])
        for it in range(1, len(report.history)):
            w.writerow([it, repr(float(np.max(np.abs(report.history[it] - report.history[it - 1]))))])
    for i, f in enumerate(report.string.fields()):
        io.write_snapshot(out / "snapshots" / f"image_{i:03d}.snap", f)
        if cfg.output.get("vtk", True):
            io.write_vtk(out / "snapshots" / f"image_{i:03d}.vtk", f)
    if cfg.output.get("figures", True):
        plots.plot_mep(out / "figures" / "mep.png", report.string.a,
                       report.energies * params.energy_scale, report.maxima, report.minima)
        for i in sorted(set([0, report.string.N] + report.maxima + report.minima)):
            plots.plot_m3(out / "figures" / f"image_{i:03d}_m3.png", report.string.fields()[i],
                          z_layer, title=f"image {i} ({labels[i] or 'interior'})")
    values = {"mode": "string", "images": sc["images"], "iterations": report.iterations,
              "converged": report.converged, "saddles": report.maxima, "minima": report.minima,
              "energy_start_J": repr(float(report.energies[0] * params.energy_scale)),
              "energy_end_J": repr(float(report.energies[-1] * params.energy_scale)),
              "barrier_J": repr(float((report.energies.max() - report.energies[0]) * params.energy_scale))}
    _write_report(out / "report.txt", values)
    return RunSummary("string", report.converged, report.iterations, out, values)


def run_postprocess(cfg):
    params = cfg.params
    out = _dirs(cfg)
    z_layer = cfg.output.get("z_layer")
    rows = []
    for p in cfg.snapshots:
        path = Path(p)
        if not path.is_absolute():
            path = cfg.base_dir / path
        field = io.read_snapshot(path)
        vals = _summary_values(field, params, cfg.drive, z_layer)
        rows.append([path.name] + [vals[k] for k in ("energy", "energy_J", "m1_avg", "m2_avg",
                                                     "m3_avg", "Q")])
        write_field_outputs(cfg, out, path.stem + "_post", field, cfg.drive)
    with open(out / "postprocess.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["snapshot", "energy [1]", "energy_J [J]", "m1_avg [1]", "m2_avg [1]",
                    "m3_avg [1]", "Q [1]"])
        w.writerows(rows)
    _write_report(out / "report.txt", {"mode": "postprocess", "snapshots": len(rows)})
    return RunSummary("postprocess", True, 0, out, {"rows": rows})


def run(cfg, restart=None):
    if cfg.mode in ("relax", "evolve"):
        return run_dynamics(cfg, restart)
    if restart is not None:
        raise ValueError("--restart applies to relax and evolve only")
    if cfg.mode == "string":
        return run_string_mode(cfg)
    return run_postprocess(cfg)
