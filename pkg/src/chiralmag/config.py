"""Scenario configuration files.

Configs are YAML mappings; every dimensional key carries its unit in the
name (``mesh_nm``, ``dt_ps``, ``field_T``, ``u_mps`` ...).  Validation
errors name the offending key by its dotted path.

Example::

    mode: relax
    seed: 0
    geometry: {sample_nm: [80, 80, 6], mesh_nm: 2}
    material: {A_J_per_m: 8.78e-12, D_J_per_m2: 1.58e-3, Ms_A_per_m: 3.84e5}
    dynamics: {kind: heat, alpha: 0.6, dt_ps: 1.0, max_steps: 5000}
    initial: {type: uniform, direction: [0, 0, 1]}
    output: {dir: out, stride: 10}
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from chiralmag.grid import GridSpec
from chiralmag.physics import GAMMA, DriveSpec, LocalField, PhysicalParams, SpinCurrent, nondimensionalize

MODES = ("relax", "evolve", "string", "postprocess")

DEFAULTS = {
    "mode": "relax",
    "seed": 0,
    "geometry": {"sample_nm": [80.0, 80.0, 6.0], "mesh_nm": 2.0, "length_nm": None},
    "material": {"A_J_per_m": 8.78e-12, "D_J_per_m2": 1.58e-3, "Ms_A_per_m": 3.84e5,
                 "Ku_J_per_m3": 0.0, "gamma_per_s_T": GAMMA},
    "dynamics": {"kind": None, "alpha": 0.6, "dt_ps": 1.0, "max_steps": 10000, "steady": None,
                 "steady_rtol": 1e-9, "krylov_rtol": 1e-8, "krylov_maxiter": 500},
    "drives": {"uniform_field_T": [0.0, 0.0, 0.0], "local_fields": [], "currents": []},
    "initial": {"type": "uniform", "direction": [0.0, 0.0, 1.0]},
    "string": {"images": 20, "tol": 1e-6, "max_iter": 20000, "dt_ps": 1.0, "inner_steps": 1,
               "relax_endpoints": False, "start": None, "end": None},
    "output": {"dir": "out", "stride": 10, "snapshot_stride": 0, "vtk": True, "figures": True,
               "checkpoint_every": 0, "z_layer": None},
    "postprocess": {"snapshots": []},
}

INITIAL_KEYS = {
    "uniform": {"direction"},
    "blocks": {"block_size_nm", "spacing_nm", "layout"},
    "random_circle": {"center_nm", "radius_nm", "base"},
    "radial": {"center_nm", "radius_nm", "turns", "core", "helicity"},
    "snapshot": {"path"},
}
LOCAL_FIELD_KEYS = {"amplitude_T", "center_nm", "half_widths_nm", "velocity_mps", "start_ps", "end_ps"}
CURRENT_KEYS = {"u_mps", "direction", "xi", "start_ps", "end_ps"}


class ConfigError(ValueError):
    """Invalid configuration; ``key`` is the dotted path of the bad entry."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


def _merge(defaults, given, prefix=""):
    out = copy.deepcopy(defaults)
    for k, v in given.items():
        path = f"{prefix}{k}"
        if k not in defaults:
            raise ConfigError(path, "unknown key")
        if isinstance(defaults[k], dict) and k not in ("initial", "start", "end"):
            if not isinstance(v, dict):
                raise ConfigError(path, "expected a mapping")
            out[k] = _merge(defaults[k], v, path + ".")
        else:
            out[k] = v
    return out


def _num(raw, key, positive=False, nonneg=False, integer=False):
    try:
        v = float(raw)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected a number, got {raw!r}") from None
    if not np.isfinite(v):
        raise ConfigError(key, "must be finite")
    if positive and v <= 0:
        raise ConfigError(key, f"must be > 0, got {raw!r}")
    if nonneg and v < 0:
        raise ConfigError(key, f"must be >= 0, got {raw!r}")
    if integer:
        if v != int(v):
            raise ConfigError(key, f"expected an integer, got {raw!r}")
        return int(v)
    return v


def _vec(raw, key, n=3):
    if not isinstance(raw, (list, tuple)) or len(raw) != n:
        raise ConfigError(key, f"expected a list of {n} numbers")
    return tuple(_num(x, f"{key}[{i}]") for i, x in enumerate(raw))


def _window(d, key):
    start = _num(d.get("start_ps", 0.0), key + ".start_ps", nonneg=True)
    end = d.get("end_ps")
    end = float("inf") if end is None else _num(end, key + ".end_ps")
    if end <= start:
        raise ConfigError(key + ".end_ps", "must exceed start_ps")
    return start, end


def validate_initial(spec, key):
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigError(key, "expected a mapping with a 'type'")
    kind = spec["type"]
    if kind not in INITIAL_KEYS:
        raise ConfigError(key + ".type", f"unknown initializer {kind!r}; choose from {sorted(INITIAL_KEYS)}")
    for k in spec:
        if k != "type" and k not in INITIAL_KEYS[kind]:
            raise ConfigError(f"{key}.{k}", f"not a parameter of the {kind!r} initializer")
    if kind == "uniform":
        d = _vec(spec.get("direction", [0, 0, 1]), key + ".direction")
        if not any(d):
            raise ConfigError(key + ".direction", "must be nonzero")
    elif kind == "blocks":
        for k in ("block_size_nm", "spacing_nm", "layout"):
            if k not in spec:
                raise ConfigError(f"{key}.{k}", "required")
        _vec(spec["block_size_nm"], key + ".block_size_nm", 2)
        _num(spec["spacing_nm"], key + ".spacing_nm", nonneg=True)
        for i, c in enumerate(_vec(spec["layout"], key + ".layout", 2)):
            if c != int(c) or c < 0:
                raise ConfigError(f"{key}.layout[{i}]", "must be a non-negative integer")
    elif kind == "random_circle":
        _vec(spec.get("center_nm"), key + ".center_nm", 2)
        _num(spec.get("radius_nm"), key + ".radius_nm", nonneg=True)
        if "base" in spec:
            validate_initial(spec["base"], key + ".base")
    elif kind == "radial":
        _vec(spec.get("center_nm"), key + ".center_nm", 2)
        _num(spec.get("radius_nm"), key + ".radius_nm", positive=True)
        _num(spec.get("turns", 1), key + ".turns", positive=True, integer=True)
    elif kind == "snapshot":
        if not isinstance(spec.get("path"), str):
            raise ConfigError(key + ".path", "expected a file path")


@dataclass
class ScenarioConfig:
    """Validated scenario; ``raw`` is the merged mapping used for hashing."""

    raw: dict
    mode: str
    seed: int
    grid: GridSpec
    material: PhysicalParams
    kind: str
    dt_ps: float
    max_steps: int
    steady: bool
    steady_rtol: float
    krylov_rtol: float
    krylov_maxiter: int
    drive: DriveSpec
    initial: dict
    string: dict
    output: dict
    snapshots: list = field(default_factory=list)
    base_dir: Path = Path(".")

    @property
    def params(self):
        return nondimensionalize(self.material)

    @property
    def output_dir(self):
        return Path(self.output["dir"])

    def hash_payload(self):
        """Everything that determines the trajectory.

        Output options and the step budget are excluded so that a checkpoint
        can be resumed with a longer horizon.
        """
        payload = {k: copy.deepcopy(v) for k, v in self.raw.items() if k not in ("output", "postprocess")}
        payload["dynamics"].pop("max_steps", None)
        return payload


def _drives(d, grid, params):
    uni = _vec(d.get("uniform_field_T", [0, 0, 0]), "drives.uniform_field_T")
    L_nm = grid.L * 1e9
    lfs = []
    if not isinstance(d.get("local_fields", []), list):
        raise ConfigError("drives.local_fields", "expected a list")
    for i, lf in enumerate(d.get("local_fields", [])):
        key = f"drives.local_fields[{i}]"
        if not isinstance(lf, dict):
            raise ConfigError(key, "expected a mapping")
        for k in lf:
            if k not in LOCAL_FIELD_KEYS:
                raise ConfigError(f"{key}.{k}", "unknown key")
        for k in ("amplitude_T", "center_nm", "half_widths_nm"):
            if k not in lf:
                raise ConfigError(f"{key}.{k}", "required")
        hw = _vec(lf["half_widths_nm"], key + ".half_widths_nm")
        if min(hw) < 0:
            raise ConfigError(key + ".half_widths_nm", "must be >= 0")
        lfs.append(LocalField(
            amplitude_T=_vec(lf["amplitude_T"], key + ".amplitude_T"),
            center=tuple(c / L_nm for c in _vec(lf["center_nm"], key + ".center_nm")),
            half_widths=tuple(h / L_nm for h in hw),
            velocity_mps=_vec(lf.get("velocity_mps", [0, 0, 0]), key + ".velocity_mps"),
            window_ps=_window(lf, key),
        ))
    cur = []
    if not isinstance(d.get("currents", []), list):
        raise ConfigError("drives.currents", "expected a list")
    for i, c in enumerate(d.get("currents", [])):
        key = f"drives.currents[{i}]"
        if not isinstance(c, dict):
            raise ConfigError(key, "expected a mapping")
        for k in c:
            if k not in CURRENT_KEYS:
                raise ConfigError(f"{key}.{k}", "unknown key")
        for k in ("u_mps", "direction"):
            if k not in c:
                raise ConfigError(f"{key}.{k}", "required")
        direction = c["direction"]
        if not isinstance(direction, (list, tuple)) or len(direction) not in (2, 3):
            raise ConfigError(key + ".direction", "expected 2 or 3 numbers")
        dvec = [_num(x, f"{key}.direction[{j}]") for j, x in enumerate(direction)]
        if not any(dvec):
            raise ConfigError(key + ".direction", "must be nonzero")
        cur.append(SpinCurrent(
            u_mps=_num(c["u_mps"], key + ".u_mps"),
            direction=tuple(dvec),
            xi=_num(c.get("xi", 0.0), key + ".xi", nonneg=True),
            window_ps=_window(c, key),
        ))
    return DriveSpec(tuple(u / params.field_scale for u in uni), lfs, cur)


def parse_config(data, base_dir=".", overrides=None):
    """Validate a config mapping and build a :class:`ScenarioConfig`."""
    if not isinstance(data, dict):
        raise ConfigError("<root>", "expected a mapping at the top level")
    raw = _merge(DEFAULTS, data)
    for k, v in (overrides or {}).items():
        if v is None:
            continue
        node = raw
        parts = k.split(".")
        for p in parts[:-1]:
            node = node[p]
        node[parts[-1]] = v
    mode = raw["mode"]
    if mode not in MODES:
        raise ConfigError("mode", f"unknown mode {mode!r}; choose from {MODES}")
    seed = _num(raw["seed"], "seed", nonneg=True, integer=True)

    geo = raw["geometry"]
    sample = _vec(geo["sample_nm"], "geometry.sample_nm")
    if min(sample) <= 0:
        raise ConfigError("geometry.sample_nm", "dimensions must be > 0")
    mesh = geo["mesh_nm"]
    mesh = _vec(mesh, "geometry.mesh_nm") if isinstance(mesh, (list, tuple)) else \
        _num(mesh, "geometry.mesh_nm", positive=True)
    if min(np.atleast_1d(mesh)) <= 0:
        raise ConfigError("geometry.mesh_nm", "must be > 0")
    length = geo.get("length_nm")
    if length is not None:
        length = _num(length, "geometry.length_nm", positive=True)
    try:
        grid = GridSpec.from_physical(sample, mesh, length)
    except ValueError as exc:
        raise ConfigError("geometry.mesh_nm", str(exc)) from None

    mat, dyn = raw["material"], raw["dynamics"]
    alpha = _num(dyn["alpha"], "dynamics.alpha")
    if not 0.0 < alpha <= 1.0:
        raise ConfigError("dynamics.alpha", f"must lie in (0, 1], got {alpha}")
    material = PhysicalParams(
        A=_num(mat["A_J_per_m"], "material.A_J_per_m", positive=True),
        D=_num(mat["D_J_per_m2"], "material.D_J_per_m2"),
        Ms=_num(mat["Ms_A_per_m"], "material.Ms_A_per_m", positive=True),
        Ku=_num(mat["Ku_J_per_m3"], "material.Ku_J_per_m3"),
        L=grid.L,
        alpha=alpha,
        gamma=_num(mat["gamma_per_s_T"], "material.gamma_per_s_T", positive=True),
    )
    kind = dyn["kind"] or ("ll" if mode == "evolve" else "heat")
    if kind not in ("ll", "heat"):
        raise ConfigError("dynamics.kind", f"expected 'll' or 'heat', got {kind!r}")
    dt_ps = _num(dyn["dt_ps"], "dynamics.dt_ps", positive=True)
    max_steps = _num(dyn["max_steps"], "dynamics.max_steps", nonneg=True, integer=True)
    steady = dyn["steady"]
    if steady is None:
        steady = mode != "evolve"
    if not isinstance(steady, bool):
        raise ConfigError("dynamics.steady", "expected true or false")
    steady_rtol = _num(dyn["steady_rtol"], "dynamics.steady_rtol", positive=True)
    krylov_rtol = _num(dyn["krylov_rtol"], "dynamics.krylov_rtol", positive=True)
    if krylov_rtol >= 1:
        raise ConfigError("dynamics.krylov_rtol", "must be < 1")
    krylov_maxiter = _num(dyn["krylov_maxiter"], "dynamics.krylov_maxiter", positive=True, integer=True)

    drive = _drives(raw["drives"], grid, nondimensionalize(material))
    validate_initial(raw["initial"], "initial")

    st = raw["string"]
    string = {
        "images": _num(st["images"], "string.images", positive=True, integer=True),
        "tol": _num(st["tol"], "string.tol", positive=True),
        "max_iter": _num(st["max_iter"], "string.max_iter", nonneg=True, integer=True),
        "dt_ps": _num(st["dt_ps"], "string.dt_ps", positive=True),
        "inner_steps": _num(st["inner_steps"], "string.inner_steps", positive=True, integer=True),
        "relax_endpoints": bool(st["relax_endpoints"]),
        "start": st["start"],
        "end": st["end"],
    }
    if mode == "string":
        for end in ("start", "end"):
            if string[end] is None:
                raise ConfigError(f"string.{end}", "required in string mode")
            validate_initial(string[end], f"string.{end}")

    out = raw["output"]
    output = dict(out)
    output["stride"] = _num(out["stride"], "output.stride", positive=True, integer=True)
    output["snapshot_stride"] = _num(out["snapshot_stride"], "output.snapshot_stride", nonneg=True, integer=True)
    output["checkpoint_every"] = _num(out["checkpoint_every"], "output.checkpoint_every", nonneg=True, integer=True)
    if out["z_layer"] is not None:
        z = _num(out["z_layer"], "output.z_layer", positive=True, integer=True)
        if z > grid.nz:
            raise ConfigError("output.z_layer", f"must be <= nz = {grid.nz}")
        output["z_layer"] = z

    snaps = raw["postprocess"]["snapshots"]
    if not isinstance(snaps, list):
        raise ConfigError("postprocess.snapshots", "expected a list of paths")
    if mode == "postprocess" and not snaps:
        raise ConfigError("postprocess.snapshots", "at least one snapshot is required")

    return ScenarioConfig(raw, mode, seed, grid, material, kind, dt_ps, max_steps, steady,
                          steady_rtol, krylov_rtol, krylov_maxiter, drive, raw["initial"], string,
                          output, list(snaps), Path(base_dir))


def load_config(path, overrides=None):
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", f"invalid YAML: {exc}") from None
    return parse_config(data or {}, path.parent, overrides)
