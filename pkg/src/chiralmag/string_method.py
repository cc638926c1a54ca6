"""String method for minimum energy paths between two relaxed textures.

One outer iteration evolves every interior image by heat flow, measures the
arc length of the string, and redistributes the images to equal arc length
with a natural cubic spline per scalar degree of freedom followed by a
projection onto the unit sphere.  The endpoints are never touched.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from chiralmag.grid import MagnetizationField, normalize
from chiralmag.operators import energy_data, skyrmion_number
from chiralmag.physics import hhat_data
from chiralmag.stepping import HEAT, KrylovConfig, SolverFailure, SolverState, bdf1_step, bdf2_step

log = logging.getLogger(__name__)

STRING_TOL = 1e-6
# direction used when linear interpolation passes through the origin
TIE_BREAK = np.array([1.0, 0.0, 0.0])


class DegenerateStringError(ValueError):
    pass


class ImageFailure(RuntimeError):
    """A solver failure while evolving one image; ``index`` names the image."""

    def __init__(self, index, cause):
        self.index = index
        self.cause = cause
        super().__init__(f"image {index}: {cause}")


@dataclass
class PathString:
    """Images ``phi_0 .. phi_N`` as arrays of shape ``(3, nx, ny, nz)``.

    ``history`` holds the images of the previous outer iteration so that the
    heat-flow step can use BDF2; it is ``None`` before the first sweep.
    """

    grid: object
    params: object
    images: list
    a: np.ndarray
    energies: np.ndarray | None = None
    history: list | None = None
    iteration: int = 0

    def __post_init__(self):
        if len(self.images) < 2:
            raise ValueError("a string needs at least two images")
        if self.energies is None:
            self.energies = image_energies(self.images, self.grid, self.params)

    @property
    def N(self):
        return len(self.images) - 1

    def fields(self):
        return [MagnetizationField(self.grid, m) for m in self.images]

    def charges(self, z_layer=None):
        return np.array([skyrmion_number(f, z_layer) for f in self.fields()])


def image_energies(images, grid, params):
    return np.array([energy_data(m, grid, params) for m in images])


def _interpolate_projected(a_data, b_data, t):
    v = (1.0 - t) * a_data + t * b_data
    n = np.sqrt(np.einsum("c...,c...->...", v, v))
    bad = n < 1e-8
    if np.any(bad):
        v[:, bad] = TIE_BREAK[:, None]
    return normalize(v)


def init_string(endA, endB, N, params):
    """Linear interpolation between the endpoints, projected image by image.

    Cells where the interpolant is shorter than 1e-8 (antipodal endpoints at
    the midpoint) are set to ``TIE_BREAK``.
    """
    if endA.grid != endB.grid:
        raise ValueError("endpoints live on different grids")
    if N < 1:
        raise ValueError("N must be >= 1")
    images = [np.array(endA.data, dtype=float)]
    for i in range(1, N):
        images.append(_interpolate_projected(endA.data, endB.data, i / N))
    images.append(np.array(endB.data, dtype=float))
    return PathString(endA.grid, params, images, np.linspace(0.0, 1.0, N + 1))


def evolve_images(s, dt_ps=1.0, inner_steps=1, krylov=KrylovConfig()):
    """Advance each interior image by ``inner_steps`` heat-flow steps.

    The first sweep starts every image with BDF1; later sweeps take BDF2 with
    the previous iteration's image as the second history level.
    """
    if inner_steps < 1:
        raise ValueError("inner_steps must be >= 1")
    new_images = [s.images[0]]
    for i in range(1, s.N):
        prev = None if s.history is None else s.history[i]
        st = SolverState(s.grid, s.images[i], dt_ps, HEAT, m_prev=prev,
                         hhat_curr=hhat_data(s.images[i], s.grid, s.params),
                         hhat_prev=None if prev is None else hhat_data(prev, s.grid, s.params))
        try:
            for _ in range(inner_steps):
                st = bdf1_step(st, s.params, None, krylov) if st.m_prev is None else \
                    bdf2_step(st, s.params, None, krylov)
        except SolverFailure as exc:
            raise ImageFailure(i, exc) from exc
        new_images.append(st.m_curr)
    new_images.append(s.images[-1])
    return PathString(s.grid, s.params, new_images, s.a.copy(), history=s.history,
                      iteration=s.iteration)


def string_distances(images, grid):
    w = np.sqrt(grid.cell_volume)
    return np.array([w * np.linalg.norm(images[i] - images[i - 1]) for i in range(1, len(images))])


def arc_length_params(s):
    """Normalised cumulative arc length ``a*`` of the current images."""
    d = string_distances(s.images, s.grid)
    total = d.sum()
    if total == 0.0:
        raise DegenerateStringError("all images coincide; the string has zero length")
    a = np.concatenate([[0.0], np.cumsum(d)]) / total
    a[-1] = 1.0
    return a


def reparametrize(s, a_star=None):
    """Resample the images at uniform parameters ``i/N`` and project.

    Interpolation is a natural cubic spline over the knots ``a*`` applied to
    every scalar degree of freedom; the endpoints are copied, not resampled.
    """
    if a_star is None:
        a_star = arc_length_params(s)
    if np.any(np.diff(a_star) <= 0.0):
        raise DegenerateStringError("arc-length parameters are not strictly increasing")
    stack = np.stack(s.images)
    spline = CubicSpline(a_star, stack.reshape(len(s.images), -1), axis=0, bc_type="natural")
    targets = np.linspace(0.0, 1.0, s.N + 1)
    values = spline(targets[1:-1]).reshape((s.N - 1, *stack.shape[1:]))
    images = [s.images[0]] + [normalize(v) for v in values] + [s.images[-1]]
    return PathString(s.grid, s.params, images, targets, history=s.history, iteration=s.iteration)


def string_converged(prev_energies, curr_energies, tol=STRING_TOL):
    prev = np.asarray(prev_energies, float)
    curr = np.asarray(curr_energies, float)
    if prev.shape != curr.shape:
        raise ValueError("energy vectors differ in length")
    return bool(np.max(np.abs(curr - prev)) <= tol)


def interior_extrema(energies):
    """Indices of strict interior local maxima and minima of a profile."""
    e = np.asarray(energies, float)
    maxima = [i for i in range(1, len(e) - 1) if e[i] > e[i - 1] and e[i] > e[i + 1]]
    minima = [i for i in range(1, len(e) - 1) if e[i] < e[i - 1] and e[i] < e[i + 1]]
    return maxima, minima


@dataclass
class StringSchedule:
    dt_ps: float = 1.0
    inner_steps: int = 1
    tol: float = STRING_TOL
    max_iter: int = 20000
    krylov: KrylovConfig = field(default_factory=KrylovConfig)


@dataclass
class MEPReport:
    string: PathString
    energies: np.ndarray
    charges: np.ndarray
    maxima: list
    minima: list
    converged: bool
    iterations: int
    history: list

    def labels(self):
        out = [""] * len(self.energies)
        out[0], out[-1] = "endpoint", "endpoint"
        for i in self.maxima:
            out[i] = "saddle"
        for i in self.minima:
            out[i] = "minimum"
        return out


def string_iteration(s, schedule):
    """One pass of evolve, arc-length measurement and reparametrization."""
    evolved = evolve_images(s, schedule.dt_ps, schedule.inner_steps, schedule.krylov)
    out = reparametrize(evolved)
    out.history = s.images
    out.iteration = s.iteration + 1
    out.energies = image_energies(out.images, s.grid, s.params)
    return out


def run_string(endA, endB, N, params, schedule=None, initial=None, callback=None):
    """Iterate the string method until the per-image energy change is <= tol.

    ``initial`` may be a ready :class:`PathString` (for example a string
    loaded from snapshots); otherwise the interpolated string is used.
    """
    schedule = schedule or StringSchedule()
    s = initial if initial is not None else init_string(endA, endB, N, params)
    history = [s.energies.copy()]
    converged = False
    if np.array_equal(s.images[0], s.images[-1]):
        # a closed string with fixed endpoints is already stationary
        converged = True
    else:
        for _ in range(schedule.max_iter):
            nxt = string_iteration(s, schedule)
            done = string_converged(s.energies, nxt.energies, schedule.tol)
            s = nxt
            history.append(s.energies.copy())
            if callback is not None:
                callback(s)
            if done:
                converged = True
                break
        if not converged:
            log.warning("string not converged after %d iterations", schedule.max_iter)
    maxima, minima = interior_extrema(s.energies)
    return MEPReport(s, s.energies.copy(), s.charges(), maxima, minima, converged, s.iteration, history)
