"""Material constants, scaling to dimensionless form, drives and fields."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import pi

import numpy as np

from chiralmag.grid import pad_with_ghosts
from chiralmag.operators import diff, linear_field

MU0 = 4e-7 * pi
GAMMA = 1.76085963e11


@dataclass(frozen=True)
class PhysicalParams:
    """SI material constants.

    A [J/m], D [J/m^2], Ms [A/m], Ku [J/m^3], L [m], gamma [1/(s T)],
    mu0 [T m/A].
    """

    A: float
    D: float
    Ms: float
    Ku: float = 0.0
    L: float = 80e-9
    alpha: float = 0.6
    gamma: float = GAMMA
    mu0: float = MU0

    @classmethod
    def fege(cls, L=80e-9, alpha=0.6):
        return cls(A=8.78e-12, D=1.58e-3, Ms=3.84e5, Ku=0.0, L=L, alpha=alpha)


@dataclass(frozen=True)
class DimensionlessParams:
    """Coefficients of the dimensionless energy plus the scales back to SI.

    ``field_scale`` is tesla per unit field, ``velocity_scale`` metres per
    second per unit transport coefficient, ``energy_scale`` joules per unit
    energy and ``time_scale`` seconds per unit time.
    """

    eps: float
    kappa: float
    kappa_b: float
    q: float = 0.0
    alpha: float = 0.6
    field_scale: float = 1.0
    velocity_scale: float = 1.0
    energy_scale: float = 1.0
    time_scale: float = 1.0

    def with_alpha(self, alpha):
        """Same material with another damping; the time unit depends on it."""
        s = self.time_scale / (1.0 + self.alpha**2) * (1.0 + alpha**2)
        return DimensionlessParams(self.eps, self.kappa, self.kappa_b, self.q, alpha,
                                   self.field_scale, self.velocity_scale, self.energy_scale, s)


def nondimensionalize(p: PhysicalParams) -> DimensionlessParams:
    if not (p.A > 0 and p.Ms > 0 and p.L > 0):
        raise ValueError("A, Ms and L must be positive")
    if not (p.mu0 > 0 and p.gamma > 0):
        raise ValueError("mu0 and gamma must be positive")
    if not 0.0 < p.alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    mus2 = p.mu0 * p.Ms**2
    return DimensionlessParams(
        eps=2.0 * p.A / (mus2 * p.L**2),
        kappa=2.0 * p.D / (mus2 * p.L),
        kappa_b=p.D * p.L / (2.0 * p.A),
        q=2.0 * p.Ku / mus2,
        alpha=p.alpha,
        field_scale=p.mu0 * p.Ms,
        velocity_scale=p.mu0 * p.gamma * p.Ms * p.L,
        energy_scale=mus2 * p.L**3,
        time_scale=(1.0 + p.alpha**2) / (p.mu0 * p.gamma * p.Ms),
    )


def time_to_dimensionless(t_ps, params):
    """Physical time in ps to dimensionless time (``params`` from :func:`nondimensionalize`)."""
    return t_ps * 1e-12 / params.time_scale


def time_to_ps(tau, params):
    return tau * params.time_scale * 1e12


def _active(window, t_ps):
    start, end = window
    return start <= t_ps < end


@dataclass
class LocalField:
    """Zeeman field on a box that may translate at constant velocity.

    ``amplitude_T`` in tesla; ``center`` and ``half_widths`` in dimensionless
    coordinates at the start of the window; ``velocity_mps`` in m/s;
    ``window_ps`` is the half-open activity interval.
    """

    amplitude_T: tuple
    center: tuple
    half_widths: tuple
    velocity_mps: tuple = (0.0, 0.0, 0.0)
    window_ps: tuple = (0.0, float("inf"))

    def active(self, t_ps):
        return _active(self.window_ps, t_ps)

    def center_at(self, t_ps, L):
        elapsed = max(t_ps - self.window_ps[0], 0.0) * 1e-12
        return np.asarray(self.center, float) + np.asarray(self.velocity_mps, float) * elapsed / L

    def mask(self, grid, t_ps):
        c = self.center_at(t_ps, grid.L)
        hw = np.asarray(self.half_widths, float)
        X = grid.mesh()
        inside = np.ones(grid.shape, dtype=bool)
        for a in range(3):
            inside &= np.abs(X[a] - c[a]) <= hw[a]
        return inside


@dataclass
class SpinCurrent:
    """In-plane current given by its drift velocity ``u = -bJ`` in m/s.

    ``direction`` is the unit flow direction of ``j``; ``xi`` the
    non-adiabaticity.
    """

    u_mps: float
    direction: tuple
    xi: float = 0.0
    window_ps: tuple = (0.0, float("inf"))

    def __post_init__(self):
        if self.xi < 0:
            raise ValueError("xi must be >= 0")
        d = np.asarray(self.direction, float)
        if d.size == 2:
            d = np.append(d, 0.0)
        n = np.linalg.norm(d)
        if n == 0:
            raise ValueError("current direction must be nonzero")
        self.direction = tuple(d / n)

    def active(self, t_ps):
        return _active(self.window_ps, t_ps)


@dataclass
class DriveSpec:
    uniform_field: tuple = (0.0, 0.0, 0.0)
    local_fields: list = field(default_factory=list)
    currents: list = field(default_factory=list)

    def dynamic_at(self, t_ps):
        """True if a drive without an energy term acts at ``t_ps``."""
        return any(f.active(t_ps) for f in self.local_fields) or any(
            c.active(t_ps) for c in self.currents if c.u_mps != 0.0)

    def is_static(self):
        return not self.local_fields and not any(c.u_mps != 0.0 for c in self.currents)


def hhat_data(data, grid, params, drive=None, t_ps=0.0):
    """Explicitly treated field: anisotropy, Zeeman, local fields and STT."""
    h = np.zeros_like(data)
    if params.q:
        h[1] -= params.q * data[1]
        h[2] -= params.q * data[2]
    if drive is None:
        return h
    h += np.asarray(drive.uniform_field, float)[:, None, None, None]
    for lf in drive.local_fields:
        if lf.active(t_ps):
            amp = np.asarray(lf.amplitude_T, float) / params.field_scale
            h[:, lf.mask(grid, t_ps)] += amp[:, None]
    currents = [c for c in drive.currents if c.active(t_ps) and c.u_mps != 0.0]
    if currents:
        P = pad_with_ghosts(data, grid, params.kappa_b)
        grads = [diff(P, hs, a) for a, hs in enumerate(grid.spacing)]
        for c in currents:
            jgrad = sum(c.direction[a] * grads[a] for a in range(3) if c.direction[a])
            coef = -c.u_mps / params.velocity_scale
            h += coef * (np.cross(data, jgrad, axis=0) + c.xi * jgrad)
    return h


def local_field_hhat(field_, params, drive, t_ps=0.0):
    return hhat_data(field_.data, field_.grid, params, drive, t_ps)


def effective_field(field_, params, drive=None, t_ps=0.0):
    """``h = eps lap m - kappa curl m + hhat`` on the ghost-filled field."""
    return linear_field(field_.data, field_.grid, params) + hhat_data(
        field_.data, field_.grid, params, drive, t_ps)
