"""Finite-difference operators, discrete energy and diagnostics.

All stencils read the padded array of a :class:`~chiralmag.grid.GhostField`.
First derivatives are centred in the interior and one-sided against the
ghost at the first and last cell of each axis; the Laplacian is the
compact 7-point stencil.

The discrete exchange energy sums squared face differences over every cell
face, the two ghost faces of each axis included, which is the quadratic form
whose interior variation is the 7-point Laplacian.  The DMI density
``kappa/2 (curl m).m`` uses the curl stencils above.
"""

from __future__ import annotations

import numpy as np

from chiralmag.grid import GhostField, pad_with_ghosts


def _along(P, axis, sl):
    """Slice the padded array along ``axis`` and take interior cells elsewhere."""
    idx = [slice(None), slice(1, -1), slice(1, -1), slice(1, -1)]
    idx[axis + 1] = sl
    return P[tuple(idx)]


def diff(P, h, axis):
    """First derivative along ``axis`` of a padded array, shape of the interior."""
    n = P.shape[axis + 1] - 2
    d = (_along(P, axis, slice(2, None)) - _along(P, axis, slice(None, -2))) / (2.0 * h)
    if n >= 2:
        first = [slice(None)] * 4
        first[axis + 1] = 0
        last = [slice(None)] * 4
        last[axis + 1] = -1
        d[tuple(first)] = (_along(P, axis, 1) - _along(P, axis, 0)) / h
        d[tuple(last)] = (_along(P, axis, n + 1) - _along(P, axis, n)) / h
    return d


def gradients(P, grid):
    return [diff(P, h, a) for a, h in enumerate(grid.spacing)]


def laplacian_padded(P, grid):
    out = None
    for a, h in enumerate(grid.spacing):
        term = (_along(P, a, slice(None, -2)) - 2.0 * _along(P, a, slice(1, -1))
                + _along(P, a, slice(2, None))) / (h * h)
        out = term if out is None else out + term
    return out


def curl_from_gradients(dx, dy, dz):
    return np.stack([
        dy[2] - dz[1],
        dz[0] - dx[2],
        dx[1] - dy[0],
    ])


def curl_padded(P, grid):
    return curl_from_gradients(*gradients(P, grid))


def laplacian(gf: GhostField):
    return laplacian_padded(gf.padded, gf.grid)


def curl(gf: GhostField):
    return curl_padded(gf.padded, gf.grid)


def linear_field(data, grid, params):
    """``eps * lap(m) - kappa * curl(m)`` with chiral ghosts; linear in ``data``."""
    P = pad_with_ghosts(data, grid, params.kappa_b)
    return params.eps * laplacian_padded(P, grid) - params.kappa * curl_padded(P, grid)


def _uniform_field(drive):
    if drive is None:
        return np.zeros(3)
    return np.asarray(drive.uniform_field, dtype=float)


def _face_exchange(P, grid):
    """Per-cell share of ``1/2 sum_faces |m_+ - m_-|^2 / h^2``.

    An interior face is split evenly between its two cells; a ghost face
    belongs entirely to its boundary cell.
    """
    out = np.zeros(grid.shape)
    for a, h in enumerate(grid.spacing):
        idx = [slice(None), slice(1, -1), slice(1, -1), slice(1, -1)]
        idx[a + 1] = slice(None)
        d = np.diff(P[tuple(idx)], axis=a + 1)
        w = 0.5 * np.einsum("c...,c...->...", d, d) / (h * h)
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[a] = slice(None, -1)
        hi[a] = slice(1, None)
        cell = 0.5 * (w[tuple(lo)] + w[tuple(hi)])
        first = [slice(None)] * 3
        first[a] = 0
        last = [slice(None)] * 3
        last[a] = -1
        cell[tuple(first)] += 0.5 * w[tuple(first)]
        cell[tuple(last)] += 0.5 * w[tuple(last)]
        out += cell
    return out


def _density_terms(data, grid, params, drive=None):
    P = pad_with_ghosts(data, grid, params.kappa_b)
    exchange = params.eps * _face_exchange(P, grid)
    dmi = 0.5 * params.kappa * np.einsum("c...,c...->...", curl_padded(P, grid), data)
    local = exchange - np.einsum("c,c...->...", _uniform_field(drive), data)
    if params.q:
        local = local + 0.5 * params.q * (data[1] ** 2 + data[2] ** 2)
    return local, dmi


def energy_density_maps(field, params, drive=None):
    """Per-cell energy densities ``(L, D, T)``.

    ``L`` collects every non-DMI term, ``D`` is the DMI density
    ``kappa/2 (curl m).m`` and ``T = L + D``.
    """
    local, dmi = _density_terms(field.data, field.grid, params, drive)
    return local, dmi, local + dmi


def energy_data(data, grid, params, drive=None):
    local, dmi = _density_terms(data, grid, params, drive)
    return float(np.sum(local + dmi) * grid.cell_volume)


def energy(field, params, drive=None, t=0.0):
    """Dimensionless energy ``I[m]`` by midpoint quadrature.

    Only the static uniform Zeeman field of ``drive`` enters; local fields and
    spin currents are dynamic drives and have no energy term.  ``t`` is
    accepted for interface symmetry and does not change the result.
    """
    return energy_data(field.data, field.grid, params, drive)


def skyrmion_number(field, z_layer=None):
    """Topological charge of one z-layer (1-based, default middle layer).

    Derivatives use the same stencils as the field operators with
    homogeneous Neumann ghosts, so any uniform state gives exactly zero.
    """
    grid = field.grid
    if z_layer is None:
        z_layer = grid.nz // 2 + 1
    if not 1 <= z_layer <= grid.nz:
        raise ValueError(f"z_layer must be in [1, {grid.nz}]")
    P = pad_with_ghosts(field.data, grid, 0.0)
    k = z_layer - 1
    dx = diff(P, grid.hx, 0)[:, :, :, k]
    dy = diff(P, grid.hy, 1)[:, :, :, k]
    m = field.data[:, :, :, k]
    density = np.einsum("c...,c...->...", m, np.cross(dx, dy, axis=0))
    return float(np.sum(density) * grid.hx * grid.hy / (4.0 * np.pi))


def spatial_average(field):
    return field.data.reshape(3, -1).mean(axis=1)


__all__ = [
    "curl",
    "diff",
    "energy",
    "energy_data",
    "energy_density_maps",
    "laplacian",
    "linear_field",
    "skyrmion_number",
    "spatial_average",
]
