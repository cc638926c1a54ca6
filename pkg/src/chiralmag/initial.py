"""Initial magnetization states.

Membership tests use cell centres against closed regions, so a cell whose
centre lies exactly on a block edge or on the circle belongs to it.
"""

from __future__ import annotations

import numpy as np

from chiralmag.grid import MagnetizationField, new_uniform, normalize


def _centers_nm(grid):
    scale = grid.L * 1e9
    return [c * scale for c in grid.mesh()]


def init_blocks(grid, block_size_nm, spacing_nm, count_layout):
    """Background ``(0,0,1)`` with reversed rectangles through the thickness.

    ``count_layout = (bx, by)`` rectangles of ``block_size_nm = (wx, wy)``
    separated by ``spacing_nm`` gaps, the whole array centred in-plane.
    """
    bx, by = (int(c) for c in count_layout)
    if bx < 0 or by < 0:
        raise ValueError("block counts must be >= 0")
    field = new_uniform(grid, (0.0, 0.0, 1.0))
    if bx == 0 or by == 0:
        return field
    wx, wy = np.broadcast_to(np.asarray(block_size_nm, float), (2,))
    gap = float(spacing_nm)
    if wx <= 0 or wy <= 0 or gap < 0:
        raise ValueError("block size must be > 0 and spacing >= 0")
    ext = [e * grid.L * 1e9 for e in grid.extent]
    total = (bx * wx + (bx - 1) * gap, by * wy + (by - 1) * gap)
    if total[0] > ext[0] + 1e-9 or total[1] > ext[1] + 1e-9:
        raise ValueError(f"layout {total[0]:g} x {total[1]:g} nm exceeds the sample "
                         f"{ext[0]:g} x {ext[1]:g} nm")
    X, Y, _ = _centers_nm(grid)
    x0 = 0.5 * (ext[0] - total[0])
    y0 = 0.5 * (ext[1] - total[1])
    inside = np.zeros(grid.shape, dtype=bool)
    for i in range(bx):
        lo_x = x0 + i * (wx + gap)
        for j in range(by):
            lo_y = y0 + j * (wy + gap)
            inside |= (X >= lo_x) & (X <= lo_x + wx) & (Y >= lo_y) & (Y <= lo_y + wy)
    field.data[:, inside] = np.array([0.0, 0.0, -1.0])[:, None]
    return field


def random_generator(seed):
    """Counter-based Philox generator keyed by ``seed``.

    Stream discipline: one generator per initializer call, and draws are
    consumed for the selected cells in numpy C order over ``(i, j, k)``, so a
    seed fixes the state on any platform.
    """
    return np.random.Generator(np.random.Philox(key=int(seed)))


def init_random_circle(base, center_nm, radius_nm, seed):
    """Cells within ``radius_nm`` of ``center_nm`` (in-plane) get random directions.

    Directions are normalised standard normal triples, i.e. uniform on the
    sphere, drawn for the selected cells in C order of ``(i, j, k)``.
    """
    grid = base.grid
    X, Y, _ = _centers_nm(grid)
    cx, cy = center_nm[0], center_nm[1]
    inside = (X - cx) ** 2 + (Y - cy) ** 2 <= float(radius_nm) ** 2
    out = base.copy()
    n = int(inside.sum())
    if n == 0:
        return out
    rng = random_generator(seed)
    v = rng.standard_normal((n, 3))
    norms = np.linalg.norm(v, axis=1)
    while np.any(norms == 0.0):
        bad = norms == 0.0
        v[bad] = rng.standard_normal((int(bad.sum()), 3))
        norms = np.linalg.norm(v, axis=1)
    out.data[:, inside] = (v / norms[:, None]).T
    return out


def init_radial(grid, center_nm, radius_nm, turns=1, core=1.0, helicity=np.pi / 2):
    """Radially symmetric texture with polar angle ``theta(r) = pi turns r / R``.

    ``turns = 1`` gives a skyrmion of radius ``R`` and ``turns = 2`` a
    skyrmionium; ``core = +1`` or ``-1`` picks the core polarity and the
    helicity ``pi/2`` a Bloch twist.  Outside ``R`` the state is uniform.
    """
    if radius_nm <= 0:
        raise ValueError("radius_nm must be > 0")
    X, Y, _ = _centers_nm(grid)
    dx, dy = X - center_nm[0], Y - center_nm[1]
    r = np.hypot(dx, dy)
    phi = np.arctan2(dy, dx)
    theta = np.pi * turns * np.clip(r / radius_nm, 0.0, 1.0)
    s = np.sign(core) or 1.0
    m = np.stack([
        np.sin(theta) * np.cos(phi + helicity),
        np.sin(theta) * np.sin(phi + helicity),
        s * np.cos(theta),
    ])
    return MagnetizationField(grid, normalize(m))
