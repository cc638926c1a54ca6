"""Cell-centred storage of unit-vector fields and the chiral ghost layer.

Fields are stored as arrays of shape ``(3, nx, ny, nz)``: component first,
then the cell index along x, y and z.  Cell ``(i, j, k)`` (0-based) has its
centre at ``((i + 1/2) hx, (j + 1/2) hy, (k + 1/2) hz)`` in dimensionless
coordinates.

The ghost layer is one cell thick on each face only.  Edge and corner cells
of the padded array are never read by any stencil and are left as zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class DegenerateStateError(ValueError):
    """A cell vector has zero length and cannot be normalised."""

    def __init__(self, index, message=None):
        self.index = tuple(int(i) for i in index)
        super().__init__(message or f"zero-length magnetization at cell {self.index}")


@dataclass(frozen=True)
class GridSpec:
    """Structured grid of ``nx * ny * nz`` cells.

    ``hx, hy, hz`` are dimensionless (cell size divided by the length scale
    ``L``, which is in metres).
    """

    nx: int
    ny: int
    nz: int
    hx: float
    hy: float
    hz: float
    L: float = 1.0

    def __post_init__(self):
        for name in ("nx", "ny", "nz"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("hx", "hy", "hz", "L"):
            if not float(getattr(self, name)) > 0.0:
                raise ValueError(f"{name} must be > 0")

    @classmethod
    def from_physical(cls, sample_nm, mesh_nm, length_nm=None):
        """Grid covering a box of ``sample_nm`` with cubes of ``mesh_nm``.

        The length scale defaults to the first sample dimension, which is how
        the FeGe samples are scaled (80 nm sample, ``L = 80 nm``).
        """
        sample = np.asarray(sample_nm, dtype=float)
        mesh = np.broadcast_to(np.asarray(mesh_nm, dtype=float), (3,))
        counts = sample / mesh
        n = np.rint(counts).astype(int)
        if np.any(np.abs(counts - n) > 1e-9 * np.maximum(counts, 1.0)) or np.any(n < 1):
            raise ValueError(f"mesh {tuple(mesh)} nm does not divide sample {tuple(sample)} nm")
        L_nm = float(sample[0] if length_nm is None else length_nm)
        h = mesh / L_nm
        return cls(int(n[0]), int(n[1]), int(n[2]), float(h[0]), float(h[1]), float(h[2]), L_nm * 1e-9)

    @property
    def shape(self):
        return (self.nx, self.ny, self.nz)

    @property
    def spacing(self):
        return (self.hx, self.hy, self.hz)

    @property
    def cell_volume(self):
        return self.hx * self.hy * self.hz

    @property
    def n_cells(self):
        return self.nx * self.ny * self.nz

    @property
    def extent(self):
        """Dimensionless side lengths of the sample."""
        return (self.nx * self.hx, self.ny * self.hy, self.nz * self.hz)

    def centers(self, axis):
        n, h = self.shape[axis], self.spacing[axis]
        return (np.arange(n) + 0.5) * h

    def mesh(self):
        """Cell-centre coordinate arrays, each of shape ``(nx, ny, nz)``."""
        return np.meshgrid(self.centers(0), self.centers(1), self.centers(2), indexing="ij")


@dataclass
class MagnetizationField:
    grid: GridSpec
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.shape != (3, *self.grid.shape):
            raise ValueError(f"data shape {self.data.shape} does not match grid {(3, *self.grid.shape)}")

    def copy(self):
        return MagnetizationField(self.grid, self.data.copy())

    def norms(self):
        return np.sqrt(np.einsum("c...,c...->...", self.data, self.data))

    def max_norm_error(self):
        return float(np.max(np.abs(self.norms() - 1.0)))


def new_uniform(grid, direction):
    d = np.asarray(direction, dtype=float)
    n = np.linalg.norm(d)
    if d.shape != (3,) or n == 0.0:
        raise ValueError("direction must be a nonzero 3-vector")
    data = np.empty((3, *grid.shape))
    data[:] = (d / n)[:, None, None, None]
    return MagnetizationField(grid, data)


_UNIT_SLACK = 4 * np.finfo(float).eps


def normalize(data):
    """Return ``data / |data|`` cell-wise; raises on zero-length cells.

    Cells whose length is already 1 to within a few ulps are returned
    unchanged, which makes the projection exactly idempotent.
    """
    norms = np.sqrt(np.einsum("c...,c...->...", data, data))
    bad = np.argwhere(norms == 0.0)
    if bad.size:
        raise DegenerateStateError(bad[0])
    norms = np.where(np.abs(norms - 1.0) <= _UNIT_SLACK, 1.0, norms)
    return data / norms


def project(field):
    return MagnetizationField(field.grid, normalize(field.data))


@lru_cache(maxsize=64)
def ghost_matrix(k, axis, sign):
    """3x3 map from the boundary cell to its ghost on one face.

    Discretising ``dm/dnu = -kappa_b m x nu`` with a midpoint average across
    the face gives ``(I + k C) g = (I - k C) m`` where ``C v = v x nu`` and
    ``k = kappa_b h / 2``.  The solution is a Cayley transform of the skew
    matrix ``C``, hence a rotation about ``nu``.
    """
    nu = np.zeros(3)
    nu[axis] = sign
    C = np.array([np.cross(e, nu) for e in np.eye(3)]).T
    eye = np.eye(3)
    return np.linalg.solve(eye + k * C, eye - k * C)


def _face_maps(grid, kappa_b):
    kb = [kappa_b * h / 2.0 for h in grid.spacing]
    return kb, [(ghost_matrix(kb[a], a, -1), ghost_matrix(kb[a], a, +1)) for a in range(3)]


def pad_with_ghosts(data, grid, kappa_b):
    """Padded array ``(3, nx+2, ny+2, nz+2)`` with face ghosts filled.

    Linear in ``data``; used directly by the matrix-free operators.
    """
    nx, ny, nz = grid.shape
    P = np.zeros((3, nx + 2, ny + 2, nz + 2))
    P[:, 1:-1, 1:-1, 1:-1] = data
    _, maps = _face_maps(grid, kappa_b)
    (Rxm, Rxp), (Rym, Ryp), (Rzm, Rzp) = maps
    P[:, 0, 1:-1, 1:-1] = np.einsum("ab,bjk->ajk", Rxm, data[:, 0])
    P[:, -1, 1:-1, 1:-1] = np.einsum("ab,bjk->ajk", Rxp, data[:, -1])
    P[:, 1:-1, 0, 1:-1] = np.einsum("ab,bik->aik", Rym, data[:, :, 0])
    P[:, 1:-1, -1, 1:-1] = np.einsum("ab,bik->aik", Ryp, data[:, :, -1])
    P[:, 1:-1, 1:-1, 0] = np.einsum("ab,bij->aij", Rzm, data[:, :, :, 0])
    P[:, 1:-1, 1:-1, -1] = np.einsum("ab,bij->aij", Rzp, data[:, :, :, -1])
    return P


@dataclass
class GhostField:
    """Interior field plus one ghost layer per face.

    ``padded`` has shape ``(3, nx+2, ny+2, nz+2)``; index 0 and ``n+1`` along
    each axis hold the ghosts.
    """

    grid: GridSpec
    padded: np.ndarray
    kb: tuple

    @property
    def interior(self):
        return self.padded[:, 1:-1, 1:-1, 1:-1]

    def face(self, axis, side):
        """Ghost layer on a face; ``side`` is -1 (index 0) or +1 (index n+1)."""
        idx = [slice(None), slice(1, -1), slice(1, -1), slice(1, -1)]
        idx[axis + 1] = 0 if side < 0 else -1
        return self.padded[tuple(idx)]


def fill_ghosts(field, params):
    """Fill the face ghosts for the chiral boundary condition.

    ``params`` is anything with a ``kappa_b`` attribute, or a bare number.
    """
    kappa_b = float(getattr(params, "kappa_b", params))
    kb, _ = _face_maps(field.grid, kappa_b)
    return GhostField(field.grid, pad_with_ghosts(field.data, field.grid, kappa_b), tuple(kb))
