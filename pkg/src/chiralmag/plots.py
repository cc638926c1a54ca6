"""Figures written next to the delimited output files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _layer(grid, z_layer):
    return (grid.nz // 2 + 1 if z_layer is None else z_layer) - 1


def plot_m3(path, field, z_layer=None, title=None, arrows=8):
    """Colour map of ``m3`` on one z-layer with in-plane arrows."""
    g = field.grid
    k = _layer(g, z_layer)
    L_nm = g.L * 1e9
    ext = [0, g.nx * g.hx * L_nm, 0, g.ny * g.hy * L_nm]
    fig, ax = plt.subplots(figsize=(4.4, 4))
    im = ax.imshow(field.data[2, :, :, k].T, origin="lower", extent=ext, cmap="RdBu_r",
                   vmin=-1, vmax=1)
    step = max(1, min(g.nx, g.ny) // arrows)
    x = g.centers(0)[::step] * L_nm
    y = g.centers(1)[::step] * L_nm
    X, Y = np.meshgrid(x, y, indexing="ij")
    ax.quiver(X, Y, field.data[0, ::step, ::step, k], field.data[1, ::step, ::step, k],
              pivot="mid", color="k")
    ax.set_xlabel("x (nm)")
    ax.set_ylabel("y (nm)")
    if title:
        ax.set_title(title)
    fig.colorbar(im, ax=ax, label="$m_3$")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_trace(path, records):
    t = np.array([r.t_ps for r in records])
    e = np.array([r.energy_J for r in records])
    m = np.array([r.m_avg for r in records])
    fig, (a1, a2) = plt.subplots(2, 1, figsize=(5, 5), sharex=True)
    a1.plot(t, e)
    a1.set_ylabel("energy (J)")
    for c, name in enumerate(("$m_1$", "$m_2$", "$m_3$")):
        a2.plot(t, m[:, c], label=f"<{name}>")
    a2.set_xlabel("t (ps)")
    a2.set_ylabel("average")
    a2.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_energy_maps(path, grid, maps, z_layer=None, energy_scale=1.0):
    """Side by side maps of the non-DMI, DMI and total energy densities."""
    k = _layer(grid, z_layer)
    L_nm = grid.L * 1e9
    ext = [0, grid.nx * grid.hx * L_nm, 0, grid.ny * grid.hy * L_nm]
    fig, axes = plt.subplots(1, 3, figsize=(11, 3.4))
    for ax, name, arr in zip(axes, ("L", "D", "T"), maps):
        im = ax.imshow(arr[:, :, k].T, origin="lower", extent=ext, cmap="viridis")
        ax.set_title(name)
        ax.set_xlabel("x (nm)")
        fig.colorbar(im, ax=ax)
    axes[0].set_ylabel("y (nm)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_mep(path, a, energies_J, maxima=(), minima=()):
    a = np.asarray(a)
    e = np.asarray(energies_J)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(a, e, "o-", ms=3)
    if len(maxima):
        ax.plot(a[list(maxima)], e[list(maxima)], "r^", label="saddle")
    if len(minima):
        ax.plot(a[list(minima)], e[list(minima)], "gv", label="minimum")
    ax.set_xlabel("normalised arc length")
    ax.set_ylabel("energy (J)")
    if len(maxima) or len(minima):
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
