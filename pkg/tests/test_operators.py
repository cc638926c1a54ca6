import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chiralmag import (DimensionlessParams, DriveSpec, GridSpec, MagnetizationField, curl, energy,
                       energy_density_maps, fill_ghosts, laplacian, new_uniform, skyrmion_number,
                       spatial_average)
from chiralmag.initial import init_radial

from conftest import random_unit
from oracles import oracle_energy


def params(eps=0.0148, kappa=0.213, kappa_b=7.2, q=0.0):
    return DimensionlessParams(eps, kappa, kappa_b, q)


def field_from(grid, fn):
    X, Y, Z = grid.mesh()
    return MagnetizationField(grid, np.stack(fn(X, Y, Z)))


# ---- stencils --------------------------------------------------------------

def test_laplacian_uniform_neumann_is_zero():
    g = GridSpec(5, 4, 3, 0.1, 0.1, 0.1)
    gf = fill_ghosts(new_uniform(g, (0.3, 0.4, 0.5)), 0.0)
    assert np.all(laplacian(gf) == 0.0)


def test_laplacian_linear_and_quadratic_interior():
    g = GridSpec(8, 4, 3, 0.1, 0.1, 0.1)
    lin = field_from(g, lambda X, Y, Z: (0 * X, 0 * X, X))
    quad = field_from(g, lambda X, Y, Z: (0 * X, 0 * X, X ** 2))
    L1 = laplacian(fill_ghosts(lin, 0.0))[2, 1:-1, 1:-1, 1:-1]
    L2 = laplacian(fill_ghosts(quad, 0.0))[2, 1:-1, 1:-1, 1:-1]
    assert np.max(np.abs(L1)) < 1e-12
    assert np.allclose(L2, 2.0, atol=1e-10)


def test_laplacian_exact_for_multilinear_fields():
    g = GridSpec(6, 6, 6, 0.1, 0.2, 0.3)
    f = field_from(g, lambda X, Y, Z: (X * Y, Y * Z + X, X * Y * Z))
    L = laplacian(fill_ghosts(f, 3.0))[:, 1:-1, 1:-1, 1:-1]
    assert np.max(np.abs(L)) < 1e-11


def test_curl_uniform_is_zero():
    g = GridSpec(4, 4, 4, 0.1, 0.1, 0.1)
    assert np.all(curl(fill_ghosts(new_uniform(g, (1, 2, 3)), 0.0)) == 0.0)


def test_curl_of_linear_field():
    g = GridSpec(6, 5, 4, 0.1, 0.1, 0.1)
    f = field_from(g, lambda X, Y, Z: (0 * X, 0 * X, X))
    c = curl(fill_ghosts(f, 0.0))[:, 1:-1, 1:-1, 1:-1]
    assert np.allclose(c[0], 0.0) and np.allclose(c[2], 0.0)
    assert np.allclose(c[1], -1.0, atol=1e-12)


def test_curl_exact_for_general_linear_field():
    g = GridSpec(6, 6, 6, 0.1, 0.1, 0.1)
    f = field_from(g, lambda X, Y, Z: (2 * Y - Z, 3 * Z + X, -X + 4 * Y))
    c = curl(fill_ghosts(f, 0.0))[:, 1:-1, 1:-1, 1:-1]
    expect = np.array([4 - 3, -1 - (-1), 1 - 2])
    assert np.allclose(c, expect[:, None, None, None], atol=1e-12)


def _interior_errors(n):
    h = 1.0 / n
    g = GridSpec(n, 4, 1, h, h, h)
    f = field_from(g, lambda X, Y, Z: (0 * X, np.sin(2 * np.pi * X), 0 * X))
    X = g.mesh()[0]
    c = curl(fill_ghosts(f, 0.0))[2]
    lap = laplacian(fill_ghosts(f, 0.0))[1]
    sl = (slice(1, -1), slice(None), slice(None))
    e_curl = np.max(np.abs(c[sl] - 2 * np.pi * np.cos(2 * np.pi * X[sl])))
    e_lap = np.max(np.abs(lap[sl] + 4 * np.pi ** 2 * np.sin(2 * np.pi * X[sl])))
    return e_curl, e_lap


def test_second_order_interior_convergence():
    errs = np.array([_interior_errors(n) for n in (16, 32, 64, 128)])
    rates = np.log2(errs[:-1] / errs[1:])
    assert np.all(rates >= 1.9), rates
    assert np.allclose(errs[:-1] / errs[1:], 4.0, rtol=0.05)


def test_one_sided_boundary_stencil():
    g = GridSpec(4, 1, 1, 0.5, 1.0, 1.0)
    data = np.zeros((3, *g.shape))
    data[1, :, 0, 0] = [1.0, 2.0, 4.0, 8.0]
    gf = fill_ghosts(MagnetizationField(g, data), 0.0)
    dz = curl(gf)[2, :, 0, 0]  # = d m2 / dx
    assert np.allclose(dz, [(1 - 1) / 0.5, (4 - 1) / 1.0, (8 - 2) / 1.0, (8 - 8) / 0.5])


# ---- energy ----------------------------------------------------------------

@pytest.mark.parametrize("shape,seed", [((4, 4, 1), 0), ((4, 4, 1), 1), ((5, 3, 2), 2), ((8, 8, 2), 3)])
def test_energy_matches_direct_summation(shape, seed):
    g = GridSpec(*shape, 0.025, 0.03, 0.02)
    p = params(q=0.3)
    data = random_unit(shape, seed)
    he = (0.1, -0.2, 0.3)
    e = energy(MagnetizationField(g, data), p, DriveSpec(uniform_field=he))
    ref = oracle_energy(data, g, p, he)
    assert abs(e - ref) <= 1e-12 * max(abs(ref), 1.0)


def test_energy_uniform_without_boundary_twist_is_zero():
    g = GridSpec(5, 5, 2, 0.1, 0.1, 0.1)
    f = new_uniform(g, (0, 0, 1))
    p = params(kappa=0.0, kappa_b=0.0)
    assert energy(f, p) == 0.0
    L, D, T = energy_density_maps(f, p)
    assert np.all(L == 0) and np.all(D == 0) and np.all(T == 0)


def test_energy_ignores_time_and_dynamic_drives():
    from chiralmag import LocalField, SpinCurrent
    g = GridSpec(4, 4, 1, 0.1, 0.1, 0.1)
    f = MagnetizationField(g, random_unit(g.shape, 5))
    p = params()
    drive = DriveSpec(local_fields=[LocalField((0, 0, -2.5), (0.2, 0.2, 0.05), (0.1, 0.1, 1.0))],
                      currents=[SpinCurrent(-150.0, (-1, 0), 0.5)])
    assert energy(f, p, drive, t=3.0) == energy(f, p)


def test_energy_maps_sum_to_energy():
    g = GridSpec(6, 5, 2, 0.025, 0.025, 0.025)
    f = MagnetizationField(g, random_unit(g.shape, 7))
    p = params(q=0.2)
    L, D, T = energy_density_maps(f, p)
    assert np.array_equal(T, L + D)
    assert abs(T.sum() * g.cell_volume - energy(f, p)) <= 1e-12 * abs(energy(f, p))
    assert abs(D.sum()) > 0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_energy_invariant_under_deterministic_recompute(seed):
    g = GridSpec(4, 3, 2, 0.025, 0.025, 0.025)
    f = MagnetizationField(g, random_unit(g.shape, seed))
    assert energy(f, params()) == energy(f.copy(), params())


# ---- topological charge and averages ---------------------------------------

def test_charge_of_uniform_is_exactly_zero():
    g = GridSpec(6, 6, 3, 0.1, 0.1, 0.1)
    for d in [(0, 0, 1), (1, 2, 3), (0, 1, 0)]:
        assert skyrmion_number(new_uniform(g, d)) == 0.0


def test_charge_odd_under_inversion():
    g = GridSpec(7, 6, 3, 0.1, 0.1, 0.1)
    data = random_unit(g.shape, 11)
    q = skyrmion_number(MagnetizationField(g, data))
    assert skyrmion_number(MagnetizationField(g, -data)) == -q


def test_charge_of_resolved_skyrmion_is_one():
    # a skyrmion well inside a large domain covers the sphere once
    L_nm = 400.0
    g = GridSpec.from_physical((L_nm, L_nm, 2), 2)
    f = init_radial(g, (200, 200), 120, turns=1, core=1.0)
    assert skyrmion_number(f) == pytest.approx(1.0, abs=2e-3)
    flipped = init_radial(g, (200, 200), 120, turns=1, core=-1.0)
    assert skyrmion_number(flipped) == pytest.approx(-1.0, abs=2e-3)
    f2 = init_radial(g, (200, 200), 120, turns=2, core=-1.0)
    assert skyrmion_number(f2) == pytest.approx(0.0, abs=2e-3)


def test_charge_layer_validation():
    g = GridSpec(3, 3, 3, 0.1, 0.1, 0.1)
    f = new_uniform(g, (0, 0, 1))
    with pytest.raises(ValueError):
        skyrmion_number(f, 0)
    with pytest.raises(ValueError):
        skyrmion_number(f, 4)


def test_spatial_average():
    g = GridSpec(4, 4, 2, 0.1, 0.1, 0.1)
    assert np.allclose(spatial_average(new_uniform(g, (0, 0, 1))), [0, 0, 1])
    data = np.zeros((3, *g.shape))
    data[2, :2] = 1.0
    data[2, 2:] = -1.0
    assert np.allclose(spatial_average(MagnetizationField(g, data)), [0, 0, 0])
