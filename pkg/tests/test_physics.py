import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chiralmag import (DimensionlessParams, DriveSpec, GridSpec, LocalField, MagnetizationField,
                       PhysicalParams, SpinCurrent, effective_field, local_field_hhat, new_uniform,
                       nondimensionalize)
from chiralmag.physics import MU0, hhat_data, time_to_dimensionless, time_to_ps
from chiralmag.operators import linear_field

from conftest import random_unit


def test_fege_dimensionless_values(fege):
    assert fege.eps == pytest.approx(1.48e-2, rel=5e-3)
    assert fege.kappa == pytest.approx(0.213, rel=5e-3)
    assert fege.kappa_b == pytest.approx(7.20, rel=1e-3)
    assert fege.q == 0.0


def test_fege_scales(fege):
    assert fege.energy_scale == pytest.approx(MU0 * 3.84e5 ** 2 * 80e-9 ** 3)
    assert fege.field_scale == pytest.approx(MU0 * 3.84e5)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-13, 1e-10), st.floats(-1e-2, 1e-2), st.floats(1e4, 2e6), st.floats(1e-9, 1e-6))
def test_kappa_b_identity(A, D, Ms, L):
    p = nondimensionalize(PhysicalParams(A, D, Ms, L=L))
    assert p.kappa_b == pytest.approx(p.kappa / (2 * p.eps), rel=1e-12, abs=1e-300)


def test_no_dmi():
    p = nondimensionalize(PhysicalParams(8.78e-12, 0.0, 3.84e5))
    assert p.kappa == 0.0 and p.kappa_b == 0.0


def test_length_scaling():
    a = nondimensionalize(PhysicalParams.fege(L=80e-9))
    b = nondimensionalize(PhysicalParams.fege(L=160e-9))
    assert b.eps == pytest.approx(a.eps / 4, rel=1e-12)
    assert b.kappa == pytest.approx(a.kappa / 2, rel=1e-12)
    assert b.kappa_b == pytest.approx(a.kappa_b * 2, rel=1e-12)


@pytest.mark.parametrize("bad", [dict(A=0.0), dict(Ms=-1.0), dict(L=0.0), dict(alpha=0.0), dict(alpha=1.5)])
def test_invalid_physical_params(bad):
    kw = dict(A=8.78e-12, D=1.58e-3, Ms=3.84e5)
    kw.update(bad)
    with pytest.raises(ValueError):
        nondimensionalize(PhysicalParams(**kw))


def test_time_conversion():
    # alpha must be positive; 1e-12 makes (1 + alpha^2) equal to 1 in double precision
    p0 = nondimensionalize(PhysicalParams(8.78e-12, 1.58e-3, 3.84e5, alpha=1e-12))
    assert time_to_dimensionless(0.0, p0) == 0.0
    # 1 / (mu0 gamma Ms) with gamma = 1.76e11
    p_hand = nondimensionalize(PhysicalParams(8.78e-12, 1.58e-3, 3.84e5, alpha=1e-12, gamma=1.76e11))
    assert time_to_ps(1.0, p_hand) == pytest.approx(11.77, abs=0.01)
    p6 = nondimensionalize(PhysicalParams.fege(alpha=0.6))
    assert time_to_ps(1.0, p6) / time_to_ps(1.0, p0) == pytest.approx(1.36, rel=1e-9)
    assert time_to_ps(time_to_dimensionless(7.5, p6), p6) == pytest.approx(7.5, rel=1e-14)


def test_with_alpha_rescales_time(fege):
    other = nondimensionalize(PhysicalParams.fege(alpha=0.2))
    assert fege.with_alpha(0.2).time_scale == pytest.approx(other.time_scale, rel=1e-14)


def _grid():
    return GridSpec.from_physical((80, 80, 6), 2)


def test_zero_drive_zero_hhat(fege):
    g = GridSpec(4, 4, 2, 0.1, 0.1, 0.1)
    f = MagnetizationField(g, random_unit(g.shape))
    assert np.all(local_field_hhat(f, fege, None) == 0.0)
    assert np.all(local_field_hhat(f, fege, DriveSpec()) == 0.0)


def test_anisotropy_term():
    p = DimensionlessParams(0.0, 0.0, 0.0, q=0.4)
    g = GridSpec(2, 2, 1, 0.1, 0.1, 0.1)
    data = random_unit(g.shape, 4)
    h = local_field_hhat(MagnetizationField(g, data), p, None)
    assert np.allclose(h[0], 0.0)
    assert np.allclose(h[1:], -0.4 * data[1:])


def test_uniform_zeeman_adds_constant(fege):
    g = GridSpec(3, 3, 1, 0.1, 0.1, 0.1)
    h = local_field_hhat(new_uniform(g, (0, 0, 1)), fege, DriveSpec(uniform_field=(0.1, 0, -0.2)))
    assert np.allclose(h[0], 0.1) and np.allclose(h[2], -0.2)


def test_moving_local_field_box(fege):
    g = _grid()
    L_nm = 80.0
    lf = LocalField(amplitude_T=(0, 0, -2.5), center=(20 / L_nm, 40 / L_nm, 3 / L_nm),
                    half_widths=(10 / L_nm, 10 / L_nm, 3 / L_nm), velocity_mps=(40.0, 0, 0))
    drive = DriveSpec(local_fields=[lf])
    f = new_uniform(g, (0, 0, 1))
    t_ps = 500.0  # 40 m/s for 500 ps moves the box by 20 nm
    h = local_field_hhat(f, fege, drive, t_ps)
    X, Y, Z = [c * L_nm for c in g.mesh()]
    inside = (np.abs(X - 40.0) <= 10 + 1e-9) & (np.abs(Y - 40.0) <= 10 + 1e-9)
    amp = -2.5 / (MU0 * 3.84e5)
    assert np.allclose(h[2][inside], amp)
    assert np.all(h[2][~inside] == 0.0)
    assert np.all(h[:2] == 0.0)


def test_local_field_closed_box_membership(fege):
    g = GridSpec(4, 1, 1, 1.0, 1.0, 1.0)  # centres at 0.5, 1.5, 2.5, 3.5
    lf = LocalField((0, 0, 1.0), (2.0, 0.5, 0.5), (0.5, 0.5, 0.5))
    assert lf.mask(g, 0.0)[:, 0, 0].tolist() == [False, True, True, False]


def test_local_field_window(fege):
    g = GridSpec(2, 2, 1, 0.5, 0.5, 0.5)
    lf = LocalField((0, 0, 1.0), (0.5, 0.5, 0.25), (1, 1, 1), window_ps=(10.0, 20.0))
    f = new_uniform(g, (1, 0, 0))
    d = DriveSpec(local_fields=[lf])
    assert np.all(local_field_hhat(f, fege, d, 5.0) == 0)
    assert np.any(local_field_hhat(f, fege, d, 10.0) != 0)
    assert np.all(local_field_hhat(f, fege, d, 20.0) == 0)


def test_spin_transfer_terms(fege):
    g = _grid()
    X = g.mesh()[0]
    theta = np.pi * X / g.extent[0]
    data = np.stack([np.sin(theta), 0 * theta, np.cos(theta)])
    f = MagnetizationField(g, data)
    cur = SpinCurrent(-150.0, (-1.0, 0.0), 0.5)
    h = local_field_hhat(f, fege, DriveSpec(currents=[cur]))
    assert np.max(np.abs(h)) > 0
    # independent recomputation in the interior with centred differences
    dm = (data[:, 2:] - data[:, :-2]) / (2 * g.hx)
    jgrad = -dm
    coef = 150.0 / fege.velocity_scale
    expect = coef * (np.cross(data[:, 1:-1], jgrad, axis=0) + 0.5 * jgrad)
    assert np.allclose(h[:, 1:-1], expect, rtol=1e-12, atol=1e-15)
    zero = local_field_hhat(f, fege, DriveSpec(currents=[SpinCurrent(0.0, (-1, 0), 0.5)]))
    assert np.all(zero == 0.0)


def test_spin_current_validation():
    with pytest.raises(ValueError):
        SpinCurrent(1.0, (0, 0), 0.1)
    with pytest.raises(ValueError):
        SpinCurrent(1.0, (1, 0), -0.1)
    assert SpinCurrent(1.0, (3, 4)).direction == pytest.approx((0.6, 0.8, 0.0))


def test_effective_field_uniform_is_zero():
    p = DimensionlessParams(0.0148, 0.213, 0.0)
    g = GridSpec(4, 4, 3, 0.1, 0.1, 0.1)
    assert np.all(effective_field(new_uniform(g, (0, 0, 1)), p) == 0.0)


def test_effective_field_is_linear_part_plus_hhat(fege):
    g = GridSpec(5, 4, 3, 0.025, 0.025, 0.025)
    data = random_unit(g.shape, 9)
    f = MagnetizationField(g, data)
    drive = DriveSpec(uniform_field=(0.0, 0.0, 0.1))
    h = effective_field(f, fege, drive)
    assert np.allclose(h, linear_field(data, g, fege) + hhat_data(data, g, fege, drive), atol=0)
    assert np.array_equal(linear_field(2 * data, g, fege), 2 * linear_field(data, g, fege))
