import numpy as np
import pytest

from skyrtrack.fields import (dmi_field, exchange_field, anisotropy_field,
                              total_energy, total_field)
from skyrtrack.model import (MU0, MagnetizationGrid, MaterialParams,
                             build_geometry, default_material, uniform_state)

RNG = np.random.default_rng(2024)


def small_track(nx=48, ny=24, notch=True):
    p = default_material()
    g = build_geometry(nx=nx, ny=ny,
                       notch_center_x=nx * 1e-9,
                       notch_length=30e-9 if notch else 0.0,
                       notch_depth=10e-9 if notch else 0.0)
    return p, g


def random_state(g, rng=RNG):
    m = rng.normal(size=(g.nx, g.ny, 3))
    m /= np.linalg.norm(m, axis=-1, keepdims=True)
    m[~g.active] = 0.0
    return MagnetizationGrid(m, 0.0)


def test_exchange_uniform_is_zero():
    p, g = small_track()
    h = exchange_field(uniform_state(g), p, g)
    assert np.max(np.abs(h)) == 0.0


def test_exchange_flipped_cell_stencil_value():
    p, g = small_track(notch=False)
    s = uniform_state(g)
    s.m[20, 12] = [0.0, 0.0, -1.0]
    h = exchange_field(s, p, g)
    # hand stencil: 4 neighbors at +z, center at -z, dx = dy
    expected = 2 * p.a_ex / (MU0 * p.m_s) * 4 * 2.0 / g.dx**2
    assert h[20, 12, 2] == pytest.approx(expected, rel=1e-12)
    assert h[20, 12, 0] == 0.0


def test_wall_profile_torque_is_second_order_in_dx():
    # Bloch wall of exchange + anisotropy only: torque ~ O(dx^2)
    p0 = default_material()
    p = MaterialParams(a_ex=p0.a_ex, k_u=p0.k_u, m_s=p0.m_s, dmi_d=0.0,
                       alpha=0.3, beta=0.1, theta_sh=0.3, t_film=p0.t_film)
    delta = p.wall_width
    torque = {}
    for dx in (2e-9, 1e-9):
        nx = int(round(240e-9 / dx))
        g = build_geometry(nx=nx, ny=4, dx=dx, dy=dx, notch_length=0)
        x = g.x_centers() - 120e-9
        mz = np.tanh(x / delta)
        my = 1.0 / np.cosh(x / delta)
        m = np.zeros((g.nx, g.ny, 3))
        m[..., 1] = my[:, None]
        m[..., 2] = mz[:, None]
        s = MagnetizationGrid(m, 0.0)
        h = exchange_field(s, p, g) + anisotropy_field(s, p, g)
        tq = np.linalg.norm(np.cross(s.m, h), axis=-1)
        torque[dx] = np.max(tq[4:-4, :])
    ratio = torque[2e-9] / torque[1e-9]
    assert 3.0 < ratio < 5.0


def test_dmi_uniform_interior_zero():
    p, g = small_track(notch=False)
    h = dmi_field(uniform_state(g, (0.6, -0.5, 0.2)), p, g)
    interior = h[2:-2, 2:-2]
    assert np.max(np.abs(interior)) == 0.0


def test_dmi_linear_mz_slope():
    p, g = small_track(notch=False)
    slope = 1e6  # 1/m; |m_z| stays small across the strip
    m = np.zeros((g.nx, g.ny, 3))
    m[..., 2] = slope * g.x_centers()[:, None] * np.ones((1, g.ny))
    h = dmi_field(MagnetizationGrid(m, 0.0), p, g)
    expected = 2 * p.dmi_d / (MU0 * p.m_s) * slope
    interior = h[2:-2, 2:-2]
    assert np.allclose(interior[..., 0], expected, rtol=1e-10)
    assert np.max(np.abs(interior[..., 1])) == 0.0


def test_anisotropy_values():
    p, g = small_track()
    h = anisotropy_field(uniform_state(g), p, g)
    expected = 2 * p.k_eff / (MU0 * p.m_s)
    assert h[10, 10, 2] == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(2 * 5.886e5 / (MU0 * 5.8e5), rel=1e-3)
    h_in = anisotropy_field(uniform_state(g, (1, 0, 0)), p, g)
    assert np.max(np.abs(h_in)) == 0.0
    h_dn = anisotropy_field(uniform_state(g, (0, 0, -1)), p, g)
    assert h_dn[10, 10, 2] == pytest.approx(-expected, rel=1e-12)


def test_total_field_breakdown_and_inactive():
    p, g = small_track()
    s = random_state(g)
    ef = total_field(s, p, g, applied=(1e4, 0, -2e4))
    assert ef.breakdown_residual() < 1e-12
    assert np.all(ef.h[~g.active] == 0.0)
    for term in ef.terms.values():
        assert np.all(term[~g.active] == 0.0)


def test_total_field_uniform_is_anisotropy_only():
    p, g = small_track(notch=False)
    ef = total_field(uniform_state(g), p, g)
    interior = np.s_[2:-2, 2:-2]
    assert np.allclose(ef.h[interior], ef.terms["anisotropy"][interior])


def field_energy_consistency(s, p, g, cells, eps=1e-6, applied=(0.0, 0.0, 0.0)):
    """Worst relative error of H vs the central-difference energy gradient."""
    h = total_field(s, p, g, applied).h
    worst = 0.0
    scale_floor = 1e-6 * np.max(np.abs(h))
    for (i, j) in cells:
        c = int(RNG.integers(0, 3))
        m2 = s.m.copy()
        m2[i, j, c] += eps
        ep = total_energy(MagnetizationGrid(m2, 0.0), p, g, applied).e_total
        m2[i, j, c] -= 2 * eps
        em = total_energy(MagnetizationGrid(m2, 0.0), p, g, applied).e_total
        h_fd = -(ep - em) / (2 * eps) / (MU0 * p.m_s * g.cell_volume)
        denom = max(abs(h_fd), scale_floor)
        worst = max(worst, abs(h_fd - h[i, j, c]) / denom)
    return worst


def test_field_is_energy_gradient_50_random_cells():
    p, g = small_track()
    s = random_state(g)
    ii, jj = np.nonzero(g.active)
    pick = RNG.choice(len(ii), size=50, replace=False)
    cells = list(zip(ii[pick], jj[pick]))
    assert field_energy_consistency(s, p, g, cells, applied=(0, 3e4, 1e4)) < 1e-4


def test_field_locality_four_neighbors():
    p, g = small_track(notch=False)
    s = random_state(g)
    h0 = exchange_field(s, p, g) + dmi_field(s, p, g)
    s2 = MagnetizationGrid(s.m.copy(), 0.0)
    s2.m[30, 18] = [0.0, 1.0, 0.0]   # far from probe cell (10, 5)
    h1 = exchange_field(s2, p, g) + dmi_field(s2, p, g)
    assert np.array_equal(h0[10, 5], h1[10, 5])
    assert not np.array_equal(h0[30, 18], h1[30, 18])


def test_energy_isometries():
    # point reflection (180-degree rotation of space and in-plane spin
    # components) and the axial mirror x -> -x, (mx,my,mz)->(mx,-my,-mz)
    p, g = small_track(notch=False)
    s = random_state(g)
    e0 = total_energy(s, p, g).e_total

    rot = s.m[::-1, ::-1, :].copy()
    rot[..., 0] *= -1
    rot[..., 1] *= -1
    e_rot = total_energy(MagnetizationGrid(rot, 0.0), p, g).e_total
    assert e_rot == pytest.approx(e0, rel=1e-12)

    mir = s.m[::-1, :, :].copy()
    mir[..., 1] *= -1
    mir[..., 2] *= -1
    e_mir = total_energy(MagnetizationGrid(mir, 0.0), p, g).e_total
    assert e_mir == pytest.approx(e0, rel=1e-12)


def test_zero_dmi_constant_zeroes_term():
    p0 = default_material()
    p = MaterialParams(a_ex=p0.a_ex, k_u=p0.k_u, m_s=p0.m_s, dmi_d=0.0,
                       alpha=0.3, beta=0.1, theta_sh=0.3, t_film=p0.t_film)
    _, g = small_track()
    g = build_geometry(nx=48, ny=24, notch_center_x=48e-9)
    s = random_state(g)
    assert np.max(np.abs(dmi_field(s, p, g))) == 0.0
    assert total_energy(s, p, g).e_dmi == 0.0


def test_energy_uniform_reference():
    p, g = small_track()
    e_up = total_energy(uniform_state(g), p, g)
    assert e_up.e_total == 0.0
    e_in = total_energy(uniform_state(g, (1, 0, 0)), p, g)
    v_active = g.n_active * g.cell_volume
    assert e_in.e_anisotropy == pytest.approx(p.k_eff * v_active, rel=1e-12)


def test_energy_report_total_is_sum():
    p, g = small_track()
    e = total_energy(random_state(g), p, g, applied=(0, 0, 5e4))
    assert e.e_total == (e.e_exchange + e.e_dmi + e.e_anisotropy + e.e_zeeman)
