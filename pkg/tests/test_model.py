import numpy as np
import pytest

from skyrtrack.model import (MU0, DrivePulse, InvariantError, MaterialParams,
                             build_default_track, build_geometry,
                             cell_neighbors, default_material, uniform_state)


def test_default_track_values():
    p, g = build_default_track()
    assert p.a_ex == 1.5e-11
    assert p.k_u == 8e5
    assert p.m_s == 5.8e5
    assert p.dmi_d == 3.5e-3
    assert p.alpha == 0.3
    assert p.beta == 0.1
    assert p.theta_sh == 0.3
    assert p.t_film == 0.4e-9
    assert (g.nx, g.ny) == (255, 40)
    assert (g.dx, g.dy, g.dz) == (2e-9, 2e-9, 0.4e-9)
    assert g.notch_length == 30e-9
    assert g.notch_depth == 10e-9


def test_default_notch_active_count():
    _, g = build_default_track()
    # 30 x 10 nm notch at 2 x 2 nm cells removes exactly 15 x 5 cells
    assert g.n_active == 255 * 40 - 15 * 5


def test_k_eff_thin_film():
    p = default_material()
    expected = 8e5 - MU0 * 5.8e5**2 / 2
    assert p.k_eff == pytest.approx(expected, rel=1e-12)
    assert abs(p.k_eff - 5.886e5) < 1e3
    assert p.k_eff > 0


def test_k_eff_without_demag_flag():
    p = MaterialParams(a_ex=1.5e-11, k_u=8e5, m_s=5.8e5, dmi_d=3.5e-3,
                       alpha=0.3, beta=0.1, theta_sh=0.3, t_film=0.4e-9,
                       use_thin_film_demag=False)
    assert p.k_eff == p.k_u


@pytest.mark.parametrize("field,value", [
    ("a_ex", -1.0), ("k_u", 0.0), ("m_s", -2.0), ("t_film", 0.0),
    ("alpha", 0.0), ("alpha", 1.5), ("theta_sh", 0.0), ("theta_sh", 1.2),
])
def test_material_invariants(field, value):
    kwargs = dict(a_ex=1.5e-11, k_u=8e5, m_s=5.8e5, dmi_d=3.5e-3,
                  alpha=0.3, beta=0.1, theta_sh=0.3, t_film=0.4e-9)
    kwargs[field] = value
    with pytest.raises(InvariantError):
        MaterialParams(**kwargs)


def test_mask_determinism():
    g1 = build_geometry()
    g2 = build_geometry()
    assert np.array_equal(g1.active, g2.active)


def test_notch_side_lower():
    g = build_geometry(notch_side="lower")
    assert not g.active[150, 0]
    assert g.active[150, 39]
    gu = build_geometry(notch_side="upper")
    assert gu.active[150, 0]
    assert not gu.active[150, 39]


def test_notch_area_vs_rasterization():
    g = build_geometry()
    removed = g.nx * g.ny - g.n_active
    nominal = (30e-9 * 10e-9) / (g.dx * g.dy)
    # within one cell layer of the rectangle circumference
    perimeter_cells = 2 * (15 + 5)
    assert abs(removed - nominal) <= perimeter_cells


def test_cell_neighbors_interior_and_corner():
    _, g = build_default_track()
    assert cell_neighbors(g, 100, 20).n_active == 4
    corner = cell_neighbors(g, 0, 0)
    assert corner.n_active == 2
    assert corner.n_boundary == 2


def test_cell_neighbors_adjacent_to_notch():
    _, g = build_default_track()
    # notch spans x cells 142..156, y cells 35..39 on the upper edge
    assert not g.active[150, 35]
    info = cell_neighbors(g, 150, 34)
    assert info.yp[1] is False          # boundary flag toward the notch
    assert info.ym[1] is True


def test_cell_neighbors_inactive_raises():
    _, g = build_default_track()
    with pytest.raises(InvariantError):
        cell_neighbors(g, 150, 39)


def test_uniform_state_only_active_cells():
    _, g = build_default_track()
    s = uniform_state(g)
    assert np.all(s.m[~g.active] == 0.0)
    assert np.allclose(np.linalg.norm(s.m[g.active], axis=-1), 1.0)
    assert s.norm_deviation(g) < 1e-12


def test_drive_pulse_sigma_hat():
    pulse = DrivePulse(j_hm=5e10, direction="+x")
    sig = pulse.sigma_hat
    assert sig @ np.array([0, 0, 1]) == 0.0
    assert sig @ np.array([1, 0, 0]) == 0.0
    assert np.allclose(DrivePulse(j_hm=1.0, direction="-x").sigma_hat, -sig)


def test_drive_pulse_invariants():
    with pytest.raises(InvariantError):
        DrivePulse(j_hm=-1.0)
    with pytest.raises(InvariantError):
        DrivePulse(j_hm=1.0, direction="y")
    with pytest.raises(InvariantError):
        DrivePulse(j_hm=1.0, t_on=1e-9, t_off=1e-9)


def test_pulse_active_window():
    pulse = DrivePulse(j_hm=1e10, t_on=1e-9, t_off=2e-9)
    assert not pulse.active_at(0.5e-9)
    assert pulse.active_at(1.5e-9)
    assert not pulse.active_at(2.5e-9)
