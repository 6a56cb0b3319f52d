import numpy as np
import pytest
import scipy.constants as const

from skyrtrack.model import default_material
from skyrtrack.thiele import (ThieleParams, dissipative_scalar, drag_scale,
                              predict_velocity, skyrmion_hall_angle, stt_force)

RNG = np.random.default_rng(7)


def make_tp(q=-1.0, d_scalar=7.0, b=13e-9, alpha=0.3):
    return ThieleParams(q=q, d_scalar=d_scalar, b=b, alpha=alpha,
                        drag=drag_scale(default_material()))


def test_stt_force_zero_current():
    p = default_material()
    f = stt_force(0.0, p, 13e-9)
    assert np.allclose(f, 0.0)


def test_stt_force_linearity_and_magnitude():
    p = default_material()
    b = 13.5e-9
    f1 = stt_force(5e10, p, b)
    f2 = stt_force(1e11, p, b)
    assert np.allclose(f2, 2 * f1)
    expected = 5e10 * 0.3 * const.hbar * np.pi * b / (2 * const.e)
    assert np.hypot(*f1) == pytest.approx(expected, rel=1e-12)
    # z x (-y) = +x for the default polarization and positive charge sign
    assert f1[0] > 0 and f1[1] == 0.0


def test_stt_force_sign_by_charge():
    p = default_material()
    f_pos = stt_force(5e10, p, 13e-9, charge_sign=+1)
    f_neg = stt_force(5e10, p, 13e-9, charge_sign=-1)
    assert np.allclose(f_neg, -f_pos)


def test_dissipative_scalar_inversion():
    p = default_material()
    d_unit = 8 * np.sqrt(p.a_ex / p.k_u) / np.pi**2
    assert dissipative_scalar(p, d_unit) == pytest.approx(1.0, rel=1e-12)


def test_dissipative_scalar_hand_value():
    # Table I values at d = 20 nm: pi^2 * 2e-8 / (8 sqrt(1.5e-11 / 8e5))
    p = default_material()
    assert dissipative_scalar(p, 20e-9) == pytest.approx(5.69822, rel=1e-5)


def test_dissipative_scalar_linearity():
    p = default_material()
    assert dissipative_scalar(p, 40e-9) == pytest.approx(
        2 * dissipative_scalar(p, 20e-9), rel=1e-12)
    with pytest.raises(ValueError):
        dissipative_scalar(p, 0.0)


def test_predict_velocity_no_magnus():
    tp = make_tp(q=0.0)
    f = np.array([2e-13, 1e-13])
    v = np.array(predict_velocity(tp, f))
    expected = f / (tp.alpha * tp.d_scalar * tp.drag)
    assert np.allclose(v, expected, rtol=1e-12)
    cross = v[0] * f[1] - v[1] * f[0]
    assert abs(cross) < 1e-30      # parallel to F


def test_predict_velocity_zero_force():
    assert predict_velocity(make_tp(), (0.0, 0.0)) == (0.0, 0.0)


def test_predict_velocity_linearity_in_force():
    tp = make_tp()
    f = (1.3e-13, -0.4e-13)
    v1 = np.array(predict_velocity(tp, f))
    v3 = np.array(predict_velocity(tp, (3 * f[0], 3 * f[1])))
    assert np.allclose(v3, 3 * v1, rtol=1e-12)


def test_predict_velocity_singular():
    tp = ThieleParams(q=0.0, d_scalar=1.0, b=1e-8, alpha=0.0, drag=1e-15)
    with pytest.raises(ValueError):
        predict_velocity(tp, (1e-13, 0.0))


def test_speed_monotone_in_force_and_drag():
    tp = make_tp()
    speeds = [np.hypot(*predict_velocity(tp, (s * 1e-13, 0.0)))
              for s in (1.0, 2.0, 4.0)]
    assert speeds[0] < speeds[1] < speeds[2]
    f = (2e-13, 0.0)
    for _ in range(20):
        d1, d2 = sorted(RNG.uniform(1.0, 40.0, size=2))
        v1 = np.hypot(*predict_velocity(make_tp(d_scalar=d1), f))
        v2 = np.hypot(*predict_velocity(make_tp(d_scalar=d2), f))
        assert v2 <= v1 + 1e-15


def test_angle_depends_only_on_ratio():
    f = (1e-13, 0.0)
    for _ in range(30):
        q = RNG.choice([-2.0, -1.0, 1.0, 2.0])
        d = float(RNG.uniform(0.5, 30.0))
        alpha = float(RNG.uniform(0.05, 1.0))
        scale = float(RNG.uniform(0.2, 5.0))
        tp1 = make_tp(q=q, d_scalar=d, alpha=alpha)
        # same ratio 4 pi |q| / (alpha D), different magnitudes
        tp2 = make_tp(q=q * scale, d_scalar=d * scale, alpha=alpha)
        v1 = predict_velocity(tp1, f)
        v2 = predict_velocity(tp2, f)
        a1 = np.arctan2(v1[1], v1[0])
        a2 = np.arctan2(v2[1], v2[0])
        assert a1 == pytest.approx(a2, abs=1e-12)
        fs = float(RNG.uniform(0.1, 10.0))
        v3 = predict_velocity(tp1, (f[0] * fs, f[1] * fs))
        assert np.arctan2(v3[1], v3[0]) == pytest.approx(a1, abs=1e-12)


def test_hall_angle_limits_and_sign():
    assert skyrmion_hall_angle(make_tp(q=0.0)) == 0.0
    near_pure = skyrmion_hall_angle(make_tp(q=-1.0, d_scalar=1e-6))
    assert abs(abs(near_pure) - np.pi / 2) < 1e-3
    a_minus = skyrmion_hall_angle(make_tp(q=-1.0))
    a_plus = skyrmion_hall_angle(make_tp(q=+1.0))
    assert a_minus == pytest.approx(-a_plus, rel=1e-12)
    assert a_minus > 0    # core-down texture deflects toward +y under +x drive
