"""Rigid-texture force balance: spin Hall drive force, dissipative
tensor, gyrovector, and the free-track drift velocity prediction.

The force balance reads

    s * ( G x v  -  alpha D v )  +  F  =  0 ,      G = (0, 0, -4 pi q)

with the drive force |F| = J_hm theta_sh hbar pi b / (2 e) in newtons
and the conversion scale s = mu0 M_s t_film / gamma making the bracket
a force as well.  q is the bare-integral charge convention (isolated
core along +z counts q = +1); textures seeded by this package have
cores along -z, i.e. q = -topological_charge(state) under the package
census convention.

The pinning/interaction potential of the full force balance is not
modeled; predictions are for free-track drift only, which is also why
the simulation comparison carries a generous rigid-texture tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import analysis
from .model import HBAR, MU0, QE, GeometryMask, MagnetizationGrid, MaterialParams


@dataclass(frozen=True)
class ThieleParams:
    """Reduced description of one rigid texture.

    q         topological charge, bare-integral convention
    d_scalar  dissipative tensor scalar (dimensionless)
    b         skyrmion characteristic length (radius) [m]
    alpha     Gilbert damping
    drag      mu0 M_s t_film / gamma [N s / m^2 * m ... = kg/s per unit
              nothing]; converts the dimensionless bracket to newtons
    """

    q: float
    d_scalar: float
    b: float
    alpha: float
    drag: float

    def __post_init__(self):
        if not self.d_scalar > 0:
            raise ValueError(f"d_scalar must be > 0, got {self.d_scalar}")
        if not self.b > 0:
            raise ValueError(f"b must be > 0, got {self.b}")
        if not self.drag > 0:
            raise ValueError(f"drag must be > 0, got {self.drag}")


def drag_scale(p: MaterialParams) -> float:
    """mu0 M_s t_film / gamma, the force unit of the reduced equation."""
    return MU0 * p.m_s * p.t_film / p.gamma


def dissipative_scalar(p: MaterialParams, d_length: float,
                       use_k_eff: bool = False) -> float:
    """pi^2 d / (8 sqrt(A_ex / K_u)).

    The raw K_u enters by default; pass use_k_eff=True for the
    sensitivity variant with the thin-film effective anisotropy.
    """
    if not d_length > 0:
        raise ValueError(f"d_length must be > 0, got {d_length}")
    k = p.k_eff if use_k_eff else p.k_u
    return float(np.pi**2 * d_length / (8.0 * np.sqrt(p.a_ex / k)))


def stt_force(j_hm: float, p: MaterialParams, b: float,
              sigma_hat=(0.0, -1.0, 0.0), charge_sign: float = 1.0):
    """Spin Hall drive force on a rigid texture [N].

    |F| = J_hm theta_sh hbar pi b / (2 e); direction z x sigma with the
    overall sign set by the sign of the topological charge.
    """
    if j_hm < 0:
        raise ValueError(f"j_hm must be >= 0, got {j_hm}")
    mag = j_hm * p.theta_sh * HBAR * np.pi * b / (2.0 * QE)
    sig = np.asarray(sigma_hat, dtype=float)
    direction = np.cross([0.0, 0.0, 1.0], sig)[:2]
    sign = 1.0 if charge_sign >= 0 else -1.0
    return sign * mag * direction


def predict_velocity(tp: ThieleParams, f) -> tuple[float, float]:
    """(vx, vy) [m/s] solving the free-track 2x2 force balance.

    With g = -4 pi q the component equations are
        -g vy - alpha D vx + Fx / s = 0
         g vx - alpha D vy + Fy / s = 0.
    """
    g = -4.0 * np.pi * tp.q
    a = tp.alpha * tp.d_scalar
    det = a * a + g * g
    if det == 0.0:
        raise ValueError("singular force balance: q = 0 and alpha*D = 0")
    fx = f[0] / tp.drag
    fy = f[1] / tp.drag
    vx = (a * fx - g * fy) / det
    vy = (g * fx + a * fy) / det
    return float(vx), float(vy)


def skyrmion_hall_angle(tp: ThieleParams) -> float:
    """Angle [rad] between velocity and a unit drive force along +x."""
    vx, vy = predict_velocity(tp, (tp.drag, 0.0))
    return float(np.arctan2(vy, vx))


def params_from_state(state: MagnetizationGrid, p: MaterialParams,
                      g: GeometryMask) -> ThieleParams:
    """Measure b, d and q of the (single) relaxed skyrmion in `state`.

    The ambiguous length d of the dissipative-tensor formula is taken
    as the measured core diameter (m_z = 0 contour, equal-area circle);
    b is the corresponding radius.
    """
    sk = analysis.measure_skyrmion(state, g)
    if sk is None:
        raise ValueError("no skyrmion found in the state")
    _x, _y, diameter = sk
    q_bare = -analysis.topological_charge(state, g)
    return ThieleParams(
        q=q_bare,
        d_scalar=dissipative_scalar(p, diameter),
        b=diameter / 2.0,
        alpha=p.alpha,
        drag=drag_scale(p),
    )
