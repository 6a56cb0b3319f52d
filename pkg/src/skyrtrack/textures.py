"""Analytic initial textures: Neel skyrmions, domain wall pairs, and
the multi-skyrmion + DWP starting scenes.

Seeding replaces physical nucleation; every seeded texture is meant to
be relaxed before use.  Wall profiles are tanh with the material wall
width sqrt(A / K_eff); in-plane components are radial (skyrmion) or
along x (walls) with the chirality chosen by evaluating the DMI energy
of both candidates and keeping the lower one, so the seeds always
match the sign of the DMI constant.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import dynamics, fields
from .analysis import dwp_position, locate_skyrmions
from .model import GeometryMask, InvariantError, MagnetizationGrid, MaterialParams


class SceneError(RuntimeError):
    """A seeded scene failed during construction or relaxation."""


def _background_sign(state: MagnetizationGrid, g: GeometryMask) -> float:
    mz = state.m[..., 2][g.active]
    s = float(np.sign(mz.mean())) if mz.size else 1.0
    return s if s != 0.0 else 1.0


def seed_skyrmion(state: MagnetizationGrid, center, radius: float,
                  core_polarity: int, p: MaterialParams,
                  g: GeometryMask) -> MagnetizationGrid:
    """Write a 360-degree-wall Neel skyrmion ansatz in place.

    m_z runs from core_polarity at the center to the (opposite)
    background; the in-plane part points radially with the
    DMI-preferred chirality.  Caller must relax() afterwards.
    """
    x0, y0 = center
    pol = 1 if core_polarity > 0 else -1
    half_width = 0.5 * g.width
    if radius <= 0:
        raise InvariantError("skyrmion radius must be > 0")
    if radius >= half_width:
        raise InvariantError(
            f"radius {radius:g} m does not fit the half track width {half_width:g} m")

    xg, yg = np.meshgrid(g.x_centers(), g.y_centers(), indexing="ij")
    r = np.hypot(xg - x0, yg - y0)
    if np.any((r <= radius) & ~g.active):
        raise InvariantError("seed circle overlaps inactive cells")
    bg = _background_sign(state, g)
    if bg == pol:
        raise InvariantError(
            "core polarity equals the local background; seed would be invisible")

    delta = p.wall_width
    cutoff = radius + 4.0 * delta
    write = g.active & (r < cutoff)

    prof = np.tanh((radius - r) / delta) + np.tanh((radius + r) / delta) - 1.0
    mz = pol * prof
    s = np.sqrt(np.clip(1.0 - mz**2, 0.0, None))
    rr = np.where(r > 0, r, 1.0)
    ex = (xg - x0) / rr
    ey = (yg - y0) / rr

    best = None
    best_e = np.inf
    for chi in (+1.0, -1.0):
        cand = state.m.copy()
        cand[write, 0] = chi * (s * ex)[write]
        cand[write, 1] = chi * (s * ey)[write]
        cand[write, 2] = mz[write]
        e = fields.total_energy(MagnetizationGrid(cand, state.time), p, g)
        e_probe = e.e_dmi + e.e_exchange
        if e_probe < best_e:
            best, best_e = cand, e_probe
    state.m[...] = best
    return state


def seed_domain_wall_pair(state: MagnetizationGrid, x_left: float,
                          x_right: float, p: MaterialParams,
                          g: GeometryMask) -> MagnetizationGrid:
    """Write a reversed domain spanning the track width, walls at
    x_left / x_right, Neel in-plane components of DMI-preferred
    chirality at both walls.  Caller must relax() afterwards.
    """
    if not 0 < x_left < x_right < g.length:
        raise InvariantError(
            f"need 0 < x_left < x_right < {g.length:g}, got ({x_left:g}, {x_right:g})")
    if g.notch_length > 0 and g.notch_depth > 0:
        lo = g.notch_center_x - g.notch_length / 2 - 20e-9
        hi = g.notch_center_x + g.notch_length / 2 + 20e-9
        for xw in (x_left, x_right):
            if lo < xw < hi:
                raise InvariantError(
                    f"wall at {xw:g} m overlaps the notch region ({lo:g}, {hi:g})")
    delta = p.wall_width
    if x_right - x_left < 2.0 * delta:
        warnings.warn(
            f"wall separation {x_right - x_left:g} m is below two wall widths "
            f"({2 * delta:g} m); the pair will likely annihilate during relaxation",
            stacklevel=2)

    bg = _background_sign(state, g)
    xg = g.x_centers()[:, None] * np.ones((1, g.ny))
    mz = bg * (1.0 - np.tanh((xg - x_left) / delta) + np.tanh((xg - x_right) / delta))
    mz = np.clip(mz, -1.0, 1.0)
    s = np.sqrt(np.clip(1.0 - mz**2, 0.0, None))
    x_mid = 0.5 * (x_left + x_right)
    left_half = xg < x_mid

    best = None
    best_e = np.inf
    for c_left in (+1.0, -1.0):
        for c_right in (+1.0, -1.0):
            cand = state.m.copy()
            mx = np.where(left_half, c_left * s, c_right * s)
            cand[g.active, 0] = mx[g.active]
            cand[g.active, 1] = 0.0
            cand[g.active, 2] = mz[g.active]
            e = fields.total_energy(MagnetizationGrid(cand, state.time), p, g)
            e_probe = e.e_dmi + e.e_exchange
            if e_probe < best_e:
                best, best_e = cand, e_probe
    state.m[...] = best
    return state


@dataclass(frozen=True)
class SceneParams:
    """Default placement of the starting scene (all config-exposed).

    The DWP sits just left of the notch; skyrmions queue in a single
    row further left on the track centerline.  Offsets are chosen so
    that up to five skyrmions fit the default 510 nm track.
    """

    dwp_offset: float = -80e-9        # DWP left wall relative to notch center
    dwp_length: float = 40e-9         # reversed domain length
    skyrmion_lead: float = 40e-9      # first skyrmion left of the DWP left wall
    skyrmion_spacing: float = 36e-9   # center-to-center
    skyrmion_radius: float = 10e-9    # seed radius (relaxation sets the size)
    core_polarity: int = -1           # cores against the +z background
    edge_margin: float = 18e-9        # minimum seed center distance to x = 0


def seed_scene(n_skyrmions: int, p: MaterialParams, g: GeometryMask,
               scene: SceneParams | None = None, *,
               relax_torque_tol: float = dynamics.DEFAULT_RELAX_TOL,
               config: dynamics.IntegratorConfig | None = None) -> MagnetizationGrid:
    """DWP near the notch plus n skyrmions queued to its left, relaxed.

    Raises SceneError when the requested count does not fit the track
    or the relaxed census does not match what was seeded.
    """
    from .model import uniform_state

    scene = scene or SceneParams()
    if not 0 <= n_skyrmions <= 5:
        raise InvariantError(f"n_skyrmions must be in 0..5, got {n_skyrmions}")

    dwp_left = g.notch_center_x + scene.dwp_offset
    dwp_right = dwp_left + scene.dwp_length
    y_mid = 0.5 * g.width
    slots = [dwp_left - scene.skyrmion_lead - i * scene.skyrmion_spacing
             for i in range(n_skyrmions)]
    if slots and slots[-1] < scene.edge_margin:
        raise SceneError(
            f"{n_skyrmions} skyrmions at {scene.skyrmion_spacing:g} m spacing "
            f"do not fit left of the DWP (last slot {slots[-1]:g} m)")

    state = uniform_state(g, (0, 0, -scene.core_polarity))
    seed_domain_wall_pair(state, dwp_left, dwp_right, p, g)
    for x in slots:
        seed_skyrmion(state, (x, y_mid), scene.skyrmion_radius,
                      scene.core_polarity, p, g)

    res = dynamics.relax(state, p, g, torque_tol=relax_torque_tol, config=config)
    if not res.converged:
        raise SceneError(
            f"scene relaxation did not converge (residual {res.residual_torque:g} A/m)")
    state = res.state

    sk = locate_skyrmions(state, g)
    if len(sk) != n_skyrmions:
        raise SceneError(
            f"relaxed scene has {len(sk)} skyrmions, expected {n_skyrmions}")
    if dwp_position(state, g) is None:
        raise SceneError("relaxed scene lost the domain wall pair")
    return state
