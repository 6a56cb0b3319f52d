"""Observables and run classification.

Topological charge uses the lattice solid-angle construction (exact
zero for uniform states, near-integer for closed textures, graceful
degradation at boundaries).  Texture census is connected-component
based: skyrmions are compact reversed-core components, the domain wall
pair (DWP) is the full-track-width reversed domain; one component is
never claimed as both.

Sign convention: the package counts a relaxed skyrmion whose core
points along -z in a +z background as Q = +1.  This is the negative of
the bare integral (1/4pi) int m . (dm/dx x dm/dy), chosen so that the
default seeded textures carry positive charge; callers converting to
the bare/core-up-positive convention must negate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import _kernels
from .model import DrivePulse, GeometryMask, MagnetizationGrid

# Q(core -z in +z sea) = +1; bare solid-angle integral gives -1 for it.
CHARGE_ORIENTATION = -1.0

# Cells this close to an edge are excluded from the charge count: the
# DMI boundary condition tilts the edge band (~1 wall width), and the
# winding of that tilt around the track perimeter carries a spurious
# solid-angle flux of order -(1 - cos(tilt))/2 (~ -0.07 here).
CHARGE_EDGE_MARGIN = 4

PINNED_WINDOW = 30e-9          # DWP midpoint within this of the notch center
TRACK_MATCH_DISTANCE = 30e-9   # per-frame identity matching radius


def topological_charge(state: MagnetizationGrid, g: GeometryMask,
                       margin: int = CHARGE_EDGE_MARGIN) -> float:
    """Lattice topological charge of the interior of the active region.

    Quads with a cell within `margin` cells of an inactive/outside cell
    are skipped; pass margin=0 to count the full active region.
    """
    m = np.ascontiguousarray(state.m)
    if margin > 0:
        counted = ndimage.binary_erosion(g.active, iterations=margin)
    else:
        counted = g.active
    return CHARGE_ORIENTATION * float(
        _kernels.lattice_charge(m, np.ascontiguousarray(counted)))


def _background_sign(m: np.ndarray, active: np.ndarray) -> float:
    mz = m[..., 2][active]
    if mz.size == 0:
        return 1.0
    s = float(np.sign(np.mean(mz)))
    return s if s != 0.0 else 1.0


def _reversed_labels(state: MagnetizationGrid, g: GeometryMask,
                     mz_threshold: float = 0.0):
    """Label map of connected reversed-m_z regions plus the background sign."""
    bg = _background_sign(state.m, g.active)
    rev = g.active & (state.m[..., 2] * bg < -abs(mz_threshold))
    labels, n = ndimage.label(rev)   # 4-connectivity
    return labels, n, bg


def _component_is_full_width(comp: np.ndarray, g: GeometryMask,
                             coverage: float = 0.9) -> bool:
    """True when some column of the component covers (almost) the whole
    active track width there, i.e. the component is a domain, not a core."""
    cols = np.where(comp.any(axis=1))[0]
    for i in cols:
        active_in_col = g.active[i].sum()
        if active_in_col and comp[i].sum() >= coverage * active_in_col:
            return True
    return False


def locate_skyrmions(state: MagnetizationGrid, g: GeometryMask,
                     mz_threshold: float = 0.0, min_area: int = 4):
    """Compact reversed-core textures as (x, y, diameter) tuples [m].

    Excludes full-width components (domains / the DWP) and components
    touching the track x-extremes.  Centers are area centroids,
    diameter is the equal-area circle 2 sqrt(area / pi).
    """
    labels, n, _ = _reversed_labels(state, g, mz_threshold)
    found = []
    for lab in range(1, n + 1):
        comp = labels == lab
        area_cells = int(comp.sum())
        if area_cells < min_area:
            continue
        cols = np.where(comp.any(axis=1))[0]
        if cols[0] == 0 or cols[-1] == g.nx - 1:
            continue
        if _component_is_full_width(comp, g):
            continue
        ii, jj = np.nonzero(comp)
        x = (ii.mean() + 0.5) * g.dx
        y = (jj.mean() + 0.5) * g.dy
        area = area_cells * g.dx * g.dy
        found.append((float(x), float(y), float(2.0 * np.sqrt(area / np.pi))))
    found.sort()
    return found


def dwp_position(state: MagnetizationGrid, g: GeometryMask):
    """(x_left, x_right) of the full-width reversed domain, or None.

    Wall positions are linearly interpolated zero crossings of the
    width-averaged m_z around the domain component.
    """
    labels, n, bg = _reversed_labels(state, g)
    best = None
    best_area = 0
    for lab in range(1, n + 1):
        comp = labels == lab
        cols = np.where(comp.any(axis=1))[0]
        if cols[0] == 0 or cols[-1] == g.nx - 1:
            continue
        if not _component_is_full_width(comp, g):
            continue
        area = int(comp.sum())
        if area > best_area:
            best, best_area = comp, area
    if best is None:
        return None

    counts = g.active.sum(axis=1)
    prof = ((state.m[..., 2] * g.active).sum(axis=1)
            / np.maximum(counts, 1)) * bg
    prof[counts == 0] = 1.0
    cols = np.where(best.any(axis=1))[0]
    xc = g.x_centers()
    i_core = int(cols[np.argmin(prof[cols])])

    def crossing(step: int) -> float:
        i = i_core
        while 0 <= i + step < g.nx and prof[i + step] < 0:
            i += step
        i_out = i + step
        if not 0 <= i_out < g.nx:
            return float(xc[i])               # domain runs to the track end
        p_in, p_out = prof[i], prof[i_out]
        if p_out == p_in:
            return float(xc[i_out])
        frac = -p_in / (p_out - p_in)
        return float(xc[i] + frac * (xc[i_out] - xc[i]))

    return (crossing(-1), crossing(+1))


@dataclass
class Frame:
    """One observer snapshot of the census observables."""

    time: float
    e_total: float
    q: float
    skyrmions: list            # [(x, y, diameter), ...]
    dwp: tuple | None          # (x_left, x_right) or None


@dataclass
class TrajectoryRecord:
    """Everything a pulse run produced that classification needs."""

    frames: list
    initial_state: MagnetizationGrid
    final_state: MagnetizationGrid
    pulse: DrivePulse
    relax_converged: bool = True
    meta: dict = field(default_factory=dict)


@dataclass
class OutcomeRecord:
    outcome: str               # "Pinned" | "Depinned" | "Anomalous"
    final_q: float
    skyrmions_passed: int
    skyrmions_lost: int
    dwp_fate: str              # "Intact" | "ConvertedToMeron" | "Annihilated"
    trajectories: dict = field(default_factory=dict)


def build_tracks(record: TrajectoryRecord,
                 max_jump: float = TRACK_MATCH_DISTANCE) -> dict:
    """Per-texture (x, y) time series by nearest-neighbor frame matching.

    Identity is dropped (track ends) when no detection lies within
    max_jump of the previous position; new detections open new tracks.
    Returns {track_id: [(t, x, y), ...]}.
    """
    tracks: dict[int, list] = {}
    open_tracks: dict[int, tuple] = {}
    next_id = 0
    for fr in record.frames:
        dets = [(x, y) for (x, y, _d) in fr.skyrmions]
        taken = [False] * len(dets)
        still_open = {}
        for tid, (px, py) in open_tracks.items():
            best_k, best_d = -1, max_jump
            for k, (x, y) in enumerate(dets):
                if taken[k]:
                    continue
                d = float(np.hypot(x - px, y - py))
                if d <= best_d:
                    best_k, best_d = k, d
            if best_k >= 0:
                taken[best_k] = True
                x, y = dets[best_k]
                tracks[tid].append((fr.time, x, y))
                still_open[tid] = (x, y)
        for k, (x, y) in enumerate(dets):
            if not taken[k]:
                tracks[next_id] = [(fr.time, x, y)]
                still_open[next_id] = (x, y)
                next_id += 1
        open_tracks = still_open
    return tracks


def _has_meron_remnant(state: MagnetizationGrid, g: GeometryMask,
                       min_area: int = 4) -> bool:
    """A reversed component hanging on the track edge that is neither a
    full-width domain nor a compact interior skyrmion."""
    labels, n, _ = _reversed_labels(state, g)
    for lab in range(1, n + 1):
        comp = labels == lab
        if int(comp.sum()) < min_area:
            continue
        if _component_is_full_width(comp, g):
            continue
        ii, jj = np.nonzero(comp)
        touches_y = jj.min() == 0 or jj.max() == g.ny - 1
        touches_x = ii.min() == 0 or ii.max() == g.nx - 1
        if touches_y or touches_x:
            return True
    return False


def classify_outcome(record: TrajectoryRecord, g: GeometryMask) -> OutcomeRecord:
    """Pinned / Depinned / Anomalous per the DWP end position.

    Pinned: the DWP survives with midpoint within +-30 nm of the notch
    center.  A surviving DWP far from both the notch and its starting
    position is flagged Anomalous rather than silently binned.
    """
    first, last = record.frames[0], record.frames[-1]
    dwp = last.dwp
    n0 = len(first.skyrmions)
    n_end = len(last.skyrmions)
    passed = sum(1 for (x, _y, _d) in last.skyrmions if x > g.notch_center_x)
    lost = n0 - n_end
    final_q = last.q
    tracks = build_tracks(record)

    if dwp is not None:
        mid = 0.5 * (dwp[0] + dwp[1])
        if abs(mid - g.notch_center_x) <= PINNED_WINDOW:
            return OutcomeRecord("Pinned", final_q, passed, lost, "Intact", tracks)
        if first.dwp is not None:
            mid0 = 0.5 * (first.dwp[0] + first.dwp[1])
            if abs(mid - mid0) > PINNED_WINDOW:
                return OutcomeRecord("Anomalous", final_q, passed, lost,
                                     "Intact", tracks)
        return OutcomeRecord("Depinned", final_q, passed, lost, "Intact", tracks)

    fate = ("ConvertedToMeron"
            if _has_meron_remnant(record.final_state, g) else "Annihilated")
    return OutcomeRecord("Depinned", final_q, passed, lost, fate, tracks)


def drift_velocity(track, window) -> tuple[float, float]:
    """Least-squares (vx, vy) [m/s] of one texture track over (t0, t1).

    Raises ValueError when the texture is not tracked across the window.
    """
    t0, t1 = window
    pts = [(t, x, y) for (t, x, y) in track if t0 <= t <= t1]
    if len(pts) < 2:
        raise ValueError(f"texture not tracked over window ({t0}, {t1})")
    ts = np.array([p[0] for p in pts])
    if ts[0] > t0 + 0.2 * (t1 - t0) or ts[-1] < t1 - 0.2 * (t1 - t0):
        raise ValueError("texture lost during the requested window")
    xs = np.array([p[1] for p in pts])
    ys = np.array([p[2] for p in pts])
    vx = np.polyfit(ts, xs, 1)[0]
    vy = np.polyfit(ts, ys, 1)[0]
    return float(vx), float(vy)


def measure_skyrmion(state: MagnetizationGrid, g: GeometryMask):
    """(x, y, diameter) of the largest skyrmion, or None."""
    sk = locate_skyrmions(state, g)
    if not sk:
        return None
    return max(sk, key=lambda s: s[2])
