"""Scenario harnesses: single runs, the (current, skyrmion-count) phase
sweep, threshold extraction, the velocity sweep, and the three-input
majority gate.

Sweeps fan independent (j, n) runs out over worker processes, write
rows incrementally and can resume a partial sweep from its output
directory (entries are keyed by the config hash).
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analysis, dynamics, io, textures, thiele
from .analysis import OutcomeRecord, TrajectoryRecord
from .model import uniform_state

BOUNDARY_COLLISION_LIMIT = 9.5e10   # A/m^2, free-skyrmion edge-collision cap


class SweepError(RuntimeError):
    """A sweep-level failure (empty grid, monotonicity violation, ...)."""


class GateError(RuntimeError):
    """The majority gate produced an ambiguous run."""


@dataclass(frozen=True)
class PhaseDiagramEntry:
    j_hm: float
    n_skyrmions: int
    outcome: str                  # Pinned | Depinned | Anomalous
    artifacts_path: str | None = None


@dataclass(frozen=True)
class GateResult:
    a: int
    b: int
    bias: int
    j_hm: float
    dwp_state: str                # "pinned" | "depinned"

    @property
    def out(self) -> int:
        return 1 if self.dwp_state == "depinned" else 0


# per-process cache of relaxed starting scenes, keyed by (hash, n)
_scene_cache: dict = {}


def prepared_scene(cfg: io.RunConfig, n_skyrmions: int):
    key = (cfg.config_hash(), n_skyrmions)
    if key not in _scene_cache:
        state = textures.seed_scene(
            n_skyrmions, cfg.material(), cfg.geometry(), cfg.scene(),
            relax_torque_tol=cfg["relax_torque_tol"], config=cfg.integrator())
        _scene_cache[key] = state
    return _scene_cache[key].copy()


def run_scenario(cfg: io.RunConfig, n_skyrmions: int, j_hm: float,
                 observers=None) -> tuple[OutcomeRecord, TrajectoryRecord]:
    """Seed scene -> pulse -> classify, with the configured geometry."""
    g = cfg.geometry()
    state = prepared_scene(cfg, n_skyrmions)
    record = dynamics.run_pulse(
        state, cfg.pulse(j_hm), cfg.integrator(), cfg.material(), g,
        observers=observers,
        observer_interval=cfg["observer_interval"],
        post_pulse_window=cfg["post_pulse_window"],
        relax_torque_tol=cfg["relax_torque_tol"],
        applied=cfg.applied())
    return analysis.classify_outcome(record, g), record


def _phase_cell(args) -> tuple[float, int, str, OutcomeRecord | None]:
    cfg_values, j, n = args
    cfg = io.RunConfig(dict(cfg_values))
    try:
        rec, _traj = run_scenario(cfg, n, j)
        return (j, n, rec.outcome, rec)
    except Exception:
        return (j, n, "Anomalous", None)


def _load_done(path: Path, want_hash: str) -> dict:
    done = {}
    if not path.exists():
        return done
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            if row.get("config_hash") != want_hash:
                continue
            key = (float(row["j_hm"]), int(row["n_skyrmions"]))
            done[key] = row["outcome"]
    return done


def check_phase_monotonicity(entries) -> list[str]:
    """Staircase structure: more skyrmions or more current never turns a
    depinned cell back into a pinned one.  Returns violation messages."""
    by = {(e.j_hm, e.n_skyrmions): e.outcome for e in entries}
    js = sorted({e.j_hm for e in entries})
    ns = sorted({e.n_skyrmions for e in entries})
    bad = []
    for j in js:
        for a, b in zip(ns, ns[1:]):
            if by.get((j, a)) == "Depinned" and by.get((j, b)) == "Pinned":
                bad.append(f"j={j:g}: n={a} Depinned but n={b} Pinned")
    for n in ns:
        for a, b in zip(js, js[1:]):
            if by.get((a, n)) == "Depinned" and by.get((b, n)) == "Pinned":
                bad.append(f"n={n}: j={a:g} Depinned but j={b:g} Pinned")
    return bad


def sweep_phase(j_list, n_list, cfg: io.RunConfig, out_dir=None,
                workers: int = 1, enforce_monotonicity: bool = True,
                progress=None) -> list[PhaseDiagramEntry]:
    """Classify every (j, n) cell of the pin/depin phase diagram.

    Rows are appended to <out_dir>/phase_entries.csv as they finish, so
    an interrupted sweep resumes instead of recomputing.  Individual
    run failures are recorded as Anomalous and do not stop the sweep.
    """
    j_list = list(j_list)
    n_list = list(n_list)
    if not j_list or not n_list:
        raise SweepError("sweep grid is empty (no currents or no counts)")
    for j in j_list:
        if j >= BOUNDARY_COLLISION_LIMIT:
            raise SweepError(
                f"j={j:g} A/m^2 is at or above the boundary-collision limit "
                f"{BOUNDARY_COLLISION_LIMIT:g}")

    want_hash = cfg.config_hash()
    entries_path = None
    done: dict = {}
    outcomes: dict = {}
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        entries_path = out_dir / "phase_entries.csv"
        done = _load_done(entries_path, want_hash)
        io.write_manifest(cfg, out_dir / "manifest.txt",
                          extra={"sweep": "phase",
                                 "j_list": ",".join(f"{j:g}" for j in j_list),
                                 "n_list": ",".join(str(n) for n in n_list)})

    todo = [(j, n) for n in n_list for j in j_list if (j, n) not in done]
    results = {k: v for k, v in done.items()}

    def record_row(j, n, outcome):
        results[(j, n)] = outcome
        if entries_path is not None:
            new_file = not entries_path.exists()
            with open(entries_path, "a", newline="") as f:
                w = csv.writer(f)
                if new_file:
                    w.writerow(["config_hash", "j_hm", "n_skyrmions", "outcome",
                                "final_q", "skyrmions_passed", "skyrmions_lost",
                                "dwp_fate"])
                w.writerow([want_hash, f"{j:.17g}", n] + _outcome_cols(j, n))
        if progress:
            progress(j, n, outcome)

    def _outcome_cols(j, n):
        rec = outcomes.get((j, n))
        if rec is None:
            return ["Anomalous", "", "", "", ""]
        return [rec.outcome, f"{rec.final_q:.6g}", rec.skyrmions_passed,
                rec.skyrmions_lost, rec.dwp_fate]

    if workers > 1 and len(todo) > 1:
        args = [(cfg.effective_values(), j, n) for (j, n) in todo]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for j, n, outcome, rec in pool.map(_phase_cell, args):
                if rec is not None:
                    outcomes[(j, n)] = rec
                record_row(j, n, outcome)
    else:
        for j, n in todo:
            j2, n2, outcome, rec = _phase_cell((cfg.effective_values(), j, n))
            if rec is not None:
                outcomes[(j2, n2)] = rec
            record_row(j2, n2, outcome)

    entries = [PhaseDiagramEntry(j, n, results[(j, n)],
                                 str(entries_path) if entries_path else None)
               for n in n_list for j in j_list]
    if out_dir is not None:
        io.write_phase_plotdata(entries, Path(out_dir) / "phase_plotdata.csv")
        rows = [(j, n, outcomes[(j, n)]) for (j, n) in outcomes]
        io.write_outcome_rows(rows, Path(out_dir) / "phase_outcomes.csv")
    if enforce_monotonicity:
        bad = check_phase_monotonicity(entries)
        if bad:
            raise SweepError("phase diagram monotonicity violated: "
                             + "; ".join(bad))
    return entries


def threshold_number(j_hm: float, cfg: io.RunConfig, n_max: int = 5,
                     entries=None) -> int | None:
    """Smallest skyrmion count that depins the DWP at this current.

    Reuses sweep entries when given; otherwise runs counts 0..n_max in
    order.  An Anomalous run sitting exactly on the boundary makes the
    threshold undecidable and raises.
    """
    known = {}
    if entries:
        known = {e.n_skyrmions: e.outcome for e in entries
                 if e.j_hm == j_hm and e.n_skyrmions <= n_max}
    for n in range(0, n_max + 1):
        outcome = known.get(n)
        if outcome is None:
            rec, _ = run_scenario(cfg, n, j_hm)
            outcome = rec.outcome
        if outcome == "Depinned":
            return n
        if outcome == "Anomalous":
            raise SweepError(
                f"threshold search at j={j_hm:g} hit an Anomalous run at "
                f"n={n}; manual review required")
    return None


# --- velocity sweep -----------------------------------------------------

_EDGE_MARGIN = 24e-9      # texture must stay this clear of edges to count
_RIGHT_MARGIN = 60e-9


def _free_window(track, g, t_hi):
    """Largest early time window where the texture is clear of all edges."""
    ts = []
    for (t, x, y) in track:
        if t > t_hi:
            break
        if (_EDGE_MARGIN < y < g.width - _EDGE_MARGIN
                and _EDGE_MARGIN < x < g.length - _RIGHT_MARGIN):
            ts.append(t)
        else:
            if ts:
                break
    return (ts[0], ts[-1]) if len(ts) >= 2 else None


def skyrmion_velocity(cfg: io.RunConfig, j_hm: float, start=None,
                      max_window: float = 6e-9):
    """Free-track single-skyrmion drift (vx, vy) plus the fitted window.

    Measured while the skyrmion is still clear of every edge, i.e. in
    the free-drift phase the rigid-texture model describes.
    """
    p = cfg.material()
    g = cfg.geometry(with_notch=False)
    if start is None:
        start = (80e-9, 0.5 * g.width)
    state = uniform_state(g, (0, 0, -cfg["core_polarity"]))
    textures.seed_skyrmion(state, start, cfg["skyrmion_radius"],
                           cfg["core_polarity"], p, g)
    res = dynamics.relax(state, p, g, torque_tol=cfg["relax_torque_tol"],
                         config=cfg.integrator())
    record = dynamics.run_pulse(
        res.state, cfg.pulse(j_hm), cfg.integrator(), p, g,
        observer_interval=cfg["observer_interval"],
        post_pulse_window=0.0, relax_after=False, applied=cfg.applied())
    tracks = analysis.build_tracks(record)
    if not tracks:
        raise SweepError(f"skyrmion lost immediately at j={j_hm:g}")
    track = max(tracks.values(), key=len)
    window = _free_window(track, g, min(max_window, cfg.pulse(j_hm).t_off))
    if window is None or window[1] - window[0] < 0.5e-9:
        raise SweepError(f"no usable free-drift window at j={j_hm:g}")
    vx, vy = analysis.drift_velocity(track, window)
    return (vx, vy), window, res.state


def dwp_velocity(cfg: io.RunConfig, j_hm: float, start_x: float = 120e-9,
                 length: float | None = None):
    """Free-track DWP drift vx from the domain midpoint trajectory."""
    p = cfg.material()
    g = cfg.geometry(with_notch=False)
    length = cfg["dwp_length"] if length is None else length
    state = uniform_state(g, (0, 0, -cfg["core_polarity"]))
    textures.seed_domain_wall_pair(state, start_x, start_x + length, p, g)
    res = dynamics.relax(state, p, g, torque_tol=cfg["relax_torque_tol"],
                         config=cfg.integrator())
    record = dynamics.run_pulse(
        res.state, cfg.pulse(j_hm), cfg.integrator(), p, g,
        observer_interval=cfg["observer_interval"],
        post_pulse_window=0.0, relax_after=False, applied=cfg.applied())
    pts = [(fr.time, 0.5 * (fr.dwp[0] + fr.dwp[1]))
           for fr in record.frames
           if fr.dwp is not None
           and fr.dwp[1] < g.length - _RIGHT_MARGIN]
    if len(pts) < 3:
        raise SweepError(f"DWP lost too early at j={j_hm:g}")
    ts = np.array([t for t, _ in pts])
    xs = np.array([x for _, x in pts])
    return float(np.polyfit(ts, xs, 1)[0])


def sweep_velocity(j_list, cfg: io.RunConfig, out_dir=None):
    """(j, v_skyrmion, v_dwp, v_thiele) rows over the current list."""
    j_list = list(j_list)
    if not j_list:
        raise SweepError("velocity sweep needs at least one current")
    rows = []
    p = cfg.material()
    for j in j_list:
        if j == 0.0:
            rows.append((0.0, 0.0, 0.0, 0.0))
            continue
        (vx, vy), _window, relaxed = skyrmion_velocity(cfg, j)
        g_free = cfg.geometry(with_notch=False)
        tp = thiele.params_from_state(relaxed, p, g_free)
        force = thiele.stt_force(j, p, tp.b,
                                 sigma_hat=cfg.pulse(j).sigma_hat,
                                 charge_sign=tp.q)
        v_pred = thiele.predict_velocity(tp, force)
        v_th = float(np.hypot(*v_pred))
        v_dwp = dwp_velocity(cfg, j)
        rows.append((j, float(np.hypot(vx, vy)), v_dwp, v_th))
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        io.write_velocity_plotdata(rows, out_dir / "velocity_plotdata.csv")
        io.write_manifest(cfg, out_dir / "manifest.txt",
                          extra={"sweep": "velocity"})
    return rows


# --- majority gate ------------------------------------------------------

def gate_lanes(cfg: io.RunConfig) -> list[float]:
    """x positions of the three input lanes (A, B, bias)."""
    scene = cfg.scene()
    g = cfg.geometry()
    dwp_left = g.notch_center_x + scene.dwp_offset
    return [dwp_left - scene.skyrmion_lead - i * scene.skyrmion_spacing
            for i in range(3)]


def seed_gate_scene(bits, cfg: io.RunConfig):
    """DWP plus one skyrmion per set input bit, relaxed."""
    p = cfg.material()
    g = cfg.geometry()
    scene = cfg.scene()
    dwp_left = g.notch_center_x + scene.dwp_offset
    state = uniform_state(g, (0, 0, -scene.core_polarity))
    textures.seed_domain_wall_pair(state, dwp_left,
                                   dwp_left + scene.dwp_length, p, g)
    lanes = gate_lanes(cfg)
    for bit, x in zip(bits, lanes):
        if bit:
            textures.seed_skyrmion(state, (x, 0.5 * g.width),
                                   scene.skyrmion_radius,
                                   scene.core_polarity, p, g)
    res = dynamics.relax(state, p, g, torque_tol=cfg["relax_torque_tol"],
                         config=cfg.integrator())
    if not res.converged:
        raise GateError("gate scene relaxation did not converge")
    n_expect = sum(1 for b in bits if b)
    sk = analysis.locate_skyrmions(res.state, g)
    if len(sk) != n_expect:
        raise GateError(f"gate scene has {len(sk)} skyrmions, expected {n_expect}")
    return res.state


def majority_gate(a: int, b: int, bias: int, j_hm: float,
                  cfg: io.RunConfig) -> GateResult:
    """One gate evaluation: inputs are skyrmion presence, output is the
    DWP state after the pulse (depinned = logic 1)."""
    bits = (1 if a else 0, 1 if b else 0, 1 if bias else 0)
    g = cfg.geometry()
    state = seed_gate_scene(bits, cfg)
    record = dynamics.run_pulse(
        state, cfg.pulse(j_hm), cfg.integrator(), cfg.material(), g,
        observer_interval=cfg["observer_interval"],
        post_pulse_window=cfg["post_pulse_window"],
        relax_torque_tol=cfg["relax_torque_tol"],
        applied=cfg.applied())
    rec = analysis.classify_outcome(record, g)
    if rec.outcome == "Anomalous":
        raise GateError(
            f"gate run ({bits[0]}, {bits[1]}, {bits[2]}) at j={j_hm:g} "
            f"classified Anomalous; manual review required")
    dwp_state = "pinned" if rec.outcome == "Pinned" else "depinned"
    return GateResult(a=bits[0], b=bits[1], bias=bits[2], j_hm=j_hm,
                      dwp_state=dwp_state)


def write_gate_rows(results, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["a", "b", "bias", "j_hm", "dwp_state", "out"])
        for r in results:
            w.writerow([r.a, r.b, r.bias, f"{r.j_hm:.17g}", r.dwp_state, r.out])
