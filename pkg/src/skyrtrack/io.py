"""Serialization: OVF 2.0 text snapshots, key=value run configuration,
tidy CSV outputs and the sweep manifest.

Snapshots are plain-text OVF 2.0 with full double precision (17
significant digits), so write -> read round-trips bit-exactly and any
standard micromagnetics viewer can open them.  Config files are flat
`key=value` lines (SI units everywhere); unknown keys are hard errors
with the offending line number.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field, fields as dc_fields
from pathlib import Path

import numpy as np

from .dynamics import IntegratorConfig
from .model import (DrivePulse, GeometryMask, InvariantError,
                    MagnetizationGrid, MaterialParams, build_geometry,
                    default_material)
from .textures import SceneParams


class ConfigError(ValueError):
    """Bad configuration input (maps to CLI exit code 2)."""


def _fmt(x: float) -> str:
    # shortest representation that round-trips the exact double
    return repr(float(x))


def write_snapshot(state: MagnetizationGrid, g: GeometryMask, path,
                   title: str = "m") -> None:
    """OVF 2.0 text snapshot; inactive cells are stored as zero vectors."""
    path = Path(path)
    m = state.m
    lines = [
        "# OOMMF OVF 2.0",
        "# Segment count: 1",
        "# Begin: Segment",
        "# Begin: Header",
        f"# Title: {title}",
        "# meshtype: rectangular",
        "# meshunit: m",
        "# xmin: 0",
        "# ymin: 0",
        "# zmin: 0",
        f"# xmax: {_fmt(g.nx * g.dx)}",
        f"# ymax: {_fmt(g.ny * g.dy)}",
        f"# zmax: {_fmt(g.dz)}",
        "# valuedim: 3",
        "# valuelabels: m_x m_y m_z",
        "# valueunits: 1 1 1",
        f"# Desc: Total simulation time: {_fmt(state.time)} s",
        f"# xbase: {_fmt(g.dx / 2)}",
        f"# ybase: {_fmt(g.dy / 2)}",
        f"# zbase: {_fmt(g.dz / 2)}",
        f"# xnodes: {g.nx}",
        f"# ynodes: {g.ny}",
        "# znodes: 1",
        f"# xstepsize: {_fmt(g.dx)}",
        f"# ystepsize: {_fmt(g.dy)}",
        f"# zstepsize: {_fmt(g.dz)}",
        "# End: Header",
        "# Begin: Data Text",
    ]
    # OVF order: x varies fastest
    for j in range(g.ny):
        for i in range(g.nx):
            lines.append(f"{_fmt(m[i, j, 0])} {_fmt(m[i, j, 1])} {_fmt(m[i, j, 2])}")
    lines += ["# End: Data Text", "# End: Segment", ""]
    try:
        path.write_text("\n".join(lines))
    except OSError as exc:
        raise OSError(f"cannot write snapshot to {path}: {exc}") from exc


def read_snapshot(path):
    """Read an OVF 2.0 text snapshot.

    Returns (state, active, meta): the magnetization grid (time restored
    from the Desc line), the active mask inferred from nonzero vectors,
    and the parsed header fields.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read snapshot from {path}: {exc}") from exc

    meta: dict = {}
    rows: list[tuple[float, float, float]] = []
    in_data = False
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("Begin: Data"):
                in_data = True
            elif body.startswith("End: Data"):
                in_data = False
            elif ":" in body:
                key, _, val = body.partition(":")
                meta[key.strip()] = val.strip()
            continue
        if in_data:
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"{path}: bad data row {line!r}")
            rows.append((float(parts[0]), float(parts[1]), float(parts[2])))

    nx = int(meta["xnodes"])
    ny = int(meta["ynodes"])
    if len(rows) != nx * ny:
        raise ValueError(f"{path}: expected {nx * ny} data rows, got {len(rows)}")
    m = np.zeros((nx, ny, 3))
    k = 0
    for j in range(ny):
        for i in range(nx):
            m[i, j] = rows[k]
            k += 1
    time = 0.0
    desc = meta.get("Desc", "")
    if "simulation time" in desc:
        time = float(desc.rsplit(":", 1)[-1].strip().split()[0])
    active = np.any(m != 0.0, axis=-1)
    return MagnetizationGrid(m=m, time=time), active, meta


# --- run configuration -------------------------------------------------

_F, _I, _B, _S, _LF, _LI = "float", "int", "bool", "str", "float_list", "int_list"

_SCHEMA = {
    # material
    "a_ex": _F, "k_u": _F, "m_s": _F, "dmi_d": _F, "alpha": _F, "beta": _F,
    "theta_sh": _F, "t_film": _F, "gamma": _F, "use_thin_film_demag": _B,
    # geometry
    "nx": _I, "ny": _I, "dx": _F, "dy": _F, "dz": _F,
    "notch_center_x": _F, "notch_length": _F, "notch_depth": _F,
    "notch_side": _S,
    # drive pulse
    "j_hm": _F, "direction": _S, "t_on": _F, "t_off": _F,
    # integrator
    "method": _S, "dt_fixed": _F, "tol_rel": _F, "dt_min": _F, "dt_max": _F,
    # scene
    "n_skyrmions": _I, "skyrmion_spacing": _F, "dwp_offset": _F,
    "dwp_length": _F, "skyrmion_lead": _F, "skyrmion_radius": _F,
    "core_polarity": _I,
    # run control
    "observer_interval": _F, "post_pulse_window": _F, "relax_torque_tol": _F,
    "h_applied_x": _F, "h_applied_y": _F, "h_applied_z": _F,
    # sweeps
    "j_list": _LF, "n_list": _LI,
}


@dataclass
class RunConfig:
    """Full run configuration; defaults are the reference device values."""

    values: dict = field(default_factory=dict)

    @staticmethod
    def defaults() -> dict:
        mat = default_material()
        return {
            "a_ex": mat.a_ex, "k_u": mat.k_u, "m_s": mat.m_s, "dmi_d": mat.dmi_d,
            "alpha": mat.alpha, "beta": mat.beta, "theta_sh": mat.theta_sh,
            "t_film": mat.t_film, "gamma": mat.gamma,
            "use_thin_film_demag": mat.use_thin_film_demag,
            "nx": 255, "ny": 40, "dx": 2e-9, "dy": 2e-9, "dz": 0.4e-9,
            "notch_center_x": 300e-9, "notch_length": 30e-9,
            "notch_depth": 10e-9, "notch_side": "upper",
            "j_hm": 5e10, "direction": "+x", "t_on": 0.0, "t_off": 10e-9,
            "method": "adaptive-RK45", "dt_fixed": 20e-15, "tol_rel": 1e-5,
            "dt_min": 1e-15, "dt_max": 1e-12,
            "n_skyrmions": 0,
            "skyrmion_spacing": SceneParams.skyrmion_spacing,
            "dwp_offset": SceneParams.dwp_offset,
            "dwp_length": SceneParams.dwp_length,
            "skyrmion_lead": SceneParams.skyrmion_lead,
            "skyrmion_radius": SceneParams.skyrmion_radius,
            "core_polarity": SceneParams.core_polarity,
            "observer_interval": 50e-12, "post_pulse_window": 2e-9,
            "relax_torque_tol": 20.0,
            "h_applied_x": 0.0, "h_applied_y": 0.0, "h_applied_z": 0.0,
            "j_list": [5e10, 6e10, 7e10, 8e10, 9e10],
            "n_list": [0, 1, 2, 3, 4, 5],
        }

    def __post_init__(self):
        merged = self.defaults()
        merged.update(self.values)
        self.values = merged
        # fail early on invariant violations
        self.material()
        self.geometry()
        self.pulse()
        self.integrator()

    def __getitem__(self, key):
        return self.values[key]

    def material(self) -> MaterialParams:
        v = self.values
        try:
            return MaterialParams(
                a_ex=v["a_ex"], k_u=v["k_u"], m_s=v["m_s"], dmi_d=v["dmi_d"],
                alpha=v["alpha"], beta=v["beta"], theta_sh=v["theta_sh"],
                t_film=v["t_film"], gamma=v["gamma"],
                use_thin_film_demag=v["use_thin_film_demag"])
        except InvariantError as exc:
            raise ConfigError(str(exc)) from exc

    def geometry(self, with_notch: bool = True) -> GeometryMask:
        v = self.values
        try:
            return build_geometry(
                nx=v["nx"], ny=v["ny"], dx=v["dx"], dy=v["dy"], dz=v["dz"],
                notch_center_x=v["notch_center_x"],
                notch_length=v["notch_length"] if with_notch else 0.0,
                notch_depth=v["notch_depth"] if with_notch else 0.0,
                notch_side=v["notch_side"])
        except InvariantError as exc:
            raise ConfigError(str(exc)) from exc

    def pulse(self, j_hm: float | None = None) -> DrivePulse:
        v = self.values
        try:
            return DrivePulse(j_hm=v["j_hm"] if j_hm is None else j_hm,
                              direction=v["direction"],
                              t_on=v["t_on"], t_off=v["t_off"])
        except InvariantError as exc:
            raise ConfigError(str(exc)) from exc

    def integrator(self) -> IntegratorConfig:
        v = self.values
        try:
            return IntegratorConfig(method=v["method"], dt_fixed=v["dt_fixed"],
                                    tol_rel=v["tol_rel"], dt_min=v["dt_min"],
                                    dt_max=v["dt_max"])
        except InvariantError as exc:
            raise ConfigError(str(exc)) from exc

    def scene(self) -> SceneParams:
        v = self.values
        return SceneParams(dwp_offset=v["dwp_offset"], dwp_length=v["dwp_length"],
                           skyrmion_lead=v["skyrmion_lead"],
                           skyrmion_spacing=v["skyrmion_spacing"],
                           skyrmion_radius=v["skyrmion_radius"],
                           core_polarity=v["core_polarity"])

    def applied(self):
        v = self.values
        return (v["h_applied_x"], v["h_applied_y"], v["h_applied_z"])

    def effective_values(self) -> dict:
        return dict(self.values)

    def config_hash(self) -> str:
        blob = "\n".join(f"{k}={self.values[k]!r}" for k in sorted(self.values))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _parse_value(key: str, raw: str, lineno: int):
    kind = _SCHEMA[key]
    try:
        if kind == _F:
            return float(raw)
        if kind == _I:
            return int(raw)
        if kind == _B:
            low = raw.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if kind == _LF:
            return [float(t) for t in raw.split(",") if t.strip()]
        if kind == _LI:
            return [int(t) for t in raw.split(",") if t.strip()]
        return raw
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: bad value for {key}: {raw!r} ({exc})") from exc


def read_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Parse a key=value config file into a full run configuration.

    Missing keys take the device defaults; unknown keys, malformed
    numbers and invariant violations raise ConfigError with the line
    number.  path=None gives the pure defaults.
    """
    values: dict = {}
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        for lineno, line in enumerate(text.splitlines(), start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
            key, _, raw = body.partition("=")
            key = key.strip()
            raw = raw.strip()
            if key not in _SCHEMA:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            values[key] = _parse_value(key, raw, lineno)
    if overrides:
        for key, val in overrides.items():
            if key not in _SCHEMA:
                raise ConfigError(f"unknown config key {key!r}")
            values[key] = val
    try:
        return RunConfig(values)
    except ConfigError:
        raise
    except InvariantError as exc:
        raise ConfigError(str(exc)) from exc


def write_manifest(cfg: RunConfig, path, extra: dict | None = None) -> None:
    """Echo every effective config value (plus run metadata) to a file."""
    path = Path(path)
    lines = [f"config_hash={cfg.config_hash()}"]
    for key in sorted(cfg.values):
        val = cfg.values[key]
        if isinstance(val, list):
            val = ",".join(str(v) for v in val)
        lines.append(f"{key}={val}")
    for key, val in (extra or {}).items():
        lines.append(f"{key}={val}")
    path.write_text("\n".join(lines) + "\n")


# --- tidy CSV emission --------------------------------------------------

def write_phase_plotdata(entries, path) -> None:
    """Phase diagram rows: j_hm, n_skyrmions, outcome."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["j_hm", "n_skyrmions", "outcome"])
        for e in entries:
            w.writerow([_fmt(e.j_hm), e.n_skyrmions, e.outcome])


def write_velocity_plotdata(rows, path) -> None:
    """Velocity sweep rows: j_hm, v_sk, v_dwp, v_thiele."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["j_hm", "v_sk", "v_dwp", "v_thiele"])
        for r in rows:
            w.writerow([_fmt(r[0]), _fmt(r[1]), _fmt(r[2]), _fmt(r[3])])


def write_outcome_rows(rows, path) -> None:
    """Full OutcomeRecord rows, one line per run."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["j_hm", "n_skyrmions", "outcome", "final_q",
                    "skyrmions_passed", "skyrmions_lost", "dwp_fate"])
        for j_hm, n, rec in rows:
            w.writerow([_fmt(j_hm), n, rec.outcome, _fmt(rec.final_q),
                        rec.skyrmions_passed, rec.skyrmions_lost, rec.dwp_fate])


def write_series(record, path) -> None:
    """Observer time series of one run, one row per frame."""
    n_max = max((len(fr.skyrmions) for fr in record.frames), default=0)
    header = ["time_s", "e_total_J", "Q", "n_skyrmions", "dwp_x_m"]
    for k in range(n_max):
        header += [f"sk{k}_x_m", f"sk{k}_y_m"]
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for fr in record.frames:
            dwp = "" if fr.dwp is None else _fmt(0.5 * (fr.dwp[0] + fr.dwp[1]))
            row = [_fmt(fr.time), _fmt(fr.e_total), _fmt(fr.q),
                   len(fr.skyrmions), dwp]
            for k in range(n_max):
                if k < len(fr.skyrmions):
                    x, y, _d = fr.skyrmions[k]
                    row += [_fmt(x), _fmt(y)]
                else:
                    row += ["", ""]
            w.writerow(row)
