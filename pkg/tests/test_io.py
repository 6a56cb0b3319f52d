import numpy as np
import pytest

from skyrtrack import io
from skyrtrack.analysis import Frame, TrajectoryRecord
from skyrtrack.experiments import PhaseDiagramEntry
from skyrtrack.model import DrivePulse, build_default_track, build_geometry, uniform_state


def test_ovf_round_trip_bitwise(tmp_path):
    _, g = build_default_track()
    rng = np.random.default_rng(11)
    s = uniform_state(g)
    m = rng.normal(size=s.m.shape)
    m /= np.linalg.norm(m, axis=-1, keepdims=True)
    m[~g.active] = 0.0
    s.m[...] = m
    s.time = 3.14159e-9
    path = tmp_path / "state.ovf"
    io.write_snapshot(s, g, path)
    s2, active, meta = io.read_snapshot(path)
    assert np.array_equal(s.m, s2.m)          # bitwise
    assert s2.time == s.time
    assert np.array_equal(active, g.active)   # notch cells restored inactive


def test_ovf_header_mesh_metadata(tmp_path):
    _, g = build_default_track()
    path = tmp_path / "u.ovf"
    io.write_snapshot(uniform_state(g), g, path)
    text = path.read_text()
    assert "# xnodes: 255" in text
    assert "# ynodes: 40" in text
    assert "# xstepsize: 2e-09" in text
    assert text.startswith("# OOMMF OVF 2.0")


def test_ovf_write_error_has_path():
    _, g = build_default_track()
    with pytest.raises(OSError, match="no/such/dir"):
        io.write_snapshot(uniform_state(g), g, "/no/such/dir/x.ovf")


def test_config_empty_gives_defaults(tmp_path):
    path = tmp_path / "empty.cfg"
    path.write_text("")
    cfg = io.read_config(path)
    p = cfg.material()
    assert p.a_ex == 1.5e-11
    assert p.alpha == 0.3
    g = cfg.geometry()
    assert (g.nx, g.ny) == (255, 40)
    assert cfg.pulse().j_hm == 5e10


def test_config_invariant_violation_names_field(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("alpha=1.5\n")
    with pytest.raises(io.ConfigError, match="alpha"):
        io.read_config(path)


def test_config_unknown_key_line_number(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("a_ex=1e-11\nnot_a_key=3\n")
    with pytest.raises(io.ConfigError, match="line 2"):
        io.read_config(path)


def test_config_malformed_number(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("m_s=fast\n")
    with pytest.raises(io.ConfigError, match="line 1"):
        io.read_config(path)


def test_config_threads_through_to_pulse(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("j_hm=8e10\ndirection=-x\nt_off=5e-9\n")
    pulse = io.read_config(path).pulse()
    assert pulse == DrivePulse(j_hm=8e10, direction="-x", t_on=0.0, t_off=5e-9)


def test_config_lists_and_comments(tmp_path):
    path = tmp_path / "sweep.cfg"
    path.write_text("# comment line\nj_list=5e10, 6e10,7e10\nn_list=0,1,2\n")
    cfg = io.read_config(path)
    assert cfg["j_list"] == [5e10, 6e10, 7e10]
    assert cfg["n_list"] == [0, 1, 2]


def test_manifest_echoes_every_value(tmp_path):
    cfg = io.read_config(None)
    path = tmp_path / "manifest.txt"
    io.write_manifest(cfg, path, extra={"command": "test"})
    text = path.read_text()
    for key in cfg.values:
        assert f"{key}=" in text
    assert "config_hash=" in text
    assert "command=test" in text


def test_phase_plotdata_schema(tmp_path):
    entries = [PhaseDiagramEntry(5e10, 2, "Pinned"),
               PhaseDiagramEntry(6e10, 2, "Depinned")]
    path = tmp_path / "phase.csv"
    io.write_phase_plotdata(entries, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "j_hm,n_skyrmions,outcome"
    assert lines[1].endswith("Pinned")
    assert len(lines) == 3


def test_velocity_plotdata_schema_and_empty(tmp_path):
    path = tmp_path / "v.csv"
    io.write_velocity_plotdata([], path)
    assert path.read_text().strip() == "j_hm,v_sk,v_dwp,v_thiele"
    io.write_velocity_plotdata([(5e10, 60.0, 80.0, 58.0)], path)
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 2


def test_series_schema(tmp_path):
    g = build_geometry(nx=8, ny=4, notch_length=0)
    s = uniform_state(g)
    frames = [
        Frame(time=0.0, e_total=1e-19, q=1.0,
              skyrmions=[(1e-8, 2e-8, 1.5e-8)], dwp=(3e-8, 5e-8)),
        Frame(time=5e-11, e_total=9e-20, q=0.0, skyrmions=[], dwp=None),
    ]
    rec = TrajectoryRecord(frames=frames, initial_state=s, final_state=s,
                           pulse=DrivePulse(j_hm=1e10))
    path = tmp_path / "series.csv"
    io.write_series(rec, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "time_s,e_total_J,Q,n_skyrmions,dwp_x_m,sk0_x_m,sk0_y_m"
    assert lines[2].split(",")[4] == ""       # dwp absent -> blank
