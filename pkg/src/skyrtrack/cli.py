"""Command line front end.

Subcommands: relax, run, sweep-phase, sweep-velocity, gate, thiele.
Exit codes: 0 success, 1 scenario failure, 2 configuration/usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import analysis, dynamics, experiments, io, textures, thiele
from .model import InvariantError, uniform_state


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="skyrtrack",
        description="current-driven skyrmion / domain-wall-pair racetrack runs")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, current=True, skyrmions=True):
        sp.add_argument("--config", type=Path, default=None,
                        help="key=value config file (defaults: reference device)")
        sp.add_argument("--out", type=Path, default=None,
                        help="output directory for CSV / OVF artifacts")
        if current:
            sp.add_argument("--current", type=float, default=None,
                            help="heavy-metal current density [A/m^2]")
        if skyrmions:
            sp.add_argument("--skyrmions", type=int, default=None,
                            help="number of seeded skyrmions")

    sp = sub.add_parser("relax", help="seed the configured scene and relax it")
    common(sp, current=False)

    sp = sub.add_parser("run", help="one pulse run, classified")
    common(sp)
    sp.add_argument("--snapshot-every", type=float, default=None, metavar="PS",
                    help="write an OVF snapshot every PS picoseconds")

    sp = sub.add_parser("sweep-phase", help="pin/depin phase diagram sweep")
    common(sp, current=False, skyrmions=False)
    sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("sweep-velocity", help="drift velocity vs current")
    common(sp, current=False, skyrmions=False)

    sp = sub.add_parser("gate", help="three-input majority gate evaluation")
    common(sp, skyrmions=False)
    sp.add_argument("--inputs", type=str, default="000", metavar="ABbias",
                    help="three bits, e.g. 110")

    sp = sub.add_parser("thiele", help="measure a relaxed skyrmion and predict v")
    common(sp, skyrmions=False)
    return ap


def _outdir(args) -> Path | None:
    if args.out is None:
        return None
    args.out.mkdir(parents=True, exist_ok=True)
    return args.out


def _cmd_relax(args, cfg) -> int:
    n = cfg["n_skyrmions"] if args.skyrmions is None else args.skyrmions
    g = cfg.geometry()
    state = textures.seed_scene(n, cfg.material(), g, cfg.scene(),
                                relax_torque_tol=cfg["relax_torque_tol"],
                                config=cfg.integrator())
    q = analysis.topological_charge(state, g)
    sk = analysis.locate_skyrmions(state, g)
    dwp = analysis.dwp_position(state, g)
    print(f"relaxed scene: n_skyrmions={len(sk)} Q={q:.3f} "
          f"dwp={'none' if dwp is None else f'({dwp[0]:.3g}, {dwp[1]:.3g}) m'}")
    out = _outdir(args)
    if out is not None:
        io.write_snapshot(state, g, out / "relaxed.ovf")
        io.write_manifest(cfg, out / "manifest.txt", extra={"command": "relax"})
    return 0


def _cmd_run(args, cfg) -> int:
    n = cfg["n_skyrmions"] if args.skyrmions is None else args.skyrmions
    j = cfg["j_hm"] if args.current is None else args.current
    out = _outdir(args)
    observers = None
    if out is not None and args.snapshot_every is not None:
        g = cfg.geometry()
        snap_dt = args.snapshot_every * 1e-12
        written = {"last": -np.inf, "idx": 0}

        def snapshot(state, geom):
            if state.time - written["last"] >= snap_dt - 1e-15:
                io.write_snapshot(state, geom,
                                  out / f"snap_{written['idx']:05d}.ovf")
                written["last"] = state.time
                written["idx"] += 1

        observers = [snapshot]
    rec, traj = experiments.run_scenario(cfg, n, j, observers=observers)
    print(f"outcome={rec.outcome} final_q={rec.final_q:.3f} "
          f"passed={rec.skyrmions_passed} lost={rec.skyrmions_lost} "
          f"dwp_fate={rec.dwp_fate}")
    if out is not None:
        io.write_series(traj, out / "series.csv")
        io.write_outcome_rows([(j, n, rec)], out / "outcome.csv")
        io.write_manifest(cfg, out / "manifest.txt",
                          extra={"command": "run", "j_hm": j, "n_skyrmions": n})
    return 0


def _cmd_sweep_phase(args, cfg) -> int:
    j_list = cfg["j_list"]
    n_list = cfg["n_list"]
    if not j_list or not n_list:
        raise io.ConfigError("sweep-phase needs non-empty j_list and n_list")
    entries = experiments.sweep_phase(j_list, n_list, cfg, out_dir=args.out,
                                      workers=args.workers)
    for e in entries:
        print(f"j={e.j_hm:g} n={e.n_skyrmions} {e.outcome}")
    return 0


def _cmd_sweep_velocity(args, cfg) -> int:
    j_list = cfg["j_list"]
    if not j_list:
        raise io.ConfigError("sweep-velocity needs a non-empty j_list")
    rows = experiments.sweep_velocity(j_list, cfg, out_dir=args.out)
    for j, v_sk, v_dwp, v_th in rows:
        print(f"j={j:g} v_sk={v_sk:.3f} v_dwp={v_dwp:.3f} v_thiele={v_th:.3f}")
    return 0


def _cmd_gate(args, cfg) -> int:
    bits = args.inputs.strip()
    if len(bits) != 3 or any(c not in "01" for c in bits):
        raise io.ConfigError(f"--inputs must be three bits, got {args.inputs!r}")
    j = 8e10 if args.current is None else args.current
    result = experiments.majority_gate(int(bits[0]), int(bits[1]), int(bits[2]),
                                       j, cfg)
    print(f"out={result.out}")
    out = _outdir(args)
    if out is not None:
        experiments.write_gate_rows([result], out / "gate.csv")
        io.write_manifest(cfg, out / "manifest.txt",
                          extra={"command": "gate", "inputs": bits, "j_hm": j})
    return 0


def _cmd_thiele(args, cfg) -> int:
    p = cfg.material()
    g = cfg.geometry(with_notch=False)
    state = uniform_state(g, (0, 0, -cfg["core_polarity"]))
    textures.seed_skyrmion(state, (0.5 * g.length, 0.5 * g.width),
                           cfg["skyrmion_radius"], cfg["core_polarity"], p, g)
    res = dynamics.relax(state, p, g, torque_tol=cfg["relax_torque_tol"],
                         config=cfg.integrator())
    tp = thiele.params_from_state(res.state, p, g)
    j = cfg["j_hm"] if args.current is None else args.current
    force = thiele.stt_force(j, p, tp.b, sigma_hat=cfg.pulse(j).sigma_hat,
                             charge_sign=tp.q)
    vx, vy = thiele.predict_velocity(tp, force)
    angle = thiele.skyrmion_hall_angle(tp)
    print(f"b={tp.b:.3g} m  d_scalar={tp.d_scalar:.3f}  q={tp.q:.3f}")
    print(f"j={j:g} A/m^2  F=({force[0]:.3g}, {force[1]:.3g}) N")
    print(f"v_pred=({vx:.3f}, {vy:.3f}) m/s  hall_angle={np.degrees(angle):.1f} deg")
    return 0


_COMMANDS = {
    "relax": _cmd_relax,
    "run": _cmd_run,
    "sweep-phase": _cmd_sweep_phase,
    "sweep-velocity": _cmd_sweep_velocity,
    "gate": _cmd_gate,
    "thiele": _cmd_thiele,
}


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = io.read_config(args.config)
        return _COMMANDS[args.command](args, cfg)
    except (io.ConfigError, InvariantError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (experiments.SweepError, experiments.GateError, textures.SceneError,
            dynamics.StiffnessError) as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    raise SystemExit(cli_main())


if __name__ == "__main__":
    main()
