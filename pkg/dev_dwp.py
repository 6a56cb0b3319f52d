"""Dev: DWP pinning/depinning at the notch and skyrmion edge annihilation."""
import sys
import time

import numpy as np

import skyrtrack as st
from skyrtrack import analysis, dynamics, textures
from skyrtrack.dynamics import IntegratorConfig

p, g = st.build_default_track()


def log(msg):
    print(msg, flush=True)


def dwp_run(j, base):
    pulse = st.DrivePulse(j_hm=j, direction="+x", t_off=10e-9)
    t0 = time.time()
    rec = dynamics.run_pulse(base, pulse, IntegratorConfig(), p, g,
                             post_pulse_window=2e-9, relax_after=True)
    out = analysis.classify_outcome(rec, g)
    log(f"=== DWP j={j:g}  wall={time.time()-t0:.0f}s  outcome={out.outcome} fate={out.dwp_fate}")
    for fr in rec.frames[::40] + [rec.frames[-1]]:
        dwp = "none" if fr.dwp is None else f"({fr.dwp[0]*1e9:.0f},{fr.dwp[1]*1e9:.0f})"
        log(f"  t={fr.time*1e9:5.2f} dwp={dwp} nsk={len(fr.skyrmions)} Q={fr.q:+.2f} relax_ok={rec.relax_converged}")


def sk_run(j):
    gf = g.without_notch()
    s = st.uniform_state(gf)
    textures.seed_skyrmion(s, (80e-9, 40e-9), 10e-9, -1, p, gf)
    base = dynamics.relax(s, p, gf).state
    pulse = st.DrivePulse(j_hm=j, direction="+x", t_off=10e-9)
    t0 = time.time()
    rec = dynamics.run_pulse(base, pulse, IntegratorConfig(), p, gf,
                             post_pulse_window=2e-9, relax_after=True)
    log(f"=== SK j={j:g}  wall={time.time()-t0:.0f}s")
    for fr in rec.frames[::40] + [rec.frames[-1]]:
        sk = f"({fr.skyrmions[0][0]*1e9:.0f},{fr.skyrmions[0][1]*1e9:.0f})" if fr.skyrmions else "none"
        log(f"  t={fr.time*1e9:5.2f} sk={sk} Q={fr.q:+.2f}")


which = sys.argv[1] if len(sys.argv) > 1 else "all"
if which in ("dwp", "all"):
    s = st.uniform_state(g)
    textures.seed_domain_wall_pair(s, 220e-9, 260e-9, p, g)
    base = dynamics.relax(s, p, g).state
    log(f"relaxed dwp: {analysis.dwp_position(base, g)}")
    for j in (5e10, 8e10, 12e10, 18e10):
        dwp_run(j, base)
if which in ("sk", "all"):
    for j in (5e10, 8e10, 9.5e10, 12e10):
        sk_run(j)
