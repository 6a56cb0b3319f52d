"""Dev scratch: kernel vs numpy consistency + relax behavior."""
import time

import numpy as np

import skyrtrack as st
from skyrtrack import analysis, dynamics, fields, textures
from skyrtrack.dynamics import Integrator, IntegratorConfig

rng = np.random.default_rng(42)

# small track with a notch for consistency checks
p = st.default_material()
g = st.build_geometry(nx=48, ny=24, notch_center_x=50e-9, notch_length=30e-9,
                      notch_depth=10e-9)
m = rng.normal(size=(g.nx, g.ny, 3))
m /= np.linalg.norm(m, axis=-1, keepdims=True)
m[~g.active] = 0.0
s = st.MagnetizationGrid(m, 0.0)

ef = fields.total_field(s, p, g)
integ = Integrator(p, g, IntegratorConfig())
out = np.zeros_like(m)
integ.set_torque(0.0, np.array([0.0, 1.0, 0.0]))
integ.rhs(m, out)
ref = dynamics.llg_rhs(s, ef, None, p)
print("rhs kernel vs numpy: max abs diff", np.max(np.abs(out - ref)),
      "scale", np.max(np.abs(ref)))

# with torque on
pulse = st.DrivePulse(j_hm=5e10)
integ.set_pulse_state(pulse, True)
integ.rhs(m, out)
ref = dynamics.llg_rhs(st.MagnetizationGrid(m, 1e-9), ef, pulse, p)
print("rhs+torque kernel vs numpy: max abs diff", np.max(np.abs(out - ref)),
      "scale", np.max(np.abs(ref)))

# field-energy gradient check on a few cells (numpy side)
def grad_check(n_cells=8):
    eps = 1e-6
    cells = [(i, j) for i, j in zip(rng.integers(0, g.nx, 50), rng.integers(0, g.ny, 50))
             if g.active[i, j]][:n_cells]
    worst = 0.0
    h = fields.total_field(s, p, g).h
    for (i, j) in cells:
        for c in range(3):
            m2 = s.m.copy(); m2[i, j, c] += eps
            ep = fields.total_energy(st.MagnetizationGrid(m2, 0), p, g).e_total
            m2 = s.m.copy(); m2[i, j, c] -= eps
            em = fields.total_energy(st.MagnetizationGrid(m2, 0), p, g).e_total
            grad = (ep - em) / (2 * eps)
            han = -grad / (fields.MU0 * p.m_s * g.cell_volume)
            scale = max(abs(han), 1e3)
            worst = max(worst, abs(han - h[i, j, c]) / scale)
    return worst

print("field-energy consistency worst rel err:", grad_check())

# relax behavior on a small free track with a skyrmion
g2 = st.build_geometry(nx=64, ny=32, notch_length=0)
s2 = st.uniform_state(g2)
textures.seed_skyrmion(s2, (64e-9, 32e-9), 10e-9, -1, p, g2)
integ2 = Integrator(p, g2, IntegratorConfig())
integ2.set_torque(0.0, np.array([0.0, 1.0, 0.0]))
w = s2.copy()
t0 = time.time()
for chunk in range(12):
    for _ in range(400):
        integ2._step_rk45(w, np.inf)
    tq = integ2.max_torque(w.m)
    e = fields.total_energy(w, p, g2).e_total
    print(f"steps={400*(chunk+1):5d} t={w.time*1e9:8.4f} ns dt={integ2.dt*1e15:7.1f} fs "
          f"torque={tq:10.3f} E={e:.6e} acc={integ2.n_accepted} rej={integ2.n_rejected}")
print("wall per step (ms):", (time.time()-t0)/integ2.n_accepted*1e3)
print("Q:", analysis.topological_charge(w, g2), analysis.locate_skyrmions(w, g2))
