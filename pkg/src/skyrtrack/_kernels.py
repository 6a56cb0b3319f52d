"""Compiled inner loops for the integrator and observables.

Everything here works on plain float64 (nx, ny, 3) arrays plus boolean
mask / neighbor-presence arrays; all loops are serial so results are
bit-reproducible run to run.  The cell-level effective field matches
`fields.total_field` exactly (same stencils, same boundary handling).
"""

import numpy as np
from numba import njit


@njit(cache=True, fastmath=True, inline="always")
def _heff_cell(m, i, j, hxp, hxm, hyp, hym,
               cex_x, cex_y, cdx, cdy, cani, hax, hay, haz):
    """Effective field at one active cell.

    cex_* = 2 A / (mu0 Ms d^2),  cd* = D / (mu0 Ms d),
    cani  = 2 K_eff / (mu0 Ms),  ha*  = applied field.
    """
    mx = m[i, j, 0]
    my = m[i, j, 1]
    mz = m[i, j, 2]

    hx = hax
    hy = hay
    hz = haz + cani * mz

    if hxp[i, j]:
        hx += cex_x * (m[i + 1, j, 0] - mx) + cdx * m[i + 1, j, 2]
        hy += cex_x * (m[i + 1, j, 1] - my)
        hz += cex_x * (m[i + 1, j, 2] - mz) - cdx * m[i + 1, j, 0]
    if hxm[i, j]:
        hx += cex_x * (m[i - 1, j, 0] - mx) - cdx * m[i - 1, j, 2]
        hy += cex_x * (m[i - 1, j, 1] - my)
        hz += cex_x * (m[i - 1, j, 2] - mz) + cdx * m[i - 1, j, 0]
    if hyp[i, j]:
        hx += cex_y * (m[i, j + 1, 0] - mx)
        hy += cex_y * (m[i, j + 1, 1] - my) + cdy * m[i, j + 1, 2]
        hz += cex_y * (m[i, j + 1, 2] - mz) - cdy * m[i, j + 1, 1]
    if hym[i, j]:
        hx += cex_y * (m[i, j - 1, 0] - mx)
        hy += cex_y * (m[i, j - 1, 1] - my) - cdy * m[i, j - 1, 2]
        hz += cex_y * (m[i, j - 1, 2] - mz) + cdy * m[i, j - 1, 1]

    return hx, hy, hz


@njit(cache=True, fastmath=True)
def llg_rhs(m, active, hxp, hxm, hyp, hym,
            cex_x, cex_y, cdx, cdy, cani, hax, hay, haz,
            pre_p, pre_d, c_slon, c_fl, mpx, mpy, mpz, out):
    """dm/dt [1/s] of the explicit LLG with spin Hall torques.

    pre_p  = -gamma / (1 + alpha^2)           (precession, m x H)
    pre_d  = -gamma alpha / (1 + alpha^2)     (damping, m x (m x H))
    c_slon = gamma k (1 + alpha beta) / (1 + alpha^2)  (m x (mp x m))
    c_fl   = gamma k (alpha - beta) / (1 + alpha^2)    (m x mp)
    """
    nx, ny = active.shape
    for i in range(nx):
        for j in range(ny):
            if not active[i, j]:
                out[i, j, 0] = 0.0
                out[i, j, 1] = 0.0
                out[i, j, 2] = 0.0
                continue
            hx, hy, hz = _heff_cell(m, i, j, hxp, hxm, hyp, hym,
                                    cex_x, cex_y, cdx, cdy, cani,
                                    hax, hay, haz)
            mx = m[i, j, 0]
            my = m[i, j, 1]
            mz = m[i, j, 2]

            # m x H
            px = my * hz - mz * hy
            py = mz * hx - mx * hz
            pz = mx * hy - my * hx
            # m x (m x H)
            dx_ = my * pz - mz * py
            dy_ = mz * px - mx * pz
            dz_ = mx * py - my * px

            tx = pre_p * px + pre_d * dx_
            ty = pre_p * py + pre_d * dy_
            tz = pre_p * pz + pre_d * dz_

            if c_slon != 0.0 or c_fl != 0.0:
                # m x (mp x m) = mp - (m . mp) m
                dot = mx * mpx + my * mpy + mz * mpz
                sx = mpx - dot * mx
                sy = mpy - dot * my
                sz = mpz - dot * mz
                # m x mp
                fx = my * mpz - mz * mpy
                fy = mz * mpx - mx * mpz
                fz = mx * mpy - my * mpx
                tx += c_slon * sx + c_fl * fx
                ty += c_slon * sy + c_fl * fy
                tz += c_slon * sz + c_fl * fz

            out[i, j, 0] = tx
            out[i, j, 1] = ty
            out[i, j, 2] = tz


@njit(cache=True, fastmath=True)
def max_torque(m, active, hxp, hxm, hyp, hym,
               cex_x, cex_y, cdx, cdy, cani, hax, hay, haz):
    """max over active cells of |m x H_eff| [A/m] (relaxation measure)."""
    nx, ny = active.shape
    best = 0.0
    for i in range(nx):
        for j in range(ny):
            if not active[i, j]:
                continue
            hx, hy, hz = _heff_cell(m, i, j, hxp, hxm, hyp, hym,
                                    cex_x, cex_y, cdx, cdy, cani,
                                    hax, hay, haz)
            mx = m[i, j, 0]
            my = m[i, j, 1]
            mz = m[i, j, 2]
            px = my * hz - mz * hy
            py = mz * hx - mx * hz
            pz = mx * hy - my * hx
            t = np.sqrt(px * px + py * py + pz * pz)
            if t > best:
                best = t
    return best


@njit(cache=True, fastmath=True)
def combine_stages(y0, kstack, coeffs, n_used, dt, out):
    """out = y0 + dt * sum_s coeffs[s] * kstack[s]   (s < n_used)."""
    nx, ny, nc = y0.shape
    for i in range(nx):
        for j in range(ny):
            for c in range(nc):
                acc = 0.0
                for s in range(n_used):
                    acc += coeffs[s] * kstack[s, i, j, c]
                out[i, j, c] = y0[i, j, c] + dt * acc


@njit(cache=True, fastmath=True)
def error_rms(kstack, ecoeffs, n_used, dt, n_active):
    """RMS over active-cell components of the embedded error estimate."""
    _, nx, ny, nc = kstack.shape
    acc = 0.0
    for i in range(nx):
        for j in range(ny):
            for c in range(nc):
                e = 0.0
                for s in range(n_used):
                    e += ecoeffs[s] * kstack[s, i, j, c]
                e *= dt
                acc += e * e
    if n_active == 0:
        return 0.0
    return np.sqrt(acc / (3.0 * n_active))


@njit(cache=True)
def renormalize(m, active):
    """Rescale every active cell to |m| = 1; returns the worst pre-step
    deviation | |m| - 1 | (contract diagnostic)."""
    nx, ny = active.shape
    worst = 0.0
    for i in range(nx):
        for j in range(ny):
            if not active[i, j]:
                continue
            n = np.sqrt(m[i, j, 0] ** 2 + m[i, j, 1] ** 2 + m[i, j, 2] ** 2)
            dev = abs(n - 1.0)
            if dev > worst:
                worst = dev
            if n > 0.0:
                m[i, j, 0] /= n
                m[i, j, 1] /= n
                m[i, j, 2] /= n
    return worst


@njit(cache=True, inline="always")
def _solid_angle(ax, ay, az, bx, by, bz, cx, cy, cz):
    """Signed solid angle of the spherical triangle (a, b, c)."""
    num = (ax * (by * cz - bz * cy)
           + ay * (bz * cx - bx * cz)
           + az * (bx * cy - by * cx))
    den = (1.0 + ax * bx + ay * by + az * bz
           + bx * cx + by * cy + bz * cz
           + ax * cx + ay * cy + az * cz)
    return 2.0 * np.arctan2(num, den)


@njit(cache=True)
def lattice_charge(m, active):
    """Lattice topological charge: sum of solid angles of the two
    triangles of every fully active cell quad, divided by 4 pi.

    Quads touching inactive cells are skipped, so the count degrades
    gracefully at the track edge instead of picking up junk.
    Orientation: triangles wind (x then y) positively; the sign
    convention used by the package is applied by the caller.
    """
    nx, ny = active.shape
    total = 0.0
    for i in range(nx - 1):
        for j in range(ny - 1):
            if not (active[i, j] and active[i + 1, j]
                    and active[i + 1, j + 1] and active[i, j + 1]):
                continue
            v1x = m[i, j, 0]
            v1y = m[i, j, 1]
            v1z = m[i, j, 2]
            v2x = m[i + 1, j, 0]
            v2y = m[i + 1, j, 1]
            v2z = m[i + 1, j, 2]
            v3x = m[i + 1, j + 1, 0]
            v3y = m[i + 1, j + 1, 1]
            v3z = m[i + 1, j + 1, 2]
            v4x = m[i, j + 1, 0]
            v4y = m[i, j + 1, 1]
            v4z = m[i, j + 1, 2]
            total += _solid_angle(v1x, v1y, v1z, v2x, v2y, v2z, v3x, v3y, v3z)
            total += _solid_angle(v1x, v1y, v1z, v3x, v3y, v3z, v4x, v4y, v4z)
    return total / (4.0 * np.pi)
