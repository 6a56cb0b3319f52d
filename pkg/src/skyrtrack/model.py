"""Simulation state, material parameters and racetrack geometry.

Everything is SI.  The film is a single 2-D layer of square cells
(one cell through the thickness); the track is a rectangle with a
rectangular notch cut out of one long edge.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.constants as const

MU0 = const.mu_0          # vacuum permeability [V s / (A m)]
HBAR = const.hbar         # reduced Planck constant [J s]
QE = const.e              # elementary charge [C]

# standard micromagnetic gyromagnetic ratio [m / (A s)]
GAMMA_DEFAULT = 2.211e5


class InvariantError(ValueError):
    """A physical parameter or state violates a model invariant."""


@dataclass(frozen=True)
class MaterialParams:
    """Film material constants (defaults filled in by :func:`build_default_track`).

    a_ex     exchange stiffness [J/m]
    k_u      perpendicular uniaxial anisotropy [J/m^3]
    m_s      saturation magnetization [A/m]
    dmi_d    interfacial DMI constant [J/m^2]
    alpha    Gilbert damping
    beta     field-like (non-adiabatic) torque coefficient
    theta_sh spin Hall angle
    t_film   ferromagnet thickness [m]
    gamma    gyromagnetic ratio [m/(A s)]
    use_thin_film_demag  replace magnetostatics by K_eff = k_u - mu0*m_s^2/2
    """

    a_ex: float
    k_u: float
    m_s: float
    dmi_d: float
    alpha: float
    beta: float
    theta_sh: float
    t_film: float
    gamma: float = GAMMA_DEFAULT
    use_thin_film_demag: bool = True

    def __post_init__(self):
        if not self.a_ex > 0:
            raise InvariantError(f"a_ex must be > 0, got {self.a_ex}")
        if not self.k_u > 0:
            raise InvariantError(f"k_u must be > 0, got {self.k_u}")
        if not self.m_s > 0:
            raise InvariantError(f"m_s must be > 0, got {self.m_s}")
        if not self.t_film > 0:
            raise InvariantError(f"t_film must be > 0, got {self.t_film}")
        if not 0 < self.alpha <= 1:
            raise InvariantError(f"alpha must be in (0, 1], got {self.alpha}")
        if not 0 < self.theta_sh <= 1:
            raise InvariantError(f"theta_sh must be in (0, 1], got {self.theta_sh}")
        if not self.gamma > 0:
            raise InvariantError(f"gamma must be > 0, got {self.gamma}")

    @property
    def k_eff(self) -> float:
        """Effective out-of-plane anisotropy [J/m^3]."""
        if self.use_thin_film_demag:
            return self.k_u - 0.5 * MU0 * self.m_s**2
        return self.k_u

    @property
    def wall_width(self) -> float:
        """Bloch-wall width sqrt(A/K_eff) [m]."""
        return float(np.sqrt(self.a_ex / self.k_eff))


@dataclass(frozen=True)
class GeometryMask:
    """Cell grid with an active/inactive map for the notched racetrack.

    The notch removes a notch_length x notch_depth rectangle of cells
    from one long edge, centered at notch_center_x.  A cell belongs to
    the notch when its center lies inside the rectangle, so identical
    inputs always rasterize to the identical mask.
    """

    nx: int
    ny: int
    dx: float
    dy: float
    dz: float
    active: np.ndarray                    # bool (nx, ny)
    notch_center_x: float = 0.0
    notch_length: float = 0.0
    notch_depth: float = 0.0
    notch_side: str = "upper"             # "upper" (y = W edge) or "lower"

    def __post_init__(self):
        a = np.asarray(self.active, dtype=bool)
        if a.shape != (self.nx, self.ny):
            raise InvariantError(
                f"active mask shape {a.shape} != grid ({self.nx}, {self.ny})")
        object.__setattr__(self, "active", a)
        a.setflags(write=False)

    @property
    def cell_volume(self) -> float:
        return self.dx * self.dy * self.dz

    @property
    def n_active(self) -> int:
        return int(self.active.sum())

    @property
    def length(self) -> float:
        return self.nx * self.dx

    @property
    def width(self) -> float:
        return self.ny * self.dy

    def cell_center(self, i: int, j: int) -> tuple[float, float]:
        return ((i + 0.5) * self.dx, (j + 0.5) * self.dy)

    def x_centers(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5) * self.dx

    def y_centers(self) -> np.ndarray:
        return (np.arange(self.ny) + 0.5) * self.dy

    def neighbor_presence(self):
        """Boolean arrays (has_xp, has_xm, has_yp, has_ym): the lateral
        neighbor in that direction exists and is active."""
        a = self.active
        has_xp = np.zeros_like(a)
        has_xm = np.zeros_like(a)
        has_yp = np.zeros_like(a)
        has_ym = np.zeros_like(a)
        has_xp[:-1, :] = a[:-1, :] & a[1:, :]
        has_xm[1:, :] = a[1:, :] & a[:-1, :]
        has_yp[:, :-1] = a[:, :-1] & a[:, 1:]
        has_ym[:, 1:] = a[:, 1:] & a[:, :-1]
        return has_xp, has_xm, has_yp, has_ym

    def without_notch(self) -> "GeometryMask":
        """Same track with the notch filled back in (free track)."""
        return replace(self, active=np.ones((self.nx, self.ny), dtype=bool),
                       notch_length=0.0, notch_depth=0.0)


@dataclass
class MagnetizationGrid:
    """Unit magnetization directions on the active cells.

    m is (nx, ny, 3); inactive cells are kept at exactly zero so they
    drop out of every sum.
    """

    m: np.ndarray
    time: float = 0.0

    def copy(self) -> "MagnetizationGrid":
        return MagnetizationGrid(self.m.copy(), self.time)

    def norm_deviation(self, mask: GeometryMask) -> float:
        """max over active cells of | |m| - 1 |."""
        norms = np.linalg.norm(self.m[mask.active], axis=-1)
        if norms.size == 0:
            return 0.0
        return float(np.max(np.abs(norms - 1.0)))


def uniform_state(mask: GeometryMask, direction=(0.0, 0.0, 1.0)) -> MagnetizationGrid:
    """Uniform unit magnetization along `direction` on active cells."""
    d = np.asarray(direction, dtype=float)
    n = np.linalg.norm(d)
    if n == 0:
        raise InvariantError("direction must be a nonzero vector")
    m = np.zeros((mask.nx, mask.ny, 3))
    m[mask.active] = d / n
    return MagnetizationGrid(m=m, time=0.0)


@dataclass(frozen=True)
class DrivePulse:
    """Heavy-metal charge current pulse.

    j_hm       charge current density in the heavy metal [A/m^2], >= 0
    direction  '+x' or '-x'
    t_on/t_off pulse window [s]
    """

    j_hm: float
    direction: str = "+x"
    t_on: float = 0.0
    t_off: float = 10e-9

    def __post_init__(self):
        if self.j_hm < 0:
            raise InvariantError(f"j_hm must be >= 0, got {self.j_hm}")
        if self.direction not in ("+x", "-x"):
            raise InvariantError(f"direction must be '+x' or '-x', got {self.direction!r}")
        if not self.t_off > self.t_on:
            raise InvariantError("t_off must be > t_on")

    @property
    def sigma_hat(self) -> np.ndarray:
        """Spin polarization direction of the injected spin current.

        In-plane and transverse to the charge current: sigma = j_hat x z_hat,
        i.e. -y for current along +x.  The overall sign is the calibration
        that makes positive j_hm drive DMI-chiral textures toward +x.
        """
        s = 1.0 if self.direction == "+x" else -1.0
        return np.array([0.0, -s, 0.0])

    def active_at(self, t: float) -> bool:
        return self.t_on <= t < self.t_off


def default_material() -> MaterialParams:
    """Device material constants of the reference racetrack."""
    return MaterialParams(
        a_ex=1.5e-11,     # J/m
        k_u=8e5,          # J/m^3
        m_s=5.8e5,        # A/m
        dmi_d=3.5e-3,     # J/m^2
        alpha=0.3,
        beta=0.1,
        theta_sh=0.3,
        t_film=0.4e-9,    # m
        gamma=GAMMA_DEFAULT,
        use_thin_film_demag=True,
    )


def build_geometry(nx: int = 255, ny: int = 40,
                   dx: float = 2e-9, dy: float = 2e-9, dz: float = 0.4e-9,
                   notch_center_x: float = 300e-9,
                   notch_length: float = 30e-9,
                   notch_depth: float = 10e-9,
                   notch_side: str = "upper") -> GeometryMask:
    """Racetrack mask with a rectangular edge notch.

    Pass notch_length=0 (or notch_depth=0) for a free track.
    """
    if notch_side not in ("upper", "lower"):
        raise InvariantError(f"notch_side must be 'upper' or 'lower', got {notch_side!r}")
    active = np.ones((nx, ny), dtype=bool)
    if notch_length > 0 and notch_depth > 0:
        xc = (np.arange(nx) + 0.5) * dx
        yc = (np.arange(ny) + 0.5) * dy
        in_x = np.abs(xc - notch_center_x) < notch_length / 2
        if notch_side == "upper":
            in_y = yc > ny * dy - notch_depth
        else:
            in_y = yc < notch_depth
        active[np.outer(in_x, in_y)] = False
    return GeometryMask(nx=nx, ny=ny, dx=dx, dy=dy, dz=dz, active=active,
                        notch_center_x=notch_center_x, notch_length=notch_length,
                        notch_depth=notch_depth, notch_side=notch_side)


def build_default_track() -> tuple[MaterialParams, GeometryMask]:
    """510 x 80 x 0.4 nm track, 2 x 2 x 0.4 nm cells, 30 x 10 nm notch."""
    return default_material(), build_geometry()


@dataclass(frozen=True)
class NeighborInfo:
    """Lateral neighbors of one active cell.

    Each entry is ((i, j), active); inactive or out-of-bounds neighbors
    report active=False and count as boundary sides.
    """

    xp: tuple[tuple[int, int], bool]
    xm: tuple[tuple[int, int], bool]
    yp: tuple[tuple[int, int], bool]
    ym: tuple[tuple[int, int], bool]

    @property
    def n_active(self) -> int:
        return sum(1 for _, ok in (self.xp, self.xm, self.yp, self.ym) if ok)

    @property
    def n_boundary(self) -> int:
        return 4 - self.n_active


def cell_neighbors(mask: GeometryMask, i: int, j: int) -> NeighborInfo:
    """Stencil support of cell (i, j); raises on inactive cells."""
    if not (0 <= i < mask.nx and 0 <= j < mask.ny) or not mask.active[i, j]:
        raise InvariantError(f"cell ({i}, {j}) is not active")

    def look(ii, jj):
        ok = 0 <= ii < mask.nx and 0 <= jj < mask.ny and bool(mask.active[ii, jj])
        return ((ii, jj), ok)

    return NeighborInfo(xp=look(i + 1, j), xm=look(i - 1, j),
                        yp=look(i, j + 1), ym=look(i, j - 1))
