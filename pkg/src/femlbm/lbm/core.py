"""Collision-streaming core of the advection-diffusion lattice Boltzmann method.

Populations live on a uniform wet-node grid; `f` has shape (m,) + dims so
each direction is a contiguous spatial block. All operations are pure:
they return new fields and never mutate their inputs.

Streaming fills slots whose upstream source is unavailable (outside the
box on a non-periodic axis, or a solid node) with the post-collision
opposite population, i.e. a local bounce-back default. Boundary patches
(see `femlbm.lbm.boundary`) subsequently overwrite the incoming set M- at
domain walls, so the default only survives at solid-obstacle interfaces
and at the few corner slots that belong to no incoming set.
"""

from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from ..errors import NegativityError, StabilityError
from ..lattice import LatticeModel
from . import kernels

#low-Mach guard: conventional LBM limit on |v|/c_s
MACH_LIMIT = 0.3

#window below zero treated as an exact zero by the H function
H_CLAMP = 1e-14


def relaxation_time(D, cs2, dt):
    """tau = 1/2 + D/(c_s^2 dt)."""
    if D <= 0 or cs2 <= 0 or dt <= 0:
        raise ValueError("relaxation_time requires positive D, cs2 and dt")
    return 0.5 + D / (cs2 * dt)


def max_stable_dt(D, cs2_coeff, h):
    """Minimum admissible time-step for non-negative populations.

    The bound dt <= 2 D / c_s^2 with c_s^2 = kappa (h/dt)^2 is a lower
    bound on dt: dt >= kappa h^2 / (2 D). Equivalently tau >= 1. For D2Q9
    (kappa = 1/3) this is h^2/(6 D).
    """
    kappa = float(cs2_coeff)
    if D <= 0 or h <= 0 or kappa <= 0:
        raise ValueError("max_stable_dt requires positive D, kappa and h")
    return kappa * h * h / (2.0 * D)


@dataclass(frozen=True)
class LbmGrid:
    """Uniform node grid with optional solid mask and periodic axes."""

    origin: np.ndarray
    h: float
    dims: tuple
    solid: np.ndarray = None
    periodic: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "origin", np.atleast_1d(np.asarray(self.origin, float)))
        object.__setattr__(self, "dims", tuple(int(n) for n in self.dims))
        if self.h <= 0:
            raise ValueError("grid spacing must be positive")
        if any(n < 2 for n in self.dims):
            raise ValueError("grids need at least 2 nodes per axis")
        if len(self.origin) != len(self.dims):
            raise ValueError("origin and dims dimension mismatch")
        if self.periodic is None:
            object.__setattr__(self, "periodic", (False,) * self.dim)
        else:
            object.__setattr__(self, "periodic", tuple(bool(p) for p in self.periodic))
        if self.solid is not None:
            solid = np.asarray(self.solid, bool)
            if solid.shape != self.dims:
                raise ValueError("solid mask shape must equal dims")
            object.__setattr__(self, "solid", solid)

    @property
    def dim(self):
        return len(self.dims)

    @property
    def n_nodes(self):
        return int(np.prod(self.dims))

    def axis_coords(self, axis):
        return self.origin[axis] + self.h * np.arange(self.dims[axis])

    def coords(self):
        """Node coordinates as an array of shape dims + (dim,)."""
        axes = [self.axis_coords(a) for a in range(self.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def fluid_mask(self):
        if self.solid is None:
            return np.ones(self.dims, dtype=bool)
        return ~self.solid


@dataclass(frozen=True)
class LbmField:
    """Populations plus the discretization they live on."""

    grid: LbmGrid
    model: LatticeModel
    f: np.ndarray
    dt: float
    tau: float
    velocity: np.ndarray = None
    _vlat: np.ndarray = dc_field(default=None, repr=False, compare=False)

    def __post_init__(self):
        expected = (self.model.m,) + self.grid.dims
        if self.f.shape != expected:
            raise ValueError(f"f has shape {self.f.shape}, expected {expected}")
        vel = self.velocity
        if vel is None:
            vel = np.zeros((self.model.dim,) + self.grid.dims)
        else:
            vel = np.asarray(vel, float)
            if vel.shape == (self.model.dim,):
                vel = np.broadcast_to(
                    vel.reshape((self.model.dim,) + (1,) * self.grid.dim),
                    (self.model.dim,) + self.grid.dims,
                ).copy()
            elif vel.shape != (self.model.dim,) + self.grid.dims:
                raise ValueError("velocity must be a constant vector or a full field")
        object.__setattr__(self, "velocity", vel)
        vmax = np.sqrt((vel * vel).sum(axis=0)).max()
        if vmax > MACH_LIMIT * self.cs + 1e-15:
            raise StabilityError(
                f"max |v| = {vmax:.6g} exceeds the low-Mach guard "
                f"{MACH_LIMIT:.2f} c_s = {MACH_LIMIT * self.cs:.6g}"
            )
        object.__setattr__(self, "_vlat", np.ascontiguousarray(
            (vel * (self.dt / self.grid.h)).reshape(self.model.dim, -1)))

    @property
    def c(self):
        return self.grid.h / self.dt

    @property
    def cs2(self):
        return float(self.model.cs2_coeff) * self.c ** 2

    @property
    def cs(self):
        return np.sqrt(self.cs2)

    def diffusivity(self):
        """D implied by tau, c_s and dt."""
        return (self.tau - 0.5) * self.cs2 * self.dt

    @classmethod
    def from_equilibrium(cls, grid, model, dt, D, u0, velocity=None, half_vv=True):
        """Initialize populations at equilibrium for concentration u0."""
        cs2_lat = float(model.cs2_coeff)
        tau = relaxation_time(D, cs2_lat * (grid.h / dt) ** 2, dt)
        u0 = np.broadcast_to(np.asarray(u0, float), grid.dims)
        probe = cls(grid, model, np.zeros((model.m,) + grid.dims), dt, tau, velocity)
        flat_u = u0.reshape(-1)
        feq = _equilibrium_many(model, flat_u, probe._vlat, half_vv)
        f = feq.reshape((model.m,) + grid.dims).copy()
        if grid.solid is not None:
            f[:, grid.solid] = 0.0
        return cls(grid, model, f, dt, tau, velocity)


def _equilibrium_many(model, u, vlat, half_vv=True):
    """Equilibrium populations for flat arrays u (N,) and vlat (dim, N)."""
    c2 = 1.0 / float(model.cs2_coeff)
    e = model.velocities.astype(float)
    w = model.weights
    ev = e @ vlat
    vv = (vlat * vlat).sum(axis=0)
    vvfac = 0.5 * c2 if half_vv else c2
    return w[:, None] * u * (1.0 + ev * c2 + 0.5 * ev * ev * c2 * c2 - vv * vvfac)


def equilibrium(model, u, v, cs2, half_vv=True):
    """Equilibrium population vector for one node.

    `v` is the physical advection velocity and `cs2` the physical squared
    sound speed; raises StabilityError when |v| exceeds the low-Mach guard.
    The velocity is converted to lattice units via the lattice speed
    c = sqrt(cs2 / kappa), so the zeroth moment is exactly u and the first
    moment is u v / c.
    """
    v = np.atleast_1d(np.asarray(v, float))
    if not np.isfinite(u):
        raise ValueError("u must be finite")
    vnorm = np.linalg.norm(v)
    if vnorm > MACH_LIMIT * np.sqrt(cs2) + 1e-15:
        raise StabilityError(
            f"|v| = {vnorm:.6g} exceeds {MACH_LIMIT:.2f} c_s = "
            f"{MACH_LIMIT * np.sqrt(cs2):.6g}"
        )
    c = np.sqrt(cs2 / float(model.cs2_coeff))
    vlat = (v / c).reshape(model.dim, 1)
    return _equilibrium_many(model, np.atleast_1d(float(u)), vlat,
                             half_vv)[:, 0]


def collide(field, D, half_vv=True):
    """BGK relaxation toward local equilibrium at every node.

    `D` must be consistent with the field's tau; per-node concentration is
    unchanged and, for tau >= 1, non-negative inputs give non-negative
    outputs.
    """
    if field.tau < 0.5:
        raise ValueError(f"tau = {field.tau} < 1/2 is unphysical")
    expected = relaxation_time(D, field.cs2, field.dt)
    if abs(expected - field.tau) > 1e-9 * max(1.0, field.tau):
        raise ValueError(
            f"tau = {field.tau} inconsistent with D = {D} "
            f"(expected {expected})"
        )
    f = np.ascontiguousarray(field.f.reshape(field.model.m, -1).copy())
    kernels.collide_ad(
        f,
        field.model.weights,
        np.ascontiguousarray(field.model.velocities, dtype=float),
        field._vlat,
        float(field.model.cs2_coeff),
        1.0 / field.tau,
        half_vv,
    )
    f = f.reshape(field.f.shape)
    if field.grid.solid is not None:
        f[:, field.grid.solid] = 0.0
    return replace(field, f=f)


def stream(field):
    """Advect populations one cell along their directions.

    Slots with no valid upstream source (outside the box on a non-periodic
    axis, or a solid source node) default to the post-collision opposite
    population at the same node; boundary patches overwrite the incoming
    sets afterwards.
    """
    grid = field.grid
    model = field.model
    f = field.f
    new = np.empty_like(f)
    axes = tuple(range(grid.dim))
    not_solid = None if grid.solid is None else ~grid.solid
    for i in range(model.m):
        ei = model.velocities[i]
        if not ei.any():
            new[i] = f[i]
            continue
        shifted = np.roll(f[i], shift=tuple(ei), axis=axes)
        valid = np.ones(grid.dims, dtype=bool)
        for ax in range(grid.dim):
            if grid.periodic[ax] or ei[ax] == 0:
                continue
            sl = [slice(None)] * grid.dim
            #targets whose wrapped source crossed the boundary
            sl[ax] = slice(0, ei[ax]) if ei[ax] > 0 else slice(ei[ax], None)
            valid[tuple(sl)] = False
        if not_solid is not None:
            valid &= np.roll(not_solid, shift=tuple(ei), axis=axes)
        new[i] = np.where(valid, shifted, f[model.opposite[i]])
    if grid.solid is not None:
        new[:, grid.solid] = 0.0
    return replace(field, f=new)


def moments(field):
    """Zeroth and first moments: concentration u and physical flux q."""
    u = field.f.sum(axis=0)
    e = field.model.velocities.astype(float)
    q = np.einsum("id,i...->d...", e, field.f) * (field.grid.h / field.dt)
    return u, q


def h_function(field):
    """Boltzmann H = sum_nodes sum_i f_i log(f_i / w_i), with 0 log 0 = 0."""
    f = field.f
    if f.min() < -H_CLAMP:
        raise NegativityError(
            f"population {f.min():.6g} below the negativity tolerance -{H_CLAMP:g}"
        )
    fc = np.where(f < 0.0, 0.0, f)
    w = field.model.weights.reshape((field.model.m,) + (1,) * field.grid.dim)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(fc > 0.0, fc * np.log(fc / w), 0.0)
    if field.grid.solid is not None:
        terms[:, field.grid.solid] = 0.0
    return float(terms.sum())
