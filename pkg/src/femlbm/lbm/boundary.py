"""Boundary closures for unknown incoming populations.

Four closure kinds are supported at domain walls:

* entropy-dirichlet — minimize H subject to sum f_i = u_p; the analytic
  minimizer splits the (clamped) deficit proportionally to the weights.
* entropy-neumann — minimize H subject to a prescribed outward normal
  flux; unknowns take the exponential form f_i = w_i exp(-1 - gamma a_i)
  with a_i = e_i . n, and gamma solves a scalar monotone equation.
* bounce-back — f_i = f_opp(i) of the post-stream populations.
* specular — f_i = f_mirror(i), mirroring about the wall tangent.

The single-node functions operate on one population vector; `BoundarySet`
applies vectorized per-patch versions after each streaming step. Corner
nodes carry the normalized sum of the meeting wall normals.
"""

import inspect
from dataclasses import dataclass, field as dc_field

import numpy as np

from ..errors import FemlbmError, InfeasibleFluxError
from ..lattice import incoming_set, mirror_map

#residual tolerance for the gamma equation, relative to max(1, |rhs|)
_GAMMA_TOL = 1e-12
#|rhs| below this is treated as the degenerate zero-mass case
_ZERO_MASS = 1e-300
#absolute slack (lattice units) for marginally positive rhs: near-vacuum
#nodes ahead of an advancing front can carry round-off-level net influx
_FEASIBLE_SLACK = 1e-9


def entropy_dirichlet(known, model, normal, u_p):
    """Fill the incoming set so the node concentration matches u_p.

    `known` is a full population vector whose M- slots are ignored.
    Returns a new vector; the deficit u_p - (sum of knowns) is clamped at
    zero and split proportionally to the incoming weights.
    """
    minc = incoming_set(model, normal)
    if minc.size == 0:
        raise ValueError(f"normal {normal} has an empty incoming set")
    out = np.array(known, dtype=float)
    keep = np.ones(model.m, dtype=bool)
    keep[minc] = False
    deficit = max(u_p - out[keep].sum(), 0.0)
    w_in = model.weights[minc]
    out[minc] = w_in * (deficit / w_in.sum())
    return out


def entropy_neumann(known, model, normal, q_p):
    """Fill the incoming set to carry outward normal flux q_p (lattice units).

    Solves sum_{i in M-} w_i a_i exp(-1 - gamma a_i) = rhs for gamma, with
    rhs = q_p - sum_{j not in M-} a_j f_j. Raises InfeasibleFluxError when
    rhs > 0 beyond round-off (non-negative unknowns can only remove flux);
    near-zero rhs returns zero populations (degenerate cold-start case).
    """
    minc = incoming_set(model, normal)
    if minc.size == 0:
        raise ValueError(f"normal {normal} has an empty incoming set")
    n = np.asarray(normal, dtype=float)
    a_all = model.velocities @ n
    out = np.array(known, dtype=float)
    keep = np.ones(model.m, dtype=bool)
    keep[minc] = False
    rhs = q_p - (a_all[keep] * out[keep]).sum()
    vals, _ = _neumann_fill(model.weights[minc], a_all[minc], np.atleast_1d(rhs))
    out[minc] = vals[:, 0]
    return out


def bounce_back(known, model, normal):
    """Incoming populations copied from their opposite outgoing slots."""
    minc = incoming_set(model, normal)
    out = np.array(known, dtype=float)
    out[minc] = np.asarray(known, dtype=float)[model.opposite[minc]]
    return out


def specular_reflection(known, model, normal):
    """Incoming populations copied from their tangent-mirrored slots."""
    minc = incoming_set(model, normal)
    mirror = mirror_map(model, normal)
    out = np.array(known, dtype=float)
    out[minc] = np.asarray(known, dtype=float)[mirror[minc]]
    return out


def _neumann_fill(w_in, a_in, rhs):
    """Vectorized gamma solve; returns ((k, n) unknown values, zero-mass count).

    w_in, a_in: weights and normal rates of the incoming directions (all
    a_in < 0). rhs: (n,) right-hand sides. The left side g(gamma) =
    sum w a exp(-1 - gamma a) is strictly decreasing with range (-inf, 0).
    """
    k = w_in.size
    n = rhs.size
    out = np.zeros((k, n))
    zero_mass = 0
    feasible = rhs < -_ZERO_MASS
    degenerate = ~feasible & (
        rhs <= _FEASIBLE_SLACK + _GAMMA_TOL * np.maximum(1.0, np.abs(rhs))
    )
    bad = ~feasible & ~degenerate
    if bad.any():
        raise InfeasibleFluxError(
            f"prescribed influx infeasible at {int(bad.sum())} node(s); "
            f"worst rhs = {rhs[bad].max():.6g} > 0"
        )
    zero_mass = int(degenerate.sum())
    if not feasible.any():
        return out, zero_mass
    r = rhs[feasible]
    if np.ptp(a_in) < 1e-14:
        #single rate: exp(-1 - gamma a) is the same scalar for all i, so
        #the fill is weight-proportional with total mass r / sum(w a) * w
        scale = r / (w_in * a_in).sum()
        out[:, feasible] = w_in[:, None] * scale[None, :]
        return out, zero_mass
    #general case (corner normals): per-node safeguarded bisection
    for col, rv in zip(np.flatnonzero(feasible), r):
        gamma = _solve_gamma(w_in, a_in, rv)
        out[:, col] = w_in * np.exp(-1.0 - gamma * a_in)
    return out, zero_mass


def _g(w_in, a_in, gamma):
    with np.errstate(over="ignore"):
        return float((w_in * a_in * np.exp(-1.0 - gamma * a_in)).sum())


def _solve_gamma(w_in, a_in, rhs):
    """Bracketed bisection for the monotone-decreasing gamma equation."""
    lo, hi = -50.0, 50.0
    #grow until g(lo) >= rhs >= g(hi); g -> 0- at -inf and -inf at +inf
    for _ in range(100):
        if _g(w_in, a_in, lo) >= rhs:
            break
        lo *= 2.0
    for _ in range(100):
        ghi = _g(w_in, a_in, hi)
        if ghi <= rhs or not np.isfinite(ghi):
            break
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        gm = _g(w_in, a_in, mid)
        if not np.isfinite(gm) or gm < rhs:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-15 * max(1.0, abs(lo) + abs(hi)):
            break
    gamma = 0.5 * (lo + hi)
    if abs(_g(w_in, a_in, gamma) - rhs) > _GAMMA_TOL * max(1.0, abs(rhs)):
        raise FemlbmError(
            f"gamma iteration failed to converge (rhs = {rhs:.6g})"
        )
    return gamma


@dataclass
class BoundaryPatch:
    """A set of wall nodes sharing one outward normal and one closure kind.

    `value` is the prescribed concentration (entropy-dirichlet) or outward
    normal flux in physical units (entropy-neumann). It may be a scalar,
    an array over the patch nodes, or a callable: value(t), value(t, u)
    (second parameter literally named "u", receives the current node
    concentrations — used for advective outflow closures), or value(t, x)
    (receives the (n, dim) patch node coordinates).
    """

    kind: str
    index: tuple
    normal: np.ndarray
    value: object = None
    coords: np.ndarray = None

    def __post_init__(self):
        self.normal = np.atleast_1d(np.asarray(self.normal, float))
        self.normal = self.normal / np.linalg.norm(self.normal)
        if self.kind not in (
            "entropy-dirichlet",
            "entropy-neumann",
            "bounce-back",
            "specular",
        ):
            raise ValueError(f"unknown boundary kind {self.kind!r}")
        self._mode = "t"
        if callable(self.value):
            params = list(inspect.signature(self.value).parameters)
            if len(params) >= 2:
                self._mode = "tu" if params[1] == "u" else "tx"

    @property
    def n_nodes(self):
        return len(self.index[0])

    def evaluate(self, t, u=None):
        v = self.value
        if callable(v):
            if self._mode == "tu":
                v = v(t, u)
            elif self._mode == "tx":
                v = v(t, self.coords)
            else:
                v = v(t)
        return np.broadcast_to(np.asarray(v, float), (self.n_nodes,))


@dataclass
class BoundarySet:
    """Applies boundary patches to a post-stream population array."""

    model: object
    grid: object
    patches: list
    counters: dict = dc_field(
        default_factory=lambda: {"dirichlet_clamps": 0, "neumann_zero_mass": 0}
    )

    def __post_init__(self):
        self._prepared = []
        for patch in self.patches:
            minc = incoming_set(self.model, patch.normal)
            if minc.size == 0:
                raise ValueError(f"patch normal {patch.normal} has empty M-")
            keep = np.ones(self.model.m, dtype=bool)
            keep[minc] = False
            info = {"patch": patch, "minc": minc, "keep": keep}
            if patch.kind == "specular":
                info["mirror"] = mirror_map(self.model, patch.normal)
            if patch.kind == "entropy-neumann":
                info["a_all"] = self.model.velocities @ patch.normal
            self._prepared.append(info)

    def apply(self, f, t, dt, h):
        """Overwrite the incoming sets of every patch in place on `f`."""
        model = self.model
        for info in self._prepared:
            patch = info["patch"]
            minc = info["minc"]
            idx = (slice(None),) + patch.index
            F = f[idx]  # (m, n) view
            if patch.kind == "bounce-back":
                F[minc] = F[model.opposite[minc]]
            elif patch.kind == "specular":
                F[minc] = F[info["mirror"][minc]]
            elif patch.kind == "entropy-dirichlet":
                u_p = patch.evaluate(t, F.sum(axis=0))
                known_sum = F[info["keep"]].sum(axis=0)
                deficit = u_p - known_sum
                w_in = model.weights[minc]
                F[minc] = w_in[:, None] * np.maximum(deficit, 0.0) / w_in.sum()
                #negative deficit: the knowns alone already exceed u_p, so
                #no non-negative incoming fill can satisfy the constraint.
                #Re-minimize H over the whole nodal vector instead, whose
                #constrained minimizer is the weight-proportional bath
                #f_i = w_i u_p; this keeps sum f = u_p and f >= 0. A
                #negative prescribed value (e.g. stabilized-FEM undershoot
                #fed through a coupling interface) is floored at zero: a
                #bath with negative concentration is unphysical and would
                #break the non-negativity guarantee.
                over = deficit < 0.0
                if over.any():
                    self.counters["dirichlet_clamps"] += int(over.sum())
                    F[:, over] = (model.weights[:, None]
                                  * np.maximum(u_p[None, over], 0.0))
            elif patch.kind == "entropy-neumann":
                q_p = patch.evaluate(t, F.sum(axis=0))
                q_lat = q_p * dt / h
                a_all = info["a_all"]
                keep = info["keep"]
                rhs = q_lat - (a_all[keep, None] * F[keep]).sum(axis=0)
                vals, zero_mass = _neumann_fill(
                    model.weights[minc], a_all[minc], rhs
                )
                self.counters["neumann_zero_mass"] += zero_mass
                F[minc] = vals
            f[idx] = F
        return f


def _wall_index(dims, axis, last, interior_only, dim):
    """Advanced-index tuple for one wall, optionally excluding corners."""
    idx = []
    ranges = []
    for ax in range(dim):
        if ax == axis:
            ranges.append(np.array([dims[ax] - 1 if last else 0]))
        else:
            lo = 1 if interior_only else 0
            hi = dims[ax] - 1 if interior_only else dims[ax]
            ranges.append(np.arange(lo, hi))
    mesh = np.meshgrid(*ranges, indexing="ij")
    return tuple(m.reshape(-1) for m in mesh)


def box_boundary(grid, sides, dirichlet_wins=True):
    """Build patches for the walls of a box grid.

    `sides` maps side name ("left", "right" and for 2D "bottom", "top")
    to (kind, value). Corner nodes get their own patches with the
    normalized sum of the meeting wall normals; when the two walls have
    different kinds the Dirichlet kind wins (if present and
    `dirichlet_wins`), otherwise the x-side kind is used.
    """
    dim = grid.dim
    side_spec = {
        "left": (0, False, -1.0),
        "right": (0, True, +1.0),
    }
    if dim == 2:
        side_spec["bottom"] = (1, False, -1.0)
        side_spec["top"] = (1, True, +1.0)
    patches = []
    def node_coords(idx):
        cols = [grid.origin[ax] + grid.h * idx[ax] for ax in range(dim)]
        return np.stack(cols, axis=-1)

    for name, (kind, value) in sides.items():
        axis, last, sign = side_spec[name]
        normal = np.zeros(dim)
        normal[axis] = sign
        idx = _wall_index(grid.dims, axis, last, interior_only=(dim == 2), dim=dim)
        patches.append(BoundaryPatch(kind, idx, normal, value, node_coords(idx)))
    if dim == 2:
        #corner patches with combined normals
        for xname in ("left", "right"):
            for yname in ("bottom", "top"):
                if xname not in sides or yname not in sides:
                    continue
                xaxis, xlast, xsign = side_spec[xname]
                yaxis, ylast, ysign = side_spec[yname]
                ix = grid.dims[0] - 1 if xlast else 0
                iy = grid.dims[1] - 1 if ylast else 0
                normal = np.array([xsign, ysign]) / np.sqrt(2.0)
                kx, vx = sides[xname]
                ky, vy = sides[yname]
                if kx == ky:
                    kind, value = kx, vx
                elif dirichlet_wins and "entropy-dirichlet" in (kx, ky):
                    kind, value = (kx, vx) if kx == "entropy-dirichlet" else (ky, vy)
                else:
                    kind, value = kx, vx
                idx = (np.array([ix]), np.array([iy]))
                patches.append(BoundaryPatch(kind, idx, normal, value, node_coords(idx)))
    return patches
