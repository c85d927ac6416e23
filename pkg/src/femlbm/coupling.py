"""Multirate overlapping-Schwarz coupling of FEM and LBM subdomains.

Subdomains overlap and exchange Dirichlet data. Per system step of size
dt_c, MaxIter Gauss-Seidel sub-iterations run; in each, every coarse FEM
subdomain re-advances from the saved state at t using interface values
interpolated from the current fine fields, then every fine LBM subdomain
re-advances its eta = dt_c/dt_f substeps from the saved state at t,
imposing at substep j the time-interpolated coarse value

    u_c(t + (j/eta) dt_c) ~= (j/eta) u_c(t + dt_c) + (1 - j/eta) u_c(t).

All species (reaction invariants) are advanced independently through the
same machinery. The first sub-iteration of the first step simply uses the
fine initial condition for the fine-to-coarse values, so no interface
initial guess is needed.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import ConfigError
from .fem.interp import ElementLocator
from .fem.stepper import ThetaStepper, _eval_value
from .lbm.boundary import BoundarySet, BoundaryPatch
from .lbm.sim import LbmSimulation
from .transfer import build_transfer_map, fem_to_lbm, lbm_to_fem


@dataclass
class FemSubdomain:
    """A coarse FEM subdomain with per-species states.

    `system.dirichlet` must contain every constrained node (true Dirichlet
    boundary and coupling interface) so the stepper's free set is fixed;
    the actual values are supplied per step. `bc_values[s]` maps node ->
    scalar or callable (t) / (t, x) for species s on the true boundary.
    """

    mesh: object
    system: object
    states: list
    interface_ids: np.ndarray = dc_field(default_factory=lambda: np.array([], int))
    bc_values: list = None
    name: str = "fem"

    def __post_init__(self):
        self.interface_ids = np.asarray(self.interface_ids, int)
        if self.bc_values is None:
            self.bc_values = [{} for _ in self.states]
        self.stepper = ThetaStepper(self.system)

    @property
    def n_species(self):
        return len(self.states)

    def boundary_overrides(self, s, t):
        return {
            a: _eval_value(val, t, self.mesh.nodes[a])
            for a, val in self.bc_values[s].items()
        }


@dataclass
class InterfaceWall:
    """One coupling wall of a fine subdomain.

    `nodes` lists the wall's LBM node index tuples; `patches[s]` is the
    entropy-Dirichlet BoundaryPatch for species s whose `value` array the
    coupler overwrites before each substep (the patch must belong to the
    species' BoundarySet and cover exactly `nodes`, in order).
    """

    nodes: list
    patches: list


@dataclass
class LbmSubdomain:
    """A fine LBM subdomain with one simulation per species."""

    sims: list
    interfaces: list = dc_field(default_factory=list)
    name: str = "lbm"

    @property
    def n_species(self):
        return len(self.sims)

    @property
    def grid(self):
        return self.sims[0].field.grid


def interface_wall_patch(grid, side, n_species):
    """Entropy-Dirichlet patches (one per species) covering a full wall.

    Returns (node index tuples, patches). The wall includes its corner
    nodes; add these patches AFTER the true-boundary patches so the
    interface data wins at shared corners.
    """
    axis, last = {
        "left": (0, False),
        "right": (0, True),
        "bottom": (1, False),
        "top": (1, True),
    }[side]
    normal = np.zeros(grid.dim)
    normal[axis] = 1.0 if last else -1.0
    ranges = []
    for ax in range(grid.dim):
        if ax == axis:
            ranges.append(np.array([grid.dims[ax] - 1 if last else 0]))
        else:
            ranges.append(np.arange(grid.dims[ax]))
    mesh_idx = np.meshgrid(*ranges, indexing="ij")
    index = tuple(m.reshape(-1) for m in mesh_idx)
    nodes = list(zip(*[m.tolist() for m in index]))
    coords = np.stack(
        [grid.origin[ax] + grid.h * index[ax] for ax in range(grid.dim)], axis=-1
    )
    patches = [
        BoundaryPatch("entropy-dirichlet", index, normal,
                      np.zeros(len(nodes)), coords)
        for _ in range(n_species)
    ]
    return nodes, patches


@dataclass
class CouplingLink:
    """One directed interface: values flow source -> target."""

    source: int
    target: int
    tmap: object


class CoupledSystem:
    """Gauss-Seidel multirate Schwarz engine (any number of subdomains)."""

    def __init__(self, fem_domains, lbm_domains, dt_c, max_iter,
                 time=0.0):
        self.fem_domains = list(fem_domains)
        self.lbm_domains = list(lbm_domains)
        self.dt_c = float(dt_c)
        self.max_iter = int(max_iter)
        self.time = float(time)
        if self.max_iter < 1:
            raise ConfigError(["MaxIter must be >= 1"])
        ns = {d.n_species for d in self.fem_domains} | {
            d.n_species for d in self.lbm_domains
        }
        if len(ns) != 1:
            raise ConfigError(["subdomains disagree on the species count"])
        self.n_species = ns.pop()
        #eta per fine subdomain must divide dt_c exactly
        self.etas = []
        for d in self.lbm_domains:
            dt_f = d.sims[0].field.dt
            eta = self.dt_c / dt_f
            if abs(eta - round(eta)) > 1e-9 * max(1.0, eta):
                raise ConfigError(
                    [f"dt_c/dt_f = {eta} is not an integer for {d.name}"]
                )
            self.etas.append(int(round(eta)))
        #links: fine->coarse per FEM domain, coarse->fine per LBM domain
        self.f2c = []   # (fem_idx, lbm_idx, tmap)
        self.c2f = []   # (lbm_idx, fem_idx, tmap)
        for fi, fd in enumerate(self.fem_domains):
            if fd.interface_ids.size == 0:
                continue
            li = self._containing_lbm(fd)
            tmap = build_transfer_map(
                fd.mesh, self.lbm_domains[li].grid,
                interface_fem=fd.interface_ids,
            )
            self.f2c.append((fi, li, tmap))
        for li, ld in enumerate(self.lbm_domains):
            for wi, wall in enumerate(ld.interfaces):
                fi = self._containing_fem(ld, wall)
                tmap = build_transfer_map(
                    self.fem_domains[fi].mesh, ld.grid,
                    interface_lbm=wall.nodes,
                )
                self.c2f.append((li, fi, tmap, wi))

    def _containing_lbm(self, fd):
        """Fine subdomain whose grid box contains this FEM interface."""
        pts = fd.mesh.nodes[fd.interface_ids]
        for li, ld in enumerate(self.lbm_domains):
            g = ld.grid
            lo = g.origin - 1e-9 * g.h
            hi = g.origin + g.h * (np.array(g.dims) - 1) + 1e-9 * g.h
            if np.all(pts >= lo) and np.all(pts <= hi):
                return li
        raise ConfigError(
            [f"no fine subdomain contains the interface of {fd.name}"]
        )

    def _containing_fem(self, ld, wall):
        """Coarse subdomain whose mesh contains every node of `wall`."""
        g = ld.grid
        pts = np.array(
            [g.origin + g.h * np.asarray(n, float) for n in wall.nodes]
        )
        for fi, fd in enumerate(self.fem_domains):
            lo = fd.mesh.nodes.min(axis=0) - 1e-9 * g.h
            hi = fd.mesh.nodes.max(axis=0) + 1e-9 * g.h
            if np.all((pts >= lo) & (pts <= hi)):
                return fi
        raise ConfigError(
            [f"interface wall of {ld.name} lies in no coarse subdomain"]
        )

    # -- state management ------------------------------------------------

    def save_states(self):
        fem = [[st for st in d.states] for d in self.fem_domains]
        lbm = [[sim.state() for sim in d.sims] for d in self.lbm_domains]
        return (self.time, fem, lbm)

    def restore_states(self, snap):
        self.time, fem, lbm = snap[0], snap[1], snap[2]
        for d, states in zip(self.fem_domains, fem):
            d.states = list(states)
        for d, sims in zip(self.lbm_domains, lbm):
            for sim, st in zip(d.sims, sims):
                sim.restore(st)

    # -- the Schwarz step ------------------------------------------------

    def advance_system_step(self):
        """One coarse step of Algorithm-style sub-iterated coupling."""
        t = self.time
        t_new = t + self.dt_c
        saved = self.save_states()
        _, fem_saved, lbm_saved = saved
        for it in range(self.max_iter):
            #coarse subdomains, Gauss-Seidel in listed order
            for fi, fd in enumerate(self.fem_domains):
                links = [(li, tm) for (f, li, tm) in self.f2c if f == fi]
                new_states = []
                for s in range(self.n_species):
                    overrides = fd.boundary_overrides(s, t_new)
                    for li, tm in links:
                        u = self.lbm_domains[li].sims[s].field.f.sum(axis=0)
                        ids, vals = lbm_to_fem(tm, u)
                        overrides.update(zip(ids.tolist(), vals.tolist()))
                    state = fem_saved[fi][s]
                    new_states.append(
                        fd.stepper.step(state, dirichlet_values=overrides)
                    )
                fd.states = new_states
            #fine subdomains
            for li, ld in enumerate(self.lbm_domains):
                eta = self.etas[li]
                links = [
                    (fi, tm, wi) for (l, fi, tm, wi) in self.c2f if l == li
                ]
                #coarse values at t (saved) and t+dt_c (just advanced)
                blends = []
                for fi, tm, wi in links:
                    per_species = []
                    for s in range(self.n_species):
                        _, v_old = fem_to_lbm(tm, fem_saved[fi][s].d)
                        _, v_new = fem_to_lbm(tm, self.fem_domains[fi].states[s].d)
                        per_species.append((v_old, v_new))
                    blends.append((wi, per_species))
                for s in range(self.n_species):
                    ld.sims[s].restore(lbm_saved[li][s])
                for j in range(1, eta + 1):
                    frac = j / eta
                    for s in range(self.n_species):
                        for wi, per_species in blends:
                            v_old, v_new = per_species[s]
                            ld.interfaces[wi].patches[s].value = (
                                frac * v_new + (1.0 - frac) * v_old
                            )
                        ld.sims[s].step()
        self.time = t_new
        return self

    def run(self, n_steps, callback=None):
        for k in range(n_steps):
            self.advance_system_step()
            if callback is not None:
                callback(k, self)
        return self

    # -- diagnostics -----------------------------------------------------

    def _overlap_samples(self, fi, li):
        """(node tuples, element conns, barycentric weights) of LBM nodes
        inside the FEM mesh of subdomain fi."""
        fd = self.fem_domains[fi]
        g = self.lbm_domains[li].grid
        loc = ElementLocator(fd.mesh)
        lo = fd.mesh.nodes.min(axis=0) - 1e-12
        hi = fd.mesh.nodes.max(axis=0) + 1e-12
        samples = []
        for flat in np.ndindex(*g.dims):
            x = g.origin + g.h * np.asarray(flat, float)
            if np.any(x < lo) or np.any(x > hi):
                continue
            if g.solid is not None and g.solid[flat]:
                continue
            elem, lam = loc.locate(x)
            samples.append((flat, fd.mesh.elements[elem], lam))
        return samples

    def overlap_incompatibility(self, species=0):
        """max |u_FEM - u_LBM| over all overlap sample nodes."""
        worst = 0.0
        pairs = {(fi, li) for (fi, li, _) in self.f2c} | {
            (fi, li) for (li, fi, _, _) in self.c2f
        }
        for fi, li in pairs:
            d = self.fem_domains[fi].states[species].d
            u = self.lbm_domains[li].sims[species].field.f.sum(axis=0)
            for flat, conn, lam in self._overlap_samples(fi, li):
                diff = abs(float(lam @ d[conn]) - float(u[flat]))
                worst = max(worst, diff)
        return worst

    def blended_overlap_report(self, fi, li, axis=0, species=0):
        """Reporting-only blend u = beta u_FEM + (1-beta) u_LBM.

        beta is linear along `axis` across the overlap: 1 on the fine
        subdomain's interface plane (where LBM receives FEM data), 0 on
        the coarse subdomain's interface plane. Returns (points, values).
        """
        fd = self.fem_domains[fi]
        ld = self.lbm_domains[li]
        g = ld.grid
        #interface planes along the blend axis
        fem_lo = fd.mesh.nodes[:, axis].min()
        fem_hi = fd.mesh.nodes[:, axis].max()
        lbm_lo = g.origin[axis]
        lbm_hi = g.origin[axis] + g.h * (g.dims[axis] - 1)
        lo = max(fem_lo, lbm_lo)
        hi = min(fem_hi, lbm_hi)
        #Gamma_{c->f} is the fine-grid edge inside the coarse mesh
        x_cf = lbm_lo if lbm_lo > fem_lo else lbm_hi
        x_fc = fem_hi if lbm_lo > fem_lo else fem_lo
        d = fd.states[species].d
        u = ld.sims[species].field.f.sum(axis=0)
        pts, vals = [], []
        for flat, conn, lam in self._overlap_samples(fi, li):
            x = g.origin + g.h * np.asarray(flat, float)
            beta = (x[axis] - x_fc) / (x_cf - x_fc)
            beta = min(max(beta, 0.0), 1.0)
            blend = beta * float(lam @ d[conn]) + (1.0 - beta) * float(u[flat])
            pts.append(x)
            vals.append(blend)
        return np.array(pts), np.array(vals)


def advance_coarse_step_two_domain(fem, lbm, tmap_f2c, tmap_c2f, dt_c,
                                   max_iter, t):
    """Standalone two-subdomain coarse step (independent reference route).

    Same contract as CoupledSystem.advance_system_step restricted to one
    FEM and one LBM subdomain; written as a direct transcription of the
    sub-iteration loop for cross-checking the generic engine.
    """
    eta = int(round(dt_c / lbm.sims[0].field.dt))
    fem_saved = list(fem.states)
    lbm_saved = [sim.state() for sim in lbm.sims]
    t_new = t + dt_c
    for it in range(max_iter):
        new_states = []
        for s in range(fem.n_species):
            u = lbm.sims[s].field.f.sum(axis=0)
            ids, vals = lbm_to_fem(tmap_f2c, u)
            overrides = fem.boundary_overrides(s, t_new)
            overrides.update(zip(ids.tolist(), vals.tolist()))
            new_states.append(
                fem.stepper.step(fem_saved[s], dirichlet_values=overrides)
            )
        fem.states = new_states
        for s in range(fem.n_species):
            _, v_old = fem_to_lbm(tmap_c2f, fem_saved[s].d)
            _, v_new = fem_to_lbm(tmap_c2f, fem.states[s].d)
            lbm.sims[s].restore(lbm_saved[s])
            for j in range(1, eta + 1):
                frac = j / eta
                lbm.interfaces[0].patches[s].value = (
                    frac * v_new + (1.0 - frac) * v_old
                )
                lbm.sims[s].step()
    return fem, lbm


# -- checkpoints ---------------------------------------------------------

def checkpoint_dump(system, path):
    """Plain-text dump of every subdomain state at the current time."""
    with open(path, "w") as fh:
        fh.write(f"time {system.time:.17g}\n")
        fh.write(f"species {system.n_species}\n")
        for d in system.fem_domains:
            for s, st in enumerate(d.states):
                fh.write(f"fem {d.name} {s} {st.time:.17g}\n")
                fh.write("d " + " ".join(f"{x:.17g}" for x in st.d) + "\n")
                fh.write("v " + " ".join(f"{x:.17g}" for x in st.v) + "\n")
        for d in system.lbm_domains:
            for s, sim in enumerate(d.sims):
                fh.write(f"lbm {d.name} {s} {sim.time:.17g}\n")
                flat = sim.field.f.reshape(-1)
                fh.write("f " + " ".join(f"{x:.17g}" for x in flat) + "\n")


def checkpoint_load(system, path):
    """Restore a dump written by checkpoint_dump into `system` in place."""
    from dataclasses import replace
    from .fem.stepper import FemState

    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    pos = 0
    time = float(lines[pos].split()[1]); pos += 1
    n_species = int(lines[pos].split()[1]); pos += 1
    system.time = time
    for d in system.fem_domains:
        for s in range(n_species):
            _, _, _, t_s = lines[pos].split(); pos += 1
            dvals = np.array([float(x) for x in lines[pos].split()[1:]]); pos += 1
            vvals = np.array([float(x) for x in lines[pos].split()[1:]]); pos += 1
            d.states[s] = FemState(dvals, vvals, float(t_s))
    for d in system.lbm_domains:
        for s in range(n_species):
            _, _, _, t_s = lines[pos].split(); pos += 1
            fvals = np.array([float(x) for x in lines[pos].split()[1:]]); pos += 1
            sim = d.sims[s]
            fld = replace(sim.field, f=fvals.reshape(sim.field.f.shape))
            sim.restore((fld, float(t_s)))
    return system
