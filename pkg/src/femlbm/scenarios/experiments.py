"""Reference experiment drivers behind the named scenarios.

Each function sets up one of the package's studied problems from plain
numeric parameters and returns a dict of results. The scenario runners
(femlbm.scenarios.runners) wrap these with configuration parsing and CSV
emission; the test-suite calls them directly.
"""

import numpy as np

from ..chemistry import (
    BimolecularSystem,
    CalciteSystem,
    bimolecular_recover,
    calcite_recover,
    lattice_weights,
    lumped_mesh_weights,
    total_concentration,
)
from ..coupling import (
    CoupledSystem,
    FemSubdomain,
    InterfaceWall,
    LbmSubdomain,
    interface_wall_patch,
)
from ..errors import ConfigError
from ..fem import (
    ElementLocator,
    assemble_galerkin,
    assemble_supg,
    initial_rate,
    structured_mesh,
)
from ..lattice import builtin_model
from ..lbm.boundary import BoundarySet, box_boundary
from ..lbm.core import LbmField, LbmGrid, h_function, max_stable_dt
from ..lbm.sim import LbmSimulation
from ..transfer import build_transfer_map, fem_to_lbm, lbm_to_fem
from .common import exact_gaussian_hill, max_error

#diffusion coefficient of the mixed-boundary decay problem; the exact
#solution sin(pi y) cos(pi x / 2) then decays as exp(-t)
D_MIXED_BC = 4.0 / (5.0 * np.pi ** 2)


def _steps_to(T, dt):
    """Number of whole steps fitting in (0, T]; guards float jitter."""
    return int(np.floor(T / dt + 1e-12))


def _divisions(length, h, what):
    n = length / h
    if abs(n - round(n)) > 1e-9 * max(1.0, n):
        raise ConfigError(
            [f"{what}: spacing {h} does not divide length {length}"]
        )
    return int(round(n))


# -- single-domain LBM problems ------------------------------------------

def run_lbm_mixed_bc(h, dt, T=0.25, model_name="D2Q9"):
    """Decay of sin(pi y) cos(pi x / 2) on the unit square under LBM.

    Zero-flux on the left wall, zero Dirichlet on the rest; both enforced
    through the entropy closures. D = 4/(5 pi^2) makes the exact solution
    u0 exp(-t). Returns the nodal max error at the nominal time T after
    floor(T / dt) steps.
    """
    model = builtin_model(model_name)
    n = _divisions(1.0, h, "lbm-mixed-bc")
    grid = LbmGrid(origin=(0.0, 0.0), h=h, dims=(n + 1, n + 1))
    X = grid.coords()
    u0 = np.sin(np.pi * X[..., 1]) * np.cos(np.pi * X[..., 0] / 2.0)
    #tabulated time-steps for this problem are 2-significant-digit values
    #of the tau = 1 bound and may round up to 1% below it; tau stays well
    #above the stability limit 1/2, so allow that much slack here
    if dt < max_stable_dt(D_MIXED_BC, model.cs2_coeff, h) * (1.0 - 1e-2):
        raise ConfigError(
            [f"dt = {dt} below the non-negativity bound "
             f"{max_stable_dt(D_MIXED_BC, model.cs2_coeff, h):.6g}"]
        )
    field = LbmField.from_equilibrium(grid, model, dt, D_MIXED_BC, u0)
    patches = box_boundary(grid, {
        "left": ("entropy-neumann", 0.0),
        "right": ("entropy-dirichlet", 0.0),
        "bottom": ("entropy-dirichlet", 0.0),
        "top": ("entropy-dirichlet", 0.0),
    })
    bset = BoundarySet(model, grid, patches)
    sim = LbmSimulation(field, bset, D_MIXED_BC)
    steps = _steps_to(T, dt)
    sim.run(steps)
    u = sim.field.f.sum(axis=0)
    exact = u0 * np.exp(-T)
    return {
        "E": max_error(u, exact),
        "steps": steps,
        "u": u,
        "exact": exact,
        "grid": grid,
        "counters": dict(bset.counters),
    }


def run_lbm_box(h=1e-2, dt=2e-3, n_steps=1000, D=1e-2, model_name="D2Q9",
                bc="entropy-neumann", a=0.4, b=0.6, record_h=True):
    """Square-pulse relaxation in a closed box with a chosen wall closure.

    Initial condition is the indicator of [a, b]^dim; all walls carry the
    same closure kind (zero flux for the entropy-Neumann case). Returns
    the H-function trace and the minimum concentration reached.
    """
    model = builtin_model(model_name)
    dim = model.dim
    n = _divisions(1.0, h, "lbm-box")
    grid = LbmGrid(origin=(0.0,) * dim, h=h, dims=(n + 1,) * dim)
    X = grid.coords()
    inside = np.ones(grid.dims, dtype=bool)
    for ax in range(dim):
        inside &= (X[..., ax] >= a) & (X[..., ax] <= b)
    u0 = inside.astype(float)
    field = LbmField.from_equilibrium(grid, model, dt, D, u0)
    value = 0.0 if bc == "entropy-neumann" else None
    sides = {"left": (bc, value), "right": (bc, value)}
    if dim == 2:
        sides["bottom"] = (bc, value)
        sides["top"] = (bc, value)
    bset = BoundarySet(model, grid, box_boundary(grid, sides))
    sim = LbmSimulation(field, bset, D)
    h_trace = [h_function(sim.field)] if record_h else []
    u_min = float(sim.field.f.sum(axis=0).min())
    for _ in range(n_steps):
        sim.step()
        if record_h:
            h_trace.append(h_function(sim.field))
        u_min = min(u_min, float(sim.field.f.sum(axis=0).min()))
    return {
        "u": sim.field.f.sum(axis=0),
        "h_trace": np.array(h_trace),
        "u_min": u_min,
        "f_min": float(sim.field.f.min()),
        "grid": grid,
        "time": sim.time,
    }


# -- non-matching grid transfer ------------------------------------------

def _g_test(x):
    return np.sin(2.0 * np.pi * x[..., 0]) * np.sin(2.0 * np.pi * x[..., 1])


def run_transfer_study(direction, cases):
    """Max interpolation error of g = sin(2 pi x) sin(2 pi y) per case.

    direction "fem-to-lbm": cases are (h, h_prime); nodal g on a coarse
    triangulation of size h is interpolated at every node of a fine
    lattice of spacing h_prime. direction "lbm-to-fem": lattice g of
    spacing h_prime is bilinearly interpolated at every node of an
    h-sized mesh. Returns per-case errors.
    """
    rows = []
    for h, hp in cases:
        if direction == "fem-to-lbm":
            mesh = structured_mesh((0.0, 0.0), (1.0, 1.0),
                                   (_divisions(1.0, h, "transfer"),) * 2)
            d = _g_test(mesh.nodes)
            n = _divisions(1.0, hp, "transfer")
            grid = LbmGrid(origin=(0.0, 0.0), h=hp, dims=(n + 1, n + 1))
            nodes = [tuple(idx) for idx in np.ndindex(*grid.dims)]
            tmap = build_transfer_map(mesh, grid, interface_lbm=nodes)
            _, vals = fem_to_lbm(tmap, d)
            pts = np.array([grid.origin + grid.h * np.asarray(nd, float)
                            for nd in nodes])
            err = float(np.abs(vals - _g_test(pts)).max())
        elif direction == "lbm-to-fem":
            n = _divisions(1.0, hp, "transfer")
            grid = LbmGrid(origin=(0.0, 0.0), h=hp, dims=(n + 1, n + 1))
            u = _g_test(grid.coords())
            mesh = structured_mesh((0.0, 0.0), (1.0, 1.0),
                                   (_divisions(1.0, h, "transfer"),) * 2)
            ids = np.arange(mesh.n_nodes)
            tmap = build_transfer_map(mesh, grid, interface_fem=ids)
            ids_out, vals = lbm_to_fem(tmap, u)
            err = float(np.abs(vals - _g_test(mesh.nodes[ids_out])).max())
        else:
            raise ConfigError([f"unknown transfer direction {direction!r}"])
        rows.append({"h": h, "h_prime": hp, "E": err})
    return rows


# -- hybrid 1D Gaussian hill ---------------------------------------------

def build_gauss_1d(h_c, h_f, L, max_iter, dt_c=None, dt_f=None,
                   phi=0.1, sigma0=0.01, x0=0.3, v=1.0, D=1e-2):
    """Coupled system for the 1D Gaussian hill split into two subdomains.

    Coarse Galerkin FEM on (0, 1/2 + L/2) holds the initial hill; fine
    D1Q2 LBM on (1/2 - L/2, 1) receives it through the overlap. Default
    time-steps sit exactly on the non-negativity bound (tau = 1):
    dt = h^2 / (2 D) on each grid.
    """
    if L <= 0:
        raise ConfigError(["overlap length must be positive"])
    dt_c = h_c * h_c / (2.0 * D) if dt_c is None else dt_c
    dt_f = h_f * h_f / (2.0 * D) if dt_f is None else dt_f
    x_cf = 0.5 - L / 2.0      # fine edge inside the coarse subdomain
    x_fc = 0.5 + L / 2.0      # coarse edge inside the fine subdomain

    mesh = structured_mesh(0.0, x_fc, _divisions(x_fc, h_c, "gauss-1d fem"))
    iface = mesh.boundary_tags["right"]
    system = assemble_galerkin(
        mesh, D, v=np.array([v]), dirichlet={int(iface[0]): 0.0}, dt_c=dt_c
    )
    d0 = exact_gaussian_hill(mesh.nodes[:, 0], 0.0, phi, sigma0, x0, v, D)
    fem = FemSubdomain(
        mesh, system, [initial_rate(system, d0)],
        interface_ids=iface, name="coarse",
    )

    model = builtin_model("D1Q2")
    nf = _divisions(1.0 - x_cf, h_f, "gauss-1d lbm")
    grid = LbmGrid(origin=(x_cf,), h=h_f, dims=(nf + 1,))
    u0 = exact_gaussian_hill(grid.coords()[..., 0], 0.0, phi, sigma0, x0, v, D)
    field = LbmField.from_equilibrium(grid, model, dt_f, D, u0,
                                      velocity=np.array([v]))
    wall = box_boundary(grid, {"right": ("entropy-neumann", 0.0)})
    nodes, ipatches = interface_wall_patch(grid, "left", 1)
    bset = BoundarySet(model, grid, wall + ipatches)
    lbm = LbmSubdomain(
        [LbmSimulation(field, bset, D)],
        interfaces=[InterfaceWall(nodes, ipatches)],
        name="fine",
    )
    return CoupledSystem([fem], [lbm], dt_c, max_iter)


def run_gauss_1d(h_c, h_f, L, max_iter, T=0.4, dt_c=None, dt_f=None,
                 phi=0.1, sigma0=0.01, x0=0.3, v=1.0, D=1e-2):
    """Run the hill scenario and report E_c, E_f against the free-space exact."""
    sys_ = build_gauss_1d(h_c, h_f, L, max_iter, dt_c, dt_f,
                          phi, sigma0, x0, v, D)
    dt_c_eff = sys_.dt_c
    steps = _steps_to(T, dt_c_eff)
    sys_.run(steps)
    fem = sys_.fem_domains[0]
    lbm = sys_.lbm_domains[0]
    xc = fem.mesh.nodes[:, 0]
    xf = lbm.grid.coords()[..., 0]
    exact_c = exact_gaussian_hill(xc, T, phi, sigma0, x0, v, D)
    exact_f = exact_gaussian_hill(xf, T, phi, sigma0, x0, v, D)
    u_c = fem.states[0].d
    u_f = lbm.sims[0].field.f.sum(axis=0)
    return {
        "E_c": max_error(u_c, exact_c),
        "E_f": max_error(u_f, exact_f),
        "x_c": xc, "u_c": u_c,
        "x_f": xf, "u_f": u_f,
        "system": sys_,
        "steps": steps,
    }


# -- bimolecular reaction with three subdomains ---------------------------

def _gaussian(x, phi, x0, sigma):
    return phi / np.sqrt(2.0 * np.pi * sigma * sigma) * np.exp(
        -((x - x0) ** 2) / (2.0 * sigma * sigma)
    )


def build_bimolecular(h_c=1e-2, dt_c=5e-3, h_f=1e-3, dt_f=5e-5,
                      max_iter=10, D=1e-2, sigma=0.1,
                      phi_a=0.1, x_a=0.3, phi_b=0.05, x_b=0.7):
    """Three-subdomain system transporting the invariants alpha and beta.

    Layout on (0, 1): coarse FEM on (0, 0.40) and (0.6, 1.0), fine D1Q2
    LBM on (0.39, 0.61); zero advection, zero-flux outer walls. Species A
    and B start as Gaussians; C starts at zero, so alpha and beta equal
    the A and B profiles initially.
    """
    def make_fem(lo, hi, iface_tag, name):
        mesh = structured_mesh(lo, hi, _divisions(hi - lo, h_c, name))
        iface = mesh.boundary_tags[iface_tag]
        system = assemble_galerkin(
            mesh, D, dirichlet={int(iface[0]): 0.0}, dt_c=dt_c
        )
        x = mesh.nodes[:, 0]
        states = [
            initial_rate(system, _gaussian(x, phi_a, x_a, sigma)),
            initial_rate(system, _gaussian(x, phi_b, x_b, sigma)),
        ]
        return FemSubdomain(mesh, system, states, interface_ids=iface,
                            name=name)

    fem1 = make_fem(0.0, 0.40, "right", "coarse-left")
    fem2 = make_fem(0.60, 1.0, "left", "coarse-right")

    model = builtin_model("D1Q2")
    nf = _divisions(0.61 - 0.39, h_f, "bimolecular lbm")
    grid = LbmGrid(origin=(0.39,), h=h_f, dims=(nf + 1,))
    xf = grid.coords()[..., 0]
    nodes_l, patches_l = interface_wall_patch(grid, "left", 2)
    nodes_r, patches_r = interface_wall_patch(grid, "right", 2)
    sims = []
    for s, u0 in enumerate([_gaussian(xf, phi_a, x_a, sigma),
                            _gaussian(xf, phi_b, x_b, sigma)]):
        field = LbmField.from_equilibrium(grid, model, dt_f, D, u0)
        bset = BoundarySet(model, grid, [patches_l[s], patches_r[s]])
        sims.append(LbmSimulation(field, bset, D))
    lbm = LbmSubdomain(
        sims,
        interfaces=[InterfaceWall(nodes_l, patches_l),
                    InterfaceWall(nodes_r, patches_r)],
        name="fine",
    )
    return CoupledSystem([fem1, fem2], [lbm], dt_c, max_iter)


def sample_bimolecular(system, n_samples=2001):
    """Composite species profiles on a uniform global grid.

    The overlaps are split at their midpoints (x = 0.395 and 0.605): each
    point is evaluated on the subdomain that owns it.
    """
    xs = np.linspace(0.0, 1.0, n_samples)
    fem1, fem2 = system.fem_domains
    lbm = system.lbm_domains[0]
    loc1 = ElementLocator(fem1.mesh)
    loc2 = ElementLocator(fem2.mesh)
    grid = lbm.grid
    fields = []
    for s in range(2):
        vals = np.empty_like(xs)
        u = lbm.sims[s].field.f.sum(axis=0)
        for k, x in enumerate(xs):
            if x < 0.395:
                e, lam = loc1.locate([x])
                vals[k] = lam @ fem1.states[s].d[fem1.mesh.elements[e]]
            elif x > 0.605:
                e, lam = loc2.locate([x])
                vals[k] = lam @ fem2.states[s].d[fem2.mesh.elements[e]]
            else:
                sidx = (x - grid.origin[0]) / grid.h
                i = min(int(sidx), grid.dims[0] - 2)
                g = sidx - i
                vals[k] = (1.0 - g) * u[i] + g * u[i + 1]
        fields.append(vals)
    alpha, beta = fields
    chem = BimolecularSystem(1, 2, 1)
    u_a, u_b, u_c = bimolecular_recover(chem, np.maximum(alpha, 0.0),
                                        np.maximum(beta, 0.0))
    return {"x": xs, "alpha": alpha, "beta": beta,
            "u_A": u_a, "u_B": u_b, "u_C": u_c}


def run_bimolecular(sample_times=(0.1, 0.25, 0.5), **kwargs):
    """Advance the bimolecular system, sampling at the requested times."""
    system = build_bimolecular(**kwargs)
    dt_c = system.dt_c
    snapshots = {}
    integrals = {"t": [], "alpha": [], "beta": []}

    def record(t):
        snap = sample_bimolecular(system)
        snapshots[t] = snap
        dx = snap["x"][1] - snap["x"][0]
        integrals["t"].append(t)
        integrals["alpha"].append(float(np.trapezoid(snap["alpha"], dx=dx)))
        integrals["beta"].append(float(np.trapezoid(snap["beta"], dx=dx)))

    record(0.0)
    done = 0
    for t in sorted(sample_times):
        target = _steps_to(t, dt_c)
        system.run(target - done)
        done = target
        record(t)
    return {"system": system, "snapshots": snapshots, "integrals": integrals}


# -- 2D homogeneous medium (inlet front) ----------------------------------

def build_homogeneous_2d(v_x, h_c, h_f, dt_c, dt_f, max_iter,
                         L=0.04, D=5e-3, height=0.25, length=2.0):
    """Inlet-front problem on (0, length) x (0, height).

    Coarse SUPG FEM on (0, 1 + L/2) with u = 1 on the inlet x = 0; fine
    D2Q4 LBM on (1 - L/2, length) with zero-flux outer walls. Uniform
    advection (v_x, 0); zero initial concentration.
    """
    x_fc = 1.0 + L / 2.0
    x_cf = 1.0 - L / 2.0
    mesh = structured_mesh(
        (0.0, 0.0), (x_fc, height),
        (_divisions(x_fc, h_c, "homogeneous fem x"),
         max(2, int(round(height / h_c)))),
    )
    iface = mesh.boundary_tags["right"]
    inlet = np.setdiff1d(mesh.boundary_tags["left"], iface)
    dirichlet = {int(a): 1.0 for a in inlet}
    dirichlet.update({int(a): 0.0 for a in iface})
    system = assemble_supg(mesh, D, v=np.array([v_x, 0.0]),
                           dirichlet=dirichlet, dt_c=dt_c)
    d0 = np.zeros(mesh.n_nodes)
    d0[inlet] = 1.0
    fem = FemSubdomain(mesh, system, [initial_rate(system, d0)],
                       interface_ids=iface, name="coarse")

    model = builtin_model("D2Q4")
    nx = _divisions(length - x_cf, h_f, "homogeneous lbm x")
    ny = _divisions(height, h_f, "homogeneous lbm y")
    grid = LbmGrid(origin=(x_cf, 0.0), h=h_f, dims=(nx + 1, ny + 1))
    field = LbmField.from_equilibrium(grid, model, dt_f, D,
                                      np.zeros(grid.dims),
                                      velocity=np.array([v_x, 0.0]))
    walls = box_boundary(grid, {
        "right": ("entropy-neumann", 0.0),
        "bottom": ("entropy-neumann", 0.0),
        "top": ("entropy-neumann", 0.0),
    })
    nodes, ipatches = interface_wall_patch(grid, "left", 1)
    bset = BoundarySet(model, grid, walls + ipatches)
    lbm = LbmSubdomain([LbmSimulation(field, bset, D)],
                       interfaces=[InterfaceWall(nodes, ipatches)],
                       name="fine")
    return CoupledSystem([fem], [lbm], dt_c, max_iter)


def run_homogeneous_2d(v_x=0.5, h_c=0.03, h_f=5e-3, dt_c=5e-2,
                       dt_f=1.25e-3, max_iter=5, T=2.0, **kwargs):
    """Run the inlet-front problem, tracing the overlap incompatibility."""
    system = build_homogeneous_2d(v_x, h_c, h_f, dt_c, dt_f, max_iter,
                                  **kwargs)
    steps = _steps_to(T, dt_c)
    times, incompat = [], []

    def watch(_, sys_):
        times.append(sys_.time)
        incompat.append(sys_.overlap_incompatibility())

    system.run(steps, callback=watch)
    return {
        "system": system,
        "times": np.array(times),
        "incompatibility": np.array(incompat),
        "max_incompatibility": float(np.max(incompat)),
    }


# -- calcite dissolution in a pore geometry -------------------------------

_CALCITE_OBSTACLES = (
    (0.30, 0.30), (0.30, 0.70), (0.60, 0.50), (0.80, 0.20), (0.80, 0.80),
)


def build_calcite_2d(h_c=5e-2, h_f=2.5e-2, dt_c=0.1, dt_f=2e-3,
                     max_iter=3, D=0.1, v_x=1.0, L=0.1,
                     K_sp=None, t_ramp=2.0, r_obstacle=0.1,
                     velocity_file=None):
    """Pore-scale (LBM, with solid obstacles) to continuum (FEM) coupling.

    Domain (0, 2) x (0, 1): fine D2Q9 subdomain (0, 1 + L/2) with
    circular solid obstacles, coarse SUPG subdomain (1 - L/2, 2). The
    transported fields are the calcite invariants psi1 and psi2; the
    inlet x = 0 feeds psi1 = 1 and a psi2 ramp 0 -> 1 over t_ramp, so
    Ca2+ first spreads with the psi1 front and later recombines as the
    carbonate-rich front follows. Advection is uniform (v_x, 0) outside
    obstacles (or a CSV-loaded field), zero inside.
    """
    from ..chemistry import K_SP_CALCITE
    from .common import load_velocity_csv, nearest_velocity_field

    K_sp = K_SP_CALCITE if K_sp is None else K_sp
    x_fc = 1.0 + L / 2.0      # coarse edge inside the fine subdomain
    x_cf = 1.0 - L / 2.0      # fine edge inside the coarse subdomain

    model = builtin_model("D2Q9")
    nx = _divisions(x_fc, h_f, "calcite lbm x")
    ny = _divisions(1.0, h_f, "calcite lbm y")
    grid_probe = LbmGrid(origin=(0.0, 0.0), h=h_f, dims=(nx + 1, ny + 1))
    X = grid_probe.coords()
    solid = np.zeros(grid_probe.dims, dtype=bool)
    for cx, cy in _CALCITE_OBSTACLES:
        solid |= ((X[..., 0] - cx) ** 2 + (X[..., 1] - cy) ** 2
                  <= r_obstacle ** 2)
    grid = LbmGrid(origin=(0.0, 0.0), h=h_f, dims=(nx + 1, ny + 1),
                   solid=solid)
    if velocity_file is not None:
        pts, vels = load_velocity_csv(velocity_file)
        vel = nearest_velocity_field(grid, pts, vels)
    else:
        vel = np.zeros((2,) + grid.dims)
        vel[0] = np.where(solid, 0.0, v_x)

    def psi1_inlet(t):
        return 1.0

    def psi2_inlet(t):
        return min(t / t_ramp, 1.0)

    inlet_values = [psi1_inlet, psi2_inlet]
    nodes, ipatches = interface_wall_patch(grid, "right", 2)
    sims = []
    for s in range(2):
        field = LbmField.from_equilibrium(grid, model, dt_f, D,
                                          np.zeros(grid.dims), velocity=vel)
        walls = box_boundary(grid, {
            "left": ("entropy-dirichlet", inlet_values[s]),
            "bottom": ("entropy-neumann", 0.0),
            "top": ("entropy-neumann", 0.0),
        })
        bset = BoundarySet(model, grid, walls + [ipatches[s]])
        sims.append(LbmSimulation(field, bset, D))
    lbm = LbmSubdomain(sims,
                       interfaces=[InterfaceWall(nodes, ipatches)],
                       name="pore")

    mesh = structured_mesh(
        (x_cf, 0.0), (2.0, 1.0),
        (_divisions(2.0 - x_cf, h_c, "calcite fem x"),
         _divisions(1.0, h_c, "calcite fem y")),
    )
    iface = mesh.boundary_tags["left"]
    system = assemble_supg(mesh, D, v=np.array([v_x, 0.0]),
                           dirichlet={int(a): 0.0 for a in iface},
                           dt_c=dt_c)
    zero = np.zeros(mesh.n_nodes)
    fem = FemSubdomain(
        mesh, system,
        [initial_rate(system, zero), initial_rate(system, zero)],
        interface_ids=iface, name="continuum",
    )
    coupled = CoupledSystem([fem], [lbm], dt_c, max_iter)
    coupled.chem = CalciteSystem(K_sp)
    return coupled


def calcite_totals(system):
    """Composite total concentration of u1, u2, u3 at the current time.

    The overlap is split at x = 1: lattice weights cover the fine part,
    lumped mesh weights the coarse part.
    """
    lbm = system.lbm_domains[0]
    fem = system.fem_domains[0]
    chem = system.chem
    grid = lbm.grid
    w_lat = lattice_weights(grid)
    w_lat[grid.coords()[..., 0] > 1.0 + 1e-12] = 0.0
    psi1 = np.maximum(lbm.sims[0].field.f.sum(axis=0), 0.0)
    psi2 = np.maximum(lbm.sims[1].field.f.sum(axis=0), 0.0)
    u1, u2, u3 = calcite_recover(chem, psi1, psi2)
    totals = np.array([
        total_concentration(u1, w_lat),
        total_concentration(u2, w_lat),
        total_concentration(u3, w_lat),
    ])
    w_mesh = lumped_mesh_weights(fem.mesh)
    w_mesh[fem.mesh.nodes[:, 0] <= 1.0 + 1e-12] = 0.0
    p1 = np.maximum(fem.states[0].d, 0.0)
    p2 = np.maximum(fem.states[1].d, 0.0)
    u1, u2, u3 = calcite_recover(chem, p1, p2)
    totals += np.array([
        total_concentration(u1, w_mesh),
        total_concentration(u2, w_mesh),
        total_concentration(u3, w_mesh),
    ])
    return totals


def run_calcite_2d(T=4.0, **kwargs):
    """Run the calcite scenario, tracing composite species totals."""
    system = build_calcite_2d(**kwargs)
    steps = _steps_to(T, system.dt_c)
    times, traces = [], []

    def watch(_, sys_):
        times.append(sys_.time)
        traces.append(calcite_totals(sys_))

    times.append(0.0)
    traces.append(calcite_totals(system))
    system.run(steps, callback=watch)
    traces = np.array(traces)
    return {
        "system": system,
        "times": np.array(times),
        "C_total": traces,                       # columns: u1, u2, u3
        "C_normalized": traces / np.maximum(traces.max(axis=0), 1e-300),
    }
