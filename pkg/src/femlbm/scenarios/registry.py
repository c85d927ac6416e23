"""Built-in scenario registry: default configs, validation, dispatch."""

from dataclasses import dataclass

from ..errors import ConfigError
from ..lattice import MODEL_NAMES, builtin_model
from ..lbm.core import max_stable_dt
from . import runners
from .config import ScenarioConfig, parse_config


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    kind: str                 # "run" or "study"
    runner: object
    default_text: str
    description: str


def _check_positive(cfg, section, key, errors, required=False):
    if not cfg.has(section, key):
        if required:
            errors.append(f"missing required key [{section}] {key}")
        return None
    try:
        val = cfg.get_float(section, key)
    except ConfigError as exc:
        errors.extend(exc.messages)
        return None
    if val <= 0:
        errors.append(f"[{section}] {key} = {val} must be positive")
        return None
    return val


def _check_lattice(cfg, errors):
    name = cfg.get_str("discretization", "lattice", "D2Q9")
    if name not in MODEL_NAMES:
        errors.append(
            f"[discretization] lattice = {name!r} not one of {MODEL_NAMES}"
        )
        return None
    return name


def _check_dt_bound(errors, dt, h, D, lattice, label, slack=1e-9):
    if None in (dt, h, D) or lattice is None:
        return
    model = builtin_model(lattice)
    bound = max_stable_dt(D, model.cs2_coeff, h)
    if dt < bound * (1.0 - slack):
        errors.append(
            f"{label}: dt = {dt:g} is below the non-negativity bound "
            f"{bound:.6g} for h = {h:g}, D = {D:g} ({lattice})"
        )


def _check_eta(errors, dt_c, dt_f):
    if None in (dt_c, dt_f):
        return
    eta = dt_c / dt_f
    if abs(eta - round(eta)) > 1e-12 * max(1.0, eta):
        errors.append(
            f"dt_c / dt_f = {eta!r} must be an integer (eta substeps)"
        )


def _validate_lbm_single(cfg):
    errors = []
    lattice = _check_lattice(cfg, errors)
    h = _check_positive(cfg, "discretization", "h", errors, required=True)
    dt = _check_positive(cfg, "discretization", "dt", errors, required=True)
    D = _check_positive(cfg, "physics", "D", errors) or runners.ex.D_MIXED_BC
    _check_positive(cfg, "physics", "T", errors)
    #tabulated dt values are 2-digit roundings of the tau = 1 bound and
    #may fall up to 1% short of it; mirror the runner's slack
    _check_dt_bound(errors, dt, h, D, lattice, "[discretization]", slack=1e-2)
    return errors


def _validate_lbm_study(cfg):
    errors = []
    lattice = _check_lattice(cfg, errors)
    try:
        hs = runners._floats(cfg, "cases", "h_list")
        dts = runners._floats(cfg, "cases", "dt_list")
    except ConfigError as exc:
        return exc.messages
    if len(hs) != len(dts):
        errors.append("[cases] h_list and dt_list differ in length")
        return errors
    D = runners.ex.D_MIXED_BC
    for h, dt in zip(hs, dts):
        _check_dt_bound(errors, dt, h, D, lattice, "[cases]", slack=1e-2)
    return errors


def _validate_box(cfg):
    errors = []
    lattice = _check_lattice(cfg, errors)
    h = _check_positive(cfg, "discretization", "h", errors) or 1e-2
    dt = _check_positive(cfg, "discretization", "dt", errors) or 2e-3
    D = _check_positive(cfg, "physics", "D", errors) or 1e-2
    _check_dt_bound(errors, dt, h, D, lattice, "[discretization]")
    return errors


def _validate_transfer(cfg):
    errors = []
    direction = cfg.get_str("study", "direction", "both")
    if direction not in ("fem-to-lbm", "lbm-to-fem", "both"):
        errors.append(f"[study] direction = {direction!r} invalid")
    for tag, key_h, key_hp in (
        ("fem-to-lbm", "h_list_c2f", "hp_list_c2f"),
        ("lbm-to-fem", "h_list_f2c", "hp_list_f2c"),
    ):
        if direction in (tag, "both"):
            try:
                hs = runners._floats(cfg, "study", key_h)
                hps = runners._floats(cfg, "study", key_hp)
            except ConfigError as exc:
                errors.extend(exc.messages)
                continue
            if len(hs) != len(hps):
                errors.append(f"[study] {key_h} and {key_hp} differ in length")
    return errors


def _validate_gauss(cfg, list_key=None):
    errors = []
    h_c = _check_positive(cfg, "discretization", "h_c", errors) or 1e-2
    h_f = _check_positive(cfg, "discretization", "h_f", errors) or 5e-3
    L = _check_positive(cfg, "discretization", "L_overlap", errors) or 0.1
    D = _check_positive(cfg, "physics", "D", errors) or 1e-2
    dt_c = runners._maybe_float(cfg, "discretization", "dt_c")
    dt_f = runners._maybe_float(cfg, "discretization", "dt_f")
    if dt_c is None:
        dt_c = h_c * h_c / (2.0 * D)
    if dt_f is None:
        dt_f = h_f * h_f / (2.0 * D)
    _check_dt_bound(errors, dt_f, h_f, D, "D1Q2", "fine subdomain")
    _check_eta(errors, dt_c, dt_f)
    if cfg.has("discretization", "max_iter"):
        try:
            if cfg.get_int("discretization", "max_iter") < 1:
                errors.append("[discretization] max_iter must be >= 1")
        except ConfigError as exc:
            errors.extend(exc.messages)
    if list_key is not None:
        try:
            runners._floats(cfg, "cases", list_key)
        except ConfigError as exc:
            errors.extend(exc.messages)
    return errors


def _validate_bimolecular(cfg):
    errors = []
    h_f = _check_positive(cfg, "discretization", "h_f", errors) or 1e-3
    dt_c = _check_positive(cfg, "discretization", "dt_c", errors) or 5e-3
    dt_f = _check_positive(cfg, "discretization", "dt_f", errors) or 5e-5
    D = _check_positive(cfg, "physics", "D", errors) or 1e-2
    _check_dt_bound(errors, dt_f, h_f, D, "D1Q2", "fine subdomain")
    _check_eta(errors, dt_c, dt_f)
    return errors


def _validate_homogeneous(cfg):
    errors = []
    for key in ("h_c", "h_f", "dt_c", "dt_f"):
        _check_positive(cfg, "discretization", key, errors, required=True)
    for key in ("v_x", "T"):
        _check_positive(cfg, "physics", key, errors, required=True)
    L = _check_positive(cfg, "discretization", "L_overlap", errors) or 0.04
    D = _check_positive(cfg, "physics", "D", errors) or 5e-3
    h_f = runners._maybe_float(cfg, "discretization", "h_f")
    dt_f = runners._maybe_float(cfg, "discretization", "dt_f")
    dt_c = runners._maybe_float(cfg, "discretization", "dt_c")
    _check_dt_bound(errors, dt_f, h_f, D, "D2Q4", "fine subdomain")
    _check_eta(errors, dt_c, dt_f)
    return errors


def _validate_calcite(cfg):
    errors = []
    h_f = _check_positive(cfg, "discretization", "h_f", errors) or 2.5e-2
    dt_c = _check_positive(cfg, "discretization", "dt_c", errors) or 0.1
    dt_f = _check_positive(cfg, "discretization", "dt_f", errors) or 2e-3
    D = _check_positive(cfg, "physics", "D", errors) or 0.1
    _check_positive(cfg, "chemistry", "K_sp", errors)
    _check_dt_bound(errors, dt_f, h_f, D, "D2Q9", "fine subdomain")
    _check_eta(errors, dt_c, dt_f)
    return errors


_SPECS = {}
_VALIDATORS = {}


def _register(name, kind, runner, validator, default_text, description):
    _SPECS[name] = ScenarioSpec(name, kind, runner, default_text, description)
    _VALIDATORS[name] = validator


_register(
    "lbm-dirichlet-neumann", "run", runners.run_lbm_dirichlet_neumann,
    _validate_lbm_single,
    """[scenario]
name = lbm-dirichlet-neumann

[discretization]
lattice = D2Q9
h = 0.04
dt = 0.0033

[physics]
T = 0.25
""",
    "Single-domain LBM decay problem with mixed entropy boundary "
    "conditions on the unit square.",
)

_register(
    "lbm-dirichlet-neumann-study", "study",
    runners.study_lbm_dirichlet_neumann, _validate_lbm_study,
    """[scenario]
name = lbm-dirichlet-neumann-study

[discretization]
lattice = D2Q9

[physics]
T = 0.25

[cases]
h_list = 0.04 0.02 0.01 0.005
dt_list = 0.0033 0.00082 0.00021 0.000052
""",
    "Convergence study over four discretizations of the mixed-BC decay "
    "problem; fits the log-log order.",
)

_register(
    "lbm-box-h-theorem", "run", runners.run_lbm_box_h_theorem, _validate_box,
    """[scenario]
name = lbm-box-h-theorem

[discretization]
lattice = D2Q9
h = 0.01
dt = 0.002
n_steps = 1000

[physics]
D = 0.01
""",
    "Square-pulse relaxation in a zero-flux box; records the Boltzmann "
    "H-function trace and the concentration minimum.",
)

_register(
    "lbm-bc-comparison", "run", runners.run_lbm_bc_comparison, _validate_box,
    """[scenario]
name = lbm-bc-comparison

[discretization]
lattice = D2Q9
h = 0.0125
dt = 0.015151515151515152

[physics]
D = 0.01
T = 0.5
""",
    "Entropy-Neumann vs bounce-back vs specular wall closures on the box "
    "problem (D2Q9), plus the D1Q2 entropy/bounce-back coincidence.",
)

_register(
    "transfer-study", "study", runners.run_transfer_study, _validate_transfer,
    """[scenario]
name = transfer-study

[study]
direction = both
h_list_c2f = 0.1 0.04 0.02
hp_list_c2f = 0.01 0.01 0.01
h_list_f2c = 0.04 0.04 0.04
hp_list_f2c = 0.02 0.01 0.005
""",
    "Interpolation error of sin(2 pi x) sin(2 pi y) across non-matching "
    "grids in both transfer directions.",
)

_GAUSS_BASE = """[discretization]
h_c = 0.01
h_f = {h_f}
L_overlap = {L}
max_iter = {max_iter}

[physics]
T = 0.4
D = 0.01
v = 1.0
phi = 0.1
sigma0 = 0.01
x0 = 0.3
"""

_register(
    "gauss-1d", "run", runners.run_gauss_1d, _validate_gauss,
    "[scenario]\nname = gauss-1d\n\n"
    + _GAUSS_BASE.format(h_f=0.005, L=0.1, max_iter=4),
    "Hybrid FEM/LBM transport of a 1D Gaussian hill across the subdomain "
    "interface; reports E_c and E_f against the free-space exact solution.",
)

_register(
    "gauss-1d-study-fine", "study", runners.study_gauss_1d_fine,
    lambda cfg: _validate_gauss(cfg, "h_f_list"),
    "[scenario]\nname = gauss-1d-study-fine\n\n"
    + _GAUSS_BASE.format(h_f=0.005, L=0.1, max_iter=4)
    + "\n[cases]\nh_f_list = 0.005 0.0025 0.00125 0.000625\n",
    "Hill errors under fine-grid-only refinement at fixed h_c.",
)

_register(
    "gauss-1d-study-coarse", "study", runners.study_gauss_1d_coarse,
    lambda cfg: _validate_gauss(cfg, "h_c_list"),
    "[scenario]\nname = gauss-1d-study-coarse\n\n"
    + _GAUSS_BASE.format(h_f=0.00125, L=0.1, max_iter=4)
    + "\n[cases]\nh_c_list = 0.01 0.005 0.0025 0.00125\n",
    "Hill errors under coarse-grid-only refinement at fixed h_f.",
)

_register(
    "gauss-1d-study-overlap", "study", runners.study_gauss_1d_overlap,
    lambda cfg: _validate_gauss(cfg, "L_list"),
    "[scenario]\nname = gauss-1d-study-overlap\n\n"
    + _GAUSS_BASE.format(h_f=0.00125, L=0.1, max_iter=4)
    + "\n[cases]\nL_list = 0.02 0.04 0.08 0.1\n",
    "Hill errors for increasing overlap lengths.",
)

_register(
    "gauss-1d-study-order", "study", runners.study_gauss_1d_order,
    lambda cfg: _validate_gauss(cfg, "h_c_list"),
    "[scenario]\nname = gauss-1d-study-order\n\n"
    + _GAUSS_BASE.format(h_f=0.005, L=0.04, max_iter=10)
    + "\n[cases]\nh_c_list = 0.01 0.005 0.0025 0.00125\n",
    "Simultaneous refinement h_c = 2 h_f; fits the hybrid order.",
)

_register(
    "bimolecular-1d", "run", runners.run_bimolecular_1d,
    _validate_bimolecular,
    """[scenario]
name = bimolecular-1d

[discretization]
h_c = 0.01
dt_c = 0.005
h_f = 0.001
dt_f = 0.00005
max_iter = 10

[physics]
D = 0.01

[output]
sample_times = 0.1 0.25 0.5
""",
    "Fast bimolecular reaction A + 2B -> C on three subdomains; "
    "transports the reaction invariants and recovers the species.",
)

_register(
    "homogeneous-2d-pe20", "run", runners.run_homogeneous_2d,
    _validate_homogeneous,
    """[scenario]
name = homogeneous-2d-pe20

[discretization]
h_c = 0.06
h_f = 0.01
dt_c = 0.51
dt_f = 0.01
L_overlap = 0.04
max_iter = 5

[physics]
D = 0.005
v_x = 0.05
T = 10.2
""",
    "Inlet front at Peclet 20: coarse SUPG subdomain feeding a fine D2Q4 "
    "subdomain through the overlap.",
)

_register(
    "homogeneous-2d-pe200", "run", runners.run_homogeneous_2d,
    _validate_homogeneous,
    """[scenario]
name = homogeneous-2d-pe200

[discretization]
h_c = 0.03
h_f = 0.005
dt_c = 0.05
dt_f = 0.00125
L_overlap = 0.04
max_iter = 5

[physics]
D = 0.005
v_x = 0.5
T = 2.0
""",
    "Inlet front at Peclet 200 with a steep concentration front crossing "
    "the subdomain interface; traces the overlap incompatibility.",
)

_register(
    "calcite-2d", "run", runners.run_calcite_2d, _validate_calcite,
    """[scenario]
name = calcite-2d

[discretization]
h_c = 0.05
h_f = 0.025
dt_c = 0.1
dt_f = 0.002
L_overlap = 0.1
max_iter = 3

[physics]
D = 0.1
v_x = 1.0
t_ramp = 2.0
T = 4.0

[chemistry]
K_sp = 3.36e-9
""",
    "Calcite dissolution invariants transported through a pore-scale LBM "
    "subdomain with solid obstacles into a continuum FEM subdomain.",
)


def scenario_names():
    return sorted(_SPECS)


def get_spec(name):
    if name not in _SPECS:
        raise ConfigError(
            [f"unknown scenario {name!r}; available: "
             + ", ".join(scenario_names())]
        )
    return _SPECS[name]


def default_config(name):
    return parse_config(get_spec(name).default_text)


def validate_config(cfg):
    """All validation messages for a config (empty list means valid)."""
    errors = []
    name = cfg.get_str("scenario", "name", None) if cfg.has("scenario", "name") \
        else None
    if name is None:
        return ["missing required key [scenario] name"]
    if name not in _SPECS:
        return [f"unknown scenario {name!r}; available: "
                + ", ".join(scenario_names())]
    errors.extend(_VALIDATORS[name](cfg))
    return errors


def run_scenario(cfg, outdir=None, quiet=False):
    """Validate then dispatch a config to its scenario runner."""
    errors = validate_config(cfg)
    if errors:
        raise ConfigError(errors)
    spec = get_spec(cfg.get_str("scenario", "name"))
    return spec.runner(cfg, outdir=outdir, quiet=quiet)
