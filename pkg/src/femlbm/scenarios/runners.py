"""Named, config-driven scenario runners.

Every runner takes a validated ScenarioConfig and returns a RunReport;
when `outdir` is given the report's tables and series are written as CSV
files plus a few SVG plots. Runners are registered in
femlbm.scenarios.registry.
"""

import os

import numpy as np

from ..errors import ConfigError
from ..lbm.core import max_stable_dt
from ..lattice import builtin_model
from . import experiments as ex
from .common import RunReport, emit_report, fit_order, timed
from .plots import line_plot


def _floats(cfg, section, key):
    raw = cfg.get_str(section, key)
    try:
        return [float(tok) for tok in raw.split()]
    except ValueError:
        raise ConfigError(
            [f"[{section}] {key} must be a whitespace-separated number list"]
        ) from None


def _maybe_float(cfg, section, key):
    return cfg.get_float(section, key) if cfg.has(section, key) else None


def _emit(report, outdir):
    if outdir:
        emit_report(report, outdir)
    return report


def _say(quiet, msg):
    if not quiet:
        print(msg)


# -- lbm-dirichlet-neumann ------------------------------------------------

def run_lbm_dirichlet_neumann(cfg, outdir=None, quiet=False):
    h = cfg.get_float("discretization", "h")
    dt = cfg.get_float("discretization", "dt")
    T = cfg.get_float("physics", "T", 0.25)
    report = RunReport("lbm-dirichlet-neumann",
                       params={"h": h, "dt": dt, "T": T})
    with timed(report):
        res = ex.run_lbm_mixed_bc(h, dt, T)
    report.metrics["E"] = res["E"]
    report.counters = res["counters"]
    mid = res["grid"].dims[1] // 2
    x = res["grid"].axis_coords(0)
    report.add_table("midline", ("x", "u", "u_exact"),
                     list(zip(x, res["u"][:, mid], res["exact"][:, mid])))
    _say(quiet, f"E({T}) = {res['E']:.6e}  ({res['steps']} steps)")
    return _emit(report, outdir)


def study_lbm_dirichlet_neumann(cfg, outdir=None, quiet=False):
    hs = _floats(cfg, "cases", "h_list")
    dts = _floats(cfg, "cases", "dt_list")
    if len(hs) != len(dts):
        raise ConfigError(["[cases] h_list and dt_list differ in length"])
    T = cfg.get_float("physics", "T", 0.25)
    report = RunReport("lbm-dirichlet-neumann-study", params={"T": T})
    rows = []
    with timed(report):
        for h, dt in zip(hs, dts):
            res = ex.run_lbm_mixed_bc(h, dt, T)
            rows.append((h, dt, res["E"]))
            _say(quiet, f"h = {h:g}  dt = {dt:g}  E = {res['E']:.6e}")
    order = fit_order([r[0] for r in rows], [r[2] for r in rows])
    report.metrics["order"] = order
    report.add_table("errors", ("h", "dt", "E"), rows)
    _say(quiet, f"fitted order = {order:.3f}")
    _emit(report, outdir)
    if outdir:
        path = os.path.join(outdir, f"{report.scenario}_convergence.svg")
        line_plot(path, [("E", np.array(hs), np.array([r[2] for r in rows]))],
                  xlabel="h", ylabel="E", logx=True, logy=True, ref_slope=2.0,
                  title="LBM convergence")
        report.outputs.append(path)
    return report


# -- lbm-box-h-theorem ----------------------------------------------------

def run_lbm_box_h_theorem(cfg, outdir=None, quiet=False):
    h = cfg.get_float("discretization", "h", 1e-2)
    dt = cfg.get_float("discretization", "dt", 2e-3)
    n_steps = cfg.get_int("discretization", "n_steps", 1000)
    D = cfg.get_float("physics", "D", 1e-2)
    model = cfg.get_str("discretization", "lattice", "D2Q9")
    report = RunReport("lbm-box-h-theorem",
                       params={"h": h, "dt": dt, "n_steps": n_steps, "D": D})
    with timed(report):
        res = ex.run_lbm_box(h, dt, n_steps, D, model)
    trace = res["h_trace"]
    report.metrics["h_initial"] = float(trace[0])
    report.metrics["h_final"] = float(trace[-1])
    report.metrics["max_h_increase"] = float(np.diff(trace).max())
    report.metrics["u_min"] = res["u_min"]
    report.add_series("h_trace", dt * np.arange(len(trace)), trace)
    _say(quiet,
         f"H: {trace[0]:.6f} -> {trace[-1]:.6f}; "
         f"max step increase = {np.diff(trace).max():.3e}; "
         f"min u = {res['u_min']:.3e}")
    _emit(report, outdir)
    if outdir:
        path = os.path.join(outdir, f"{report.scenario}_h_trace.svg")
        line_plot(path, [("H", dt * np.arange(len(trace)), trace)],
                  xlabel="t", ylabel="H", title="Boltzmann H function")
        report.outputs.append(path)
    return report


# -- lbm-bc-comparison ----------------------------------------------------

def run_lbm_bc_comparison(cfg, outdir=None, quiet=False):
    h = cfg.get_float("discretization", "h", 1.25e-2)
    dt = cfg.get_float("discretization", "dt", 0.5 / 33.0)
    T = cfg.get_float("physics", "T", 0.5)
    D = cfg.get_float("physics", "D", 1e-2)
    n_steps = int(round(T / dt))
    report = RunReport("lbm-bc-comparison",
                       params={"h": h, "dt": dt, "T": T, "D": D})
    fields = {}
    with timed(report):
        for kind in ("entropy-neumann", "bounce-back", "specular"):
            res = ex.run_lbm_box(h, dt, n_steps, D, "D2Q9", bc=kind,
                                 record_h=False)
            fields[kind] = res["u"]
        #1D: the entropy closure coincides with bounce-back for D1Q2
        res_en = ex.run_lbm_box(h, dt, n_steps, D, "D1Q2",
                                bc="entropy-neumann", record_h=False)
        res_bb = ex.run_lbm_box(h, dt, n_steps, D, "D1Q2",
                                bc="bounce-back", record_h=False)
    d_eb = float(np.abs(fields["entropy-neumann"] - fields["bounce-back"]).max())
    d_es = float(np.abs(fields["entropy-neumann"] - fields["specular"]).max())
    d_bs = float(np.abs(fields["bounce-back"] - fields["specular"]).max())
    d_1d = float(np.abs(res_en["u"] - res_bb["u"]).max())
    report.metrics.update({
        "d2q9_entropy_vs_bounce": d_eb,
        "d2q9_entropy_vs_specular": d_es,
        "d2q9_bounce_vs_specular": d_bs,
        "d1q2_entropy_vs_bounce": d_1d,
    })
    _say(quiet,
         f"D2Q9 max|du|: entropy-bounce {d_eb:.3e}, entropy-specular "
         f"{d_es:.3e}, bounce-specular {d_bs:.3e}; D1Q2 entropy-bounce "
         f"{d_1d:.3e}")
    return _emit(report, outdir)


# -- transfer-study -------------------------------------------------------

def run_transfer_study(cfg, outdir=None, quiet=False):
    direction = cfg.get_str("study", "direction", "both")
    report = RunReport("transfer-study", params={"direction": direction})

    def one(tag, key_h, key_hp):
        hs = _floats(cfg, "study", key_h)
        hps = _floats(cfg, "study", key_hp)
        if len(hs) != len(hps):
            raise ConfigError([f"[study] {key_h} and {key_hp} differ in length"])
        rows = ex.run_transfer_study(tag, list(zip(hs, hps)))
        table = [(r["h"], r["h_prime"], r["E"]) for r in rows]
        report.add_table(tag.replace("-", "_"), ("h", "h_prime", "E"), table)
        varying = [r["h"] if tag == "fem-to-lbm" else r["h_prime"] for r in rows]
        errors = [r["E"] for r in rows]
        if len(rows) > 1 and min(errors) > 0.0:
            report.metrics[f"order_{tag}"] = fit_order(varying, errors)
        for r in rows:
            _say(quiet, f"{tag}: h = {r['h']:g}  h' = {r['h_prime']:g}  "
                        f"E = {r['E']:.6e}")

    with timed(report):
        if direction in ("fem-to-lbm", "both"):
            one("fem-to-lbm", "h_list_c2f", "hp_list_c2f")
        if direction in ("lbm-to-fem", "both"):
            one("lbm-to-fem", "h_list_f2c", "hp_list_f2c")
        if direction not in ("fem-to-lbm", "lbm-to-fem", "both"):
            raise ConfigError([f"unknown direction {direction!r}"])
    return _emit(report, outdir)


# -- gauss-1d -------------------------------------------------------------

def _gauss_params(cfg):
    return {
        "h_c": cfg.get_float("discretization", "h_c", 1e-2),
        "h_f": cfg.get_float("discretization", "h_f", 5e-3),
        "L": cfg.get_float("discretization", "L_overlap", 0.1),
        "max_iter": cfg.get_int("discretization", "max_iter", 4),
        "dt_c": _maybe_float(cfg, "discretization", "dt_c"),
        "dt_f": _maybe_float(cfg, "discretization", "dt_f"),
        "T": cfg.get_float("physics", "T", 0.4),
        "D": cfg.get_float("physics", "D", 1e-2),
        "v": cfg.get_float("physics", "v", 1.0),
        "phi": cfg.get_float("physics", "phi", 0.1),
        "sigma0": cfg.get_float("physics", "sigma0", 0.01),
        "x0": cfg.get_float("physics", "x0", 0.3),
    }


def run_gauss_1d(cfg, outdir=None, quiet=False):
    p = _gauss_params(cfg)
    report = RunReport("gauss-1d", params=dict(p))
    with timed(report):
        res = ex.run_gauss_1d(**p)
    report.metrics["E_c"] = res["E_c"]
    report.metrics["E_f"] = res["E_f"]
    report.counters = dict(
        res["system"].lbm_domains[0].sims[0].boundaries.counters
    )
    report.add_table("coarse", ("x", "u"), list(zip(res["x_c"], res["u_c"])))
    report.add_table("fine", ("x", "u"), list(zip(res["x_f"], res["u_f"])))
    _say(quiet, f"E_c = {res['E_c']:.6e}  E_f = {res['E_f']:.6e}")
    _emit(report, outdir)
    if outdir:
        path = os.path.join(outdir, f"{report.scenario}_profiles.svg")
        line_plot(path, [("coarse", res["x_c"], res["u_c"]),
                         ("fine", res["x_f"], res["u_f"])],
                  xlabel="x", ylabel="u", title="Gaussian hill at T")
        report.outputs.append(path)
    return report


def _gauss_study(cfg, outdir, quiet, name, vary):
    """Shared driver for the hill parameter studies.

    `vary` yields (label value, parameter overrides) rows.
    """
    base = _gauss_params(cfg)
    report = RunReport(name, params=dict(base))
    rows = []
    with timed(report):
        for label, over in vary:
            p = dict(base)
            p.update(over)
            res = ex.run_gauss_1d(**p)
            rows.append((label, res["E_c"], res["E_f"]))
            _say(quiet, f"{label:g}: E_c = {res['E_c']:.6e}  "
                        f"E_f = {res['E_f']:.6e}")
    report.add_table("errors", ("level", "E_c", "E_f"), rows)
    return report, rows


def study_gauss_1d_fine(cfg, outdir=None, quiet=False):
    levels = _floats(cfg, "cases", "h_f_list")
    report, rows = _gauss_study(cfg, outdir, quiet, "gauss-1d-study-fine",
                                [(h_f, {"h_f": h_f}) for h_f in levels])
    return _emit(report, outdir)


def study_gauss_1d_coarse(cfg, outdir=None, quiet=False):
    levels = _floats(cfg, "cases", "h_c_list")
    report, rows = _gauss_study(cfg, outdir, quiet, "gauss-1d-study-coarse",
                                [(h_c, {"h_c": h_c}) for h_c in levels])
    return _emit(report, outdir)


def study_gauss_1d_overlap(cfg, outdir=None, quiet=False):
    levels = _floats(cfg, "cases", "L_list")
    report, rows = _gauss_study(cfg, outdir, quiet, "gauss-1d-study-overlap",
                                [(L, {"L": L}) for L in levels])
    return _emit(report, outdir)


def study_gauss_1d_order(cfg, outdir=None, quiet=False):
    levels = _floats(cfg, "cases", "h_c_list")
    report, rows = _gauss_study(
        cfg, outdir, quiet, "gauss-1d-study-order",
        [(h_c, {"h_c": h_c, "h_f": h_c / 2.0}) for h_c in levels],
    )
    hs = [r[0] for r in rows]
    report.metrics["order_E_c"] = fit_order(hs, [r[1] for r in rows])
    report.metrics["order_E_f"] = fit_order(hs, [r[2] for r in rows])
    _say(quiet, f"fitted orders: E_c {report.metrics['order_E_c']:.3f}, "
                f"E_f {report.metrics['order_E_f']:.3f}")
    _emit(report, outdir)
    if outdir:
        path = os.path.join(outdir, f"{report.scenario}_convergence.svg")
        line_plot(path,
                  [("E_c", np.array(hs), np.array([r[1] for r in rows])),
                   ("E_f", np.array(hs), np.array([r[2] for r in rows]))],
                  xlabel="h_c", ylabel="E", logx=True, logy=True,
                  ref_slope=1.0, title="Hybrid convergence")
        report.outputs.append(path)
    return report


# -- bimolecular-1d -------------------------------------------------------

def run_bimolecular_1d(cfg, outdir=None, quiet=False):
    params = {
        "h_c": cfg.get_float("discretization", "h_c", 1e-2),
        "dt_c": cfg.get_float("discretization", "dt_c", 5e-3),
        "h_f": cfg.get_float("discretization", "h_f", 1e-3),
        "dt_f": cfg.get_float("discretization", "dt_f", 5e-5),
        "max_iter": cfg.get_int("discretization", "max_iter", 10),
        "D": cfg.get_float("physics", "D", 1e-2),
    }
    raw_times = cfg.get_str("output", "sample_times", "0.1 0.25 0.5")
    sample_times = tuple(float(t) for t in raw_times.split())
    report = RunReport("bimolecular-1d", params=dict(params))
    with timed(report):
        res = ex.run_bimolecular(sample_times=sample_times, **params)
    ints = res["integrals"]
    report.add_table("invariant_integrals", ("t", "int_alpha", "int_beta"),
                     list(zip(ints["t"], ints["alpha"], ints["beta"])))
    for t, snap in res["snapshots"].items():
        report.add_table(
            f"species_t{t:g}".replace(".", "p"),
            ("x", "u_A", "u_B", "u_C"),
            list(zip(snap["x"], snap["u_A"], snap["u_B"], snap["u_C"])),
        )
        report.metrics[f"min_species_t{t:g}"] = float(
            min(snap["u_A"].min(), snap["u_B"].min(), snap["u_C"].min())
        )
        report.metrics[f"x_max_uC_t{t:g}"] = float(
            snap["x"][int(np.argmax(snap["u_C"]))]
        )
    a0, b0 = ints["alpha"][0], ints["beta"][0]
    report.metrics["alpha_drift"] = float(
        max(abs(a - a0) for a in ints["alpha"]) / a0
    )
    report.metrics["beta_drift"] = float(
        max(abs(b - b0) for b in ints["beta"]) / b0
    )
    _say(quiet, f"alpha drift = {report.metrics['alpha_drift']:.3e}, "
                f"beta drift = {report.metrics['beta_drift']:.3e}")
    _emit(report, outdir)
    if outdir:
        t_last = max(res["snapshots"])
        snap = res["snapshots"][t_last]
        path = os.path.join(outdir, f"{report.scenario}_species.svg")
        line_plot(path, [("u_A", snap["x"], snap["u_A"]),
                         ("u_B", snap["x"], snap["u_B"]),
                         ("u_C", snap["x"], snap["u_C"])],
                  xlabel="x", ylabel="u", title=f"species at t = {t_last:g}")
        report.outputs.append(path)
    return report


# -- homogeneous-2d -------------------------------------------------------

def run_homogeneous_2d(cfg, outdir=None, quiet=False):
    params = {
        "v_x": cfg.get_float("physics", "v_x"),
        "h_c": cfg.get_float("discretization", "h_c"),
        "h_f": cfg.get_float("discretization", "h_f"),
        "dt_c": cfg.get_float("discretization", "dt_c"),
        "dt_f": cfg.get_float("discretization", "dt_f"),
        "max_iter": cfg.get_int("discretization", "max_iter", 5),
        "T": cfg.get_float("physics", "T"),
        "L": cfg.get_float("discretization", "L_overlap", 0.04),
        "D": cfg.get_float("physics", "D", 5e-3),
    }
    name = cfg.get_str("scenario", "name", "homogeneous-2d")
    report = RunReport(name, params=dict(params))
    with timed(report):
        res = ex.run_homogeneous_2d(**params)
    report.metrics["max_incompatibility"] = res["max_incompatibility"]
    report.add_series("incompatibility", res["times"], res["incompatibility"])
    _say(quiet,
         f"max overlap incompatibility = {res['max_incompatibility']:.6e}")
    _emit(report, outdir)
    if outdir:
        path = os.path.join(outdir, f"{report.scenario}_incompatibility.svg")
        line_plot(path, [("max |u_c - u_f|", res["times"],
                          res["incompatibility"])],
                  xlabel="t", ylabel="incompatibility",
                  title="overlap incompatibility")
        report.outputs.append(path)
    return report


# -- calcite-2d -----------------------------------------------------------

def run_calcite_2d(cfg, outdir=None, quiet=False):
    params = {
        "h_c": cfg.get_float("discretization", "h_c", 5e-2),
        "h_f": cfg.get_float("discretization", "h_f", 2.5e-2),
        "dt_c": cfg.get_float("discretization", "dt_c", 0.1),
        "dt_f": cfg.get_float("discretization", "dt_f", 2e-3),
        "max_iter": cfg.get_int("discretization", "max_iter", 3),
        "L": cfg.get_float("discretization", "L_overlap", 0.1),
        "D": cfg.get_float("physics", "D", 0.1),
        "v_x": cfg.get_float("physics", "v_x", 1.0),
        "K_sp": _maybe_float(cfg, "chemistry", "K_sp"),
        "t_ramp": cfg.get_float("physics", "t_ramp", 2.0),
        "T": cfg.get_float("physics", "T", 4.0),
    }
    vfile = cfg.raw("physics", "velocity_file")
    if vfile:
        params["velocity_file"] = vfile
    report = RunReport("calcite-2d", params={
        k: v for k, v in params.items() if not isinstance(v, str)
    })
    with timed(report):
        res = ex.run_calcite_2d(**params)
    C = res["C_total"]
    Cn = res["C_normalized"]
    report.add_table("c_total", ("t", "u1", "u2", "u3"),
                     list(zip(res["times"], C[:, 0], C[:, 1], C[:, 2])))
    report.add_table("c_normalized", ("t", "u1", "u2", "u3"),
                     list(zip(res["times"], Cn[:, 0], Cn[:, 1], Cn[:, 2])))
    report.metrics["u2_final_over_peak"] = float(Cn[-1, 1])
    report.metrics["u1_final_over_peak"] = float(Cn[-1, 0])
    report.metrics["u3_final_over_peak"] = float(Cn[-1, 2])
    _say(quiet,
         "normalized totals at T: "
         f"u1 {Cn[-1, 0]:.3f}, u2 {Cn[-1, 1]:.3f}, u3 {Cn[-1, 2]:.3f}")
    _emit(report, outdir)
    if outdir:
        path = os.path.join(outdir, f"{report.scenario}_c_total.svg")
        line_plot(path, [("CaCO3", res["times"], Cn[:, 0]),
                         ("Ca2+", res["times"], Cn[:, 1]),
                         ("CO3^2-", res["times"], Cn[:, 2])],
                  xlabel="t", ylabel="C_total / max",
                  title="normalized total concentrations")
        report.outputs.append(path)
    return report
