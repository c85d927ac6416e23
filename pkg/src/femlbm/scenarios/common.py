"""Shared scenario plumbing: exact solutions, reports, CSV output."""

import csv
import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from ..errors import ConfigError

#all floats are written with 17 significant digits (round-trip exact)
_FMT = "{:.17g}"


def exact_gaussian_hill(x, t, phi, sigma0, x0, v, D):
    """Free-space advection-diffusion evolution of a Gaussian pulse.

    Initial condition phi/sqrt(2 pi sigma0^2) exp(-(x-x0)^2 / 2 sigma0^2);
    at time t the pulse has drifted by v t and spread to variance
    s^2 = sigma0^2 + 2 D t while conserving its integral phi.
    """
    x = np.asarray(x, float)
    s2 = sigma0 * sigma0 + 2.0 * D * t
    return phi / np.sqrt(2.0 * np.pi * s2) * np.exp(
        -((x - x0 - v * t) ** 2) / (2.0 * s2)
    )


def max_error(numeric, exact):
    """E = max_i |u_i - u_exact,i| (the paper-style nodal max norm)."""
    numeric = np.asarray(numeric, float)
    exact = np.asarray(exact, float)
    return float(np.abs(numeric - exact).max())


def fit_order(h_values, errors):
    """Least-squares slope of log(error) against log(h)."""
    h_values = np.asarray(h_values, float)
    errors = np.asarray(errors, float)
    if len(h_values) < 2:
        raise ValueError("order fit needs at least two levels")
    if np.any(errors <= 0.0) or np.any(h_values <= 0.0):
        raise ValueError("order fit needs positive h and errors")
    slope, _ = np.polyfit(np.log(h_values), np.log(errors), 1)
    return float(slope)


@dataclass
class RunReport:
    """Everything a scenario run produces, ready for CSV emission.

    `metrics` holds named scalars (error norms, fitted orders, ...);
    `tables` maps a table name to (header tuple, list of rows);
    `series` maps a trace name to (x array, y array); `counters` carries
    clamp/degeneracy counts from the solvers.
    """

    scenario: str
    params: dict = dc_field(default_factory=dict)
    metrics: dict = dc_field(default_factory=dict)
    tables: dict = dc_field(default_factory=dict)
    series: dict = dc_field(default_factory=dict)
    counters: dict = dc_field(default_factory=dict)
    wall_time: float = 0.0
    outputs: list = dc_field(default_factory=list)

    def add_table(self, name, header, rows):
        self.tables[name] = (tuple(header), [tuple(r) for r in rows])

    def add_series(self, name, x, y):
        self.series[name] = (np.asarray(x, float), np.asarray(y, float))


def _cell(value):
    if isinstance(value, (float, np.floating)):
        return _FMT.format(float(value))
    return str(value)


def write_csv(path, header, rows):
    """Deterministic CSV: header row then rows, floats at 17 digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def emit_report(report, outdir):
    """Write every table and series of a report as CSV files in outdir."""
    import os

    os.makedirs(outdir, exist_ok=True)
    for name, (header, rows) in report.tables.items():
        path = os.path.join(outdir, f"{report.scenario}_{name}.csv")
        write_csv(path, header, rows)
        report.outputs.append(path)
    for name, (x, y) in report.series.items():
        path = os.path.join(outdir, f"{report.scenario}_{name}.csv")
        write_csv(path, ("x", "y"), list(zip(x, y)))
        report.outputs.append(path)
    if report.metrics or report.counters:
        path = os.path.join(outdir, f"{report.scenario}_metrics.csv")
        rows = [(k, v) for k, v in sorted(report.metrics.items())]
        rows += [(f"counter:{k}", v) for k, v in sorted(report.counters.items())]
        write_csv(path, ("name", "value"), rows)
        report.outputs.append(path)
    return report


def load_velocity_csv(path):
    """Velocity samples from a CSV with one 'x,y,vx,vy' row per point.

    Returns (points (n, 2), velocities (n, 2)). A header row is allowed
    and detected by non-numeric first field.
    """
    pts, vels = [], []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (lineno == 1 and not _is_number(row[0])):
                continue
            if len(row) < 4:
                raise ConfigError(
                    [f"{path}:{lineno}: expected 4 columns x,y,vx,vy"]
                )
            try:
                x, y, vx, vy = (float(c) for c in row[:4])
            except ValueError:
                raise ConfigError(
                    [f"{path}:{lineno}: non-numeric velocity record"]
                ) from None
            pts.append((x, y))
            vels.append((vx, vy))
    if not pts:
        raise ConfigError([f"{path}: no velocity samples found"])
    return np.array(pts), np.array(vels)


def nearest_velocity_field(grid, points, velocities):
    """Sample scattered velocity data onto a lattice by nearest neighbor."""
    coords = grid.coords().reshape(-1, grid.dim)
    out = np.empty((len(coords), velocities.shape[1]))
    for k, x in enumerate(coords):
        j = int(np.argmin(((points - x) ** 2).sum(axis=1)))
        out[k] = velocities[j]
    return out.T.reshape((velocities.shape[1],) + grid.dims)


def _is_number(s):
    try:
        float(s)
        return True
    except ValueError:
        return False


class timed:
    """Context manager recording elapsed wall time into report.wall_time."""

    def __init__(self, report):
        self.report = report

    def __enter__(self):
        self._t0 = time.perf_counter()
        return self.report

    def __exit__(self, *exc):
        self.report.wall_time = time.perf_counter() - self._t0
        return False
