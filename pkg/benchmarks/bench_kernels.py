"""Benchmark the compiled collision kernel against the numpy fallback.

Runs the same BGK advection-diffusion collision workload through both
kernel lanes and reports throughput (million lattice-site updates per
second) plus the maximum relative deviation between the two results.

Usage:
    python3 benchmarks/bench_kernels.py [--sizes 64 128 256] [--repeats 5]

The lane used by the rest of the package is chosen at import time; this
script imports both lanes explicitly so it works regardless of the
FEMLBM_FORCE_PYTHON setting.
"""

import argparse
import importlib
import time

import numpy as np

from femlbm.lattice import builtin_model


def _load_lanes():
    lanes = {}
    np_mod = importlib.import_module("femlbm.lbm.kernels_np")
    lanes[np_mod.BACKEND] = np_mod
    try:
        c_mod = importlib.import_module("femlbm.lbm._kernels")
    except ImportError:
        print("compiled extension not importable; benchmarking fallback only")
    else:
        lanes[c_mod.BACKEND] = c_mod
    return lanes


def _workload(model_name, n_side, rng):
    model = builtin_model(model_name)
    dim = model.dim
    n = n_side ** dim if dim > 1 else n_side * n_side
    u = rng.uniform(0.2, 1.0, size=n)
    vlat = rng.uniform(-0.05, 0.05, size=(dim, n))
    w = model.weights
    e = model.velocities.astype(float)
    c2 = 1.0 / model.cs2_coeff
    ev = e @ vlat
    f = w[:, None] * u * (1.0 + ev * c2)
    return model, f, vlat


def bench(model_name, n_side, repeats, steps, rng):
    lanes = _load_lanes()
    model, f0, vlat = _workload(model_name, n_side, rng)
    inv_tau = 1.0 / 1.25
    results = {}
    rates = {}
    for name, mod in lanes.items():
        best = float("inf")
        for _ in range(repeats):
            f = np.ascontiguousarray(f0.copy())
            t0 = time.perf_counter()
            for _ in range(steps):
                mod.collide_ad(f, model.weights, model.velocities.astype(float),
                               vlat, model.cs2_coeff, inv_tau, True)
            best = min(best, time.perf_counter() - t0)
        results[name] = f
        sites = f.shape[1] * steps
        rates[name] = sites / best / 1e6
    dev = 0.0
    if len(results) == 2:
        a, b = results.values()
        dev = float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)))
    return rates, dev


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256])
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--steps", type=int, default=20)
    parser.add_argument("--models", nargs="+", default=["D2Q9", "D2Q5"])
    parser.add_argument("--seed", type=int, default=1234)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    header = f"{'model':8s} {'grid':>10s} " + "".join(
        f"{lane + ' Msites/s':>18s}" for lane in _load_lanes()
    ) + f"{'max rel dev':>14s}"
    print(header)
    for model_name in args.models:
        for n_side in args.sizes:
            rates, dev = bench(model_name, n_side, args.repeats,
                               args.steps, rng)
            cells = f"{n_side}^2"
            row = f"{model_name:8s} {cells:>10s}"
            for lane in _load_lanes():
                row += f"{rates.get(lane, float('nan')):>18.1f}"
            row += f"{dev:>14.2e}"
            print(row)


if __name__ == "__main__":
    main()
