"""Pure-numpy lattice Boltzmann kernels.

Fallback lane for the compiled extension `femlbm.lbm._kernels`; both expose
the same `collide_ad` contract and must produce matching results (tested to
tight relative tolerance). Everything works in lattice units: `vlat` is the
advection velocity scaled by dt/h and `kappa` is the lattice coefficient
with c_s^2 = kappa (dx/dt)^2.
"""

import numpy as np

BACKEND = "python"


def collide_ad(f, w, e, vlat, kappa, inv_tau, half_vv):
    """In-place BGK relaxation toward the advection-diffusion equilibrium.

    Parameters
    ----------
    f : (m, N) float array, modified in place
        Populations, one row per lattice direction, flattened nodes.
    w : (m,) weights; e : (m, dim) directions (float).
    vlat : (dim, N) advection velocity in lattice units.
    kappa : lattice sound-speed coefficient.
    inv_tau : 1/tau.
    half_vv : True for the mass-conserving -v.v/(2 c_s^2) equilibrium term,
        False for the verbatim -v.v/c_s^2 variant.
    """
    c2 = 1.0 / kappa
    u = f.sum(axis=0)
    ev = e @ vlat
    vv = (vlat * vlat).sum(axis=0)
    vvfac = 0.5 * c2 if half_vv else c2
    feq = w[:, None] * u * (1.0 + ev * c2 + 0.5 * (ev * ev) * (c2 * c2) - vv * vvfac)
    f += inv_tau * (feq - f)
    return f
