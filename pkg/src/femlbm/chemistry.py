"""Reaction-invariant reductions for fast equilibrium chemistry.

Two reaction systems are supported:

* fast bimolecular reaction nA A + nB B -> nC C, with transported
  invariants alpha = u_A + (nA/nC) u_C and beta = u_B + (nB/nC) u_C;
* calcite dissolution CaCO3 <-> Ca2+ + CO3^2- at solubility equilibrium
  K_sp = u2 u3 / u1, with invariants psi1 = u1 - u2 and psi2 = u3 - u2.

The invariants satisfy the same linear advection-diffusion equation as
the species, so they are transported by any solver in this package and
the species are recovered pointwise afterwards. All recovery functions
are pure and vectorize over numpy arrays.
"""

from dataclasses import dataclass

import numpy as np

#magnitude of negative round-off clamped silently to zero
_NEG_TOL = 1e-12

#default solubility product for calcite at room temperature
K_SP_CALCITE = 3.36e-9


def _clamp_nonneg(arr, name):
    arr = np.asarray(arr, float)
    if arr.min(initial=0.0) < -_NEG_TOL:
        raise ValueError(
            f"{name} has negative entries below -{_NEG_TOL:g} "
            f"(min = {arr.min():.6g})"
        )
    return np.maximum(arr, 0.0)


@dataclass(frozen=True)
class BimolecularSystem:
    """Stoichiometry of the irreversible reaction nA A + nB B -> nC C."""

    n_A: int = 1
    n_B: int = 2
    n_C: int = 1

    def __post_init__(self):
        for name in ("n_A", "n_B", "n_C"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be a positive integer")
            object.__setattr__(self, name, int(getattr(self, name)))

    def invariants(self, u_A, u_B, u_C):
        """alpha and beta from species concentrations."""
        u_A = np.asarray(u_A, float)
        u_B = np.asarray(u_B, float)
        u_C = np.asarray(u_C, float)
        alpha = u_A + (self.n_A / self.n_C) * u_C
        beta = u_B + (self.n_B / self.n_C) * u_C
        return alpha, beta


@dataclass(frozen=True)
class CalciteSystem:
    """Calcite dissolution equilibrium with solubility product K_sp."""

    K_sp: float = K_SP_CALCITE

    def __post_init__(self):
        if self.K_sp <= 0:
            raise ValueError("K_sp must be positive")

    def invariants(self, u1, u2, u3):
        """psi1 = u1 - u2 and psi2 = u3 - u2."""
        u1 = np.asarray(u1, float)
        u2 = np.asarray(u2, float)
        u3 = np.asarray(u3, float)
        return u1 - u2, u3 - u2


def bimolecular_recover(sys, alpha, beta):
    """Species (u_A, u_B, u_C) from transported invariants (alpha, beta).

    The fast (instantaneous) reaction consumes the limiting reagent
    entirely:

        u_A = max(alpha - (nA/nB) beta, 0)
        u_B = (nB/nA) max(-alpha + (nA/nB) beta, 0)
        u_C = (nC/nA) (alpha - u_A)

    Inputs in [-1e-12, 0) are clamped to zero (solver round-off); more
    negative inputs raise ValueError.
    """
    alpha = _clamp_nonneg(alpha, "alpha")
    beta = _clamp_nonneg(beta, "beta")
    r = sys.n_A / sys.n_B
    u_A = np.maximum(alpha - r * beta, 0.0)
    u_B = (sys.n_B / sys.n_A) * np.maximum(r * beta - alpha, 0.0)
    u_C = (sys.n_C / sys.n_A) * (alpha - u_A)
    return u_A, u_B, u_C


def calcite_recover(sys, psi1, psi2):
    """Species (u1, u2, u3) from transported invariants (psi1, psi2).

    Combining K_sp = u2 u3 / u1 with u1 = psi1 + u2 and u3 = psi2 + u2
    gives the quadratic u2^2 + (psi2 - K) u2 - K psi1 = 0 whose
    non-negative root is

        u2 = (-(psi2 - K) + sqrt((psi2 - K)^2 + 4 K psi1)) / 2.

    When psi2 - K > 0 the equivalent conjugate form
    2 K psi1 / ((psi2 - K) + sqrt(...)) is used, avoiding the
    subtractive cancellation that otherwise destroys the small root.
    psi1 must be >= 0 (up to round-off); psi2 may have either sign.
    """
    psi1 = _clamp_nonneg(psi1, "psi1")
    psi2 = np.asarray(psi2, float)
    K = sys.K_sp
    b = psi2 - K
    disc = b * b + 4.0 * K * psi1
    if np.any(disc < 0.0):
        raise ValueError("negative discriminant: infeasible invariant state")
    root = np.sqrt(disc)
    u2 = np.where(b > 0.0,
                  np.divide(2.0 * K * psi1, b + root,
                            out=np.zeros_like(root), where=(b + root) > 0.0),
                  0.5 * (root - b))
    u2 = np.maximum(u2, 0.0)
    u1 = psi1 + u2
    u3 = psi2 + u2
    if np.ndim(u2) == 0:
        return float(u1), float(u2), float(u3)
    return u1, u2, u3


def lumped_mesh_weights(mesh):
    """Lumped P1 quadrature weights: |supp phi_a|-weighted row sums.

    Each element contributes measure/(dim+1) to each of its nodes, so
    sum(w) equals the mesh measure and the rule is exact for linears.
    """
    w = np.zeros(mesh.n_nodes)
    meas = mesh.measures()
    share = meas / (mesh.dim + 1)
    for e, conn in enumerate(mesh.elements):
        w[conn] += share[e]
    return w


def lattice_weights(grid):
    """Cell-volume weights h^dim per fluid node (trapezoid at walls)."""
    w = np.ones(grid.dims)
    for ax in range(grid.dim):
        edge = [slice(None)] * grid.dim
        for end in (0, -1):
            edge[ax] = end
            w[tuple(edge)] *= 0.5
    w *= grid.h ** grid.dim
    if grid.solid is not None:
        w[grid.solid] = 0.0
    return w


def total_concentration(values, weights):
    """Discrete integral sum_a w_a u_a over a mesh or lattice."""
    values = np.asarray(values, float)
    weights = np.asarray(weights, float)
    if values.shape != weights.shape:
        raise ValueError("values and weights must have matching shapes")
    return float((values * weights).sum())
