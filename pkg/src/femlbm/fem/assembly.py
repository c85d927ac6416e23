"""Galerkin and SUPG assembly for the advection-diffusion weak form.

The semi-discrete system is M u' + K u = rhs_base with

    M_ab  = (phi_a, phi_b)                     capacity
    K_ab  = (phi_a, v.grad phi_b) + (grad phi_a, D grad phi_b)
    rhs_a = (phi_a, s) + boundary flux terms (added by the caller)

SUPG adds, per element with stabilization parameter tau_e,

    M += tau_e (v.grad phi_a, phi_b)
    K += tau_e (v.grad phi_a, v.grad phi_b)
    rhs += tau_e (v.grad phi_a, s)

(the element-local Laplacian of a P1 trial function vanishes, so the
residual inside the stabilization term needs no diffusion part).
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

#Peclet threshold below which the series branch of chi is used
_SERIES_PECLET = 1e-4


def supg_tau(h_e, vnorm, D, p=1):
    """Stabilization parameter tau_e = h_e/(2 p |v|) (coth P - 1/P).

    P = |v| h_e / (2 p D) is the element Peclet number. For P < 1e-4 the
    expression is evaluated by its series limit tau_e = h_e^2/(12 p^2 D),
    which is also the |v| -> 0 value.
    """
    if D <= 0:
        raise ValueError("supg_tau requires D > 0")
    if h_e <= 0:
        raise ValueError("supg_tau requires h_e > 0")
    peclet = vnorm * h_e / (2.0 * p * D)
    if peclet < _SERIES_PECLET:
        return h_e * h_e / (12.0 * p * p * D)
    chi = 1.0 / np.tanh(peclet) - 1.0 / peclet
    return h_e / (2.0 * p * vnorm) * chi


@dataclass
class FemSystem:
    """Assembled matrices plus stepping metadata.

    `dirichlet` maps node id -> prescribed value; values may be scalars or
    callables value(t) / value(t, x) with x the node coordinate row,
    evaluated by the stepper at the new time level.
    """

    mesh: object
    M: sp.csr_matrix
    K: sp.csr_matrix
    rhs_base: np.ndarray
    dirichlet: dict
    theta: float = 0.5
    dt_c: float = None

    @property
    def n(self):
        return self.mesh.n_nodes

    def free_nodes(self):
        mask = np.ones(self.n, dtype=bool)
        for a in self.dirichlet:
            mask[a] = False
        return np.flatnonzero(mask)


def _velocity_at(v, x):
    """Velocity evaluated at points x (k, dim): constant vector or callable."""
    if v is None:
        return np.zeros_like(x)
    if callable(v):
        return np.asarray(v(x), float).reshape(x.shape)
    v = np.atleast_1d(np.asarray(v, float))
    return np.broadcast_to(v, x.shape)


def _source_at(s, x):
    if s is None:
        return np.zeros(len(x))
    if callable(s):
        return np.asarray(s(x), float).reshape(len(x))
    return np.full(len(x), float(s))


def _assemble(mesh, D, v, s, supg, p):
    n = mesh.n_nodes
    dim = mesh.dim
    conn = mesh.elements
    xs = mesh.nodes[conn]                    # (ne, dim+1, dim)
    centroids = xs.mean(axis=1)
    vel = _velocity_at(v, centroids)         # (ne, dim)
    src = _source_at(s, centroids)           # (ne,)
    meas = mesh.measures()
    sizes = mesh.element_sizes()

    nl = dim + 1
    rows = np.repeat(conn, nl, axis=1).reshape(-1)
    cols = np.tile(conn, (1, nl)).reshape(-1)
    Mvals = np.empty((len(conn), nl, nl))
    Kvals = np.empty((len(conn), nl, nl))
    rhs = np.zeros(n)

    if dim == 1:
        #reference mass matrix scaled by element length
        m_ref = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0
        for e, nodes_e in enumerate(conn):
            h = meas[e]
            ve = vel[e, 0]
            #grad phi = [-1/h, +1/h]; (phi_a, v phi_b') and (phi_a', D phi_b')
            b = np.array([-1.0, 1.0]) / h
            Me = h * m_ref
            #advection (phi_a, v phi_b'): int phi_a dx = h/2 each
            Ke = ve * np.outer(np.full(2, h / 2.0), b)
            Ke += D * h * np.outer(b, b)
            load = src[e] * np.full(2, h / 2.0)
            if supg:
                tau = supg_tau(sizes[e], abs(ve), D, p)
                vb = ve * b                   # v.grad phi_a, constant
                #(v.grad phi_a, phi_b): int phi_b dx = h/2
                Me = Me + tau * np.outer(vb, np.full(2, h / 2.0))
                Ke = Ke + tau * h * np.outer(vb, vb)
                load = load + tau * src[e] * vb * h
            Mvals[e] = Me
            Kvals[e] = Ke
            np.add.at(rhs, nodes_e, load)
    else:
        m_ref = np.array(
            [[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]
        ) / 12.0
        for e, nodes_e in enumerate(conn):
            A = meas[e]
            x = xs[e]
            #P1 gradients: grad phi_a = rot(opposite edge) / (2A)
            bmat = np.empty((3, 2))
            for a in range(3):
                x1, x2 = x[(a + 1) % 3], x[(a + 2) % 3]
                bmat[a] = np.array([x1[1] - x2[1], x2[0] - x1[0]]) / (2.0 * A)
            ve = vel[e]
            Me = A * m_ref
            vb = bmat @ ve                    # v.grad phi_a per local node
            #(phi_a, v.grad phi_b): int phi_a dA = A/3
            Ke = np.outer(np.full(3, A / 3.0), vb)
            Ke += D * A * (bmat @ bmat.T)
            load = src[e] * np.full(3, A / 3.0)
            if supg:
                tau = supg_tau(sizes[e], float(np.linalg.norm(ve)), D, p)
                Me = Me + tau * np.outer(vb, np.full(3, A / 3.0))
                Ke = Ke + tau * A * np.outer(vb, vb)
                load = load + tau * src[e] * vb * A
            Mvals[e] = Me
            Kvals[e] = Ke
            np.add.at(rhs, nodes_e, load)

    M = sp.coo_matrix((Mvals.reshape(-1), (rows, cols)), shape=(n, n)).tocsr()
    K = sp.coo_matrix((Kvals.reshape(-1), (rows, cols)), shape=(n, n)).tocsr()
    return M, K, rhs


def assemble_galerkin(mesh, D, v=None, s=None, dirichlet=None, theta=0.5,
                      dt_c=None):
    """Standard Galerkin assembly (exact quadrature for P1 integrands)."""
    if D <= 0:
        raise ValueError("assemble_galerkin requires D > 0")
    M, K, rhs = _assemble(mesh, D, v, s, supg=False, p=1)
    return FemSystem(mesh, M, K, rhs, dict(dirichlet or {}), theta, dt_c)


def assemble_supg(mesh, D, v=None, s=None, p=1, dirichlet=None, theta=0.5,
                  dt_c=None):
    """Galerkin plus streamline-upwind stabilization terms."""
    if D <= 0:
        raise ValueError("assemble_supg requires D > 0")
    M, K, rhs = _assemble(mesh, D, v, s, supg=True, p=p)
    return FemSystem(mesh, M, K, rhs, dict(dirichlet or {}), theta, dt_c)
