"""Theta-method time integration of the semi-discrete FEM system.

Per step, with dpred = d^n + dt (1 - theta) v^n:

    (M + theta dt K) v^{n+1} = rhs^{n+1} - K dpred      (free nodes)
    d^{n+1} = dpred + dt theta v^{n+1}

Dirichlet nodes (including the coupling interface) take their prescribed
values directly; their rate is the finite difference of the prescribed
values, v^{n+1} = (d^{n+1} - d^n) / dt. theta = 1/2 is the second-order
midpoint rule used throughout.
"""

from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import SolverFailure
from .solve import solve_sparse, _DIRECT_LIMIT


@dataclass(frozen=True)
class FemState:
    """Nodal concentrations d, rates v, and the current time."""

    d: np.ndarray
    v: np.ndarray
    time: float

    def __post_init__(self):
        object.__setattr__(self, "d", np.asarray(self.d, float))
        object.__setattr__(self, "v", np.asarray(self.v, float))
        if self.d.shape != self.v.shape:
            raise ValueError("d and v must have equal length")


def _eval_value(value, t, x):
    if callable(value):
        try:
            return float(value(t, x))
        except TypeError:
            return float(value(t))
    return float(value)


def _dirichlet_values(system, t):
    mesh = system.mesh
    return {
        a: _eval_value(val, t, mesh.nodes[a])
        for a, val in system.dirichlet.items()
    }


def initial_rate(system, d0, t0=0.0, rhs=None):
    """Consistent initial rate: M v0 = rhs - K d0 on free nodes.

    Constrained nodes get the forward finite difference of their
    prescribed values (zero for constant prescriptions).
    """
    n = system.n
    d0 = np.asarray(d0, float)
    b = (system.rhs_base if rhs is None else np.asarray(rhs, float)) - system.K @ d0
    v0 = np.zeros(n)
    delta = 1e-7
    for a, val in system.dirichlet.items():
        x = system.mesh.nodes[a]
        v0[a] = (_eval_value(val, t0 + delta, x) - _eval_value(val, t0, x)) / delta
    free = system.free_nodes()
    if free.size:
        Mff = system.M[np.ix_(free, free)]
        cons = np.setdiff1d(np.arange(n), free)
        bf = b[free]
        if cons.size:
            bf = bf - system.M[np.ix_(free, cons)] @ v0[cons]
        v0[free] = solve_sparse(Mff, bf)
    return FemState(d0, v0, t0)


class ThetaStepper:
    """Pre-factorized theta stepping for a fixed system and time-step."""

    def __init__(self, system, dt=None):
        self.system = system
        self.dt = float(system.dt_c if dt is None else dt)
        if self.dt <= 0:
            raise ValueError("time-step must be positive")
        n = system.n
        self.free = system.free_nodes()
        self.cons = np.setdiff1d(np.arange(n), self.free)
        A = (system.M + system.theta * self.dt * system.K).tocsr()
        self._A_ff = A[np.ix_(self.free, self.free)].tocsc()
        self._A_fc = A[np.ix_(self.free, self.cons)].tocsr()
        self._lu = None
        if self.free.size and self.free.size <= _DIRECT_LIMIT:
            try:
                self._lu = spla.splu(self._A_ff)
            except RuntimeError as exc:
                raise SolverFailure(f"factorization failed: {exc}") from exc

    def step(self, state, dirichlet_values=None, rhs=None):
        """Advance one dt; `dirichlet_values` overrides node -> value at t+dt."""
        sysm = self.system
        dt, theta = self.dt, sysm.theta
        t_new = state.time + dt
        dpred = state.d + dt * (1.0 - theta) * state.v
        b = (sysm.rhs_base if rhs is None else np.asarray(rhs, float)) \
            - sysm.K @ dpred

        values = _dirichlet_values(sysm, t_new)
        if dirichlet_values:
            values.update(
                (a, float(v)) for a, v in dirichlet_values.items()
            )
        d_new = dpred.copy()
        v_new = np.zeros_like(dpred)
        for a, val in values.items():
            d_new[a] = val
            v_new[a] = (val - state.d[a]) / dt
        free = self.free
        if free.size:
            bf = b[free]
            if self.cons.size:
                bf = bf - self._A_fc @ v_new[self.cons]
            if self._lu is not None:
                vf = self._lu.solve(bf)
                resid = np.linalg.norm(self._A_ff @ vf - bf)
                if not np.isfinite(resid):
                    raise SolverFailure("non-finite residual in theta step")
            else:
                vf = solve_sparse(self._A_ff, bf)
            v_new[free] = vf
            d_new[free] = dpred[free] + dt * theta * vf
        return FemState(d_new, v_new, t_new)

    def run(self, state, n_steps, dirichlet_values=None, rhs=None):
        for _ in range(n_steps):
            state = self.step(state, dirichlet_values, rhs)
        return state
