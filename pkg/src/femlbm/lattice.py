"""Discrete velocity sets (DnQm lattices) for advection-diffusion LBM.

Provides the four supported models (D1Q2, D2Q4, D2Q5, D2Q9) with exact
rational weights, the lattice sound-speed coefficient kappa such that
c_s^2 = kappa * (dx/dt)^2, and direction classification at boundaries
(incoming set, opposite and mirror maps).

The D2Q4/D2Q5 weights are not universal in the literature; the standard
advection-diffusion values are used here (D2Q4: all 1/4, kappa = 1/2;
D2Q5: rest 1/3, axis 1/6, kappa = 1/3).
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

__all__ = [
    "LatticeModel",
    "builtin_model",
    "incoming_set",
    "opposite_map",
    "mirror_map",
    "MODEL_NAMES",
]

MODEL_NAMES = ("D1Q2", "D2Q4", "D2Q5", "D2Q9")

#tolerance for classifying integer-direction / unit-normal dot products
_DOT_TOL = 1e-12


@dataclass(frozen=True)
class LatticeModel:
    """A DnQm velocity set.

    Attributes
    ----------
    name : str
        One of D1Q2, D2Q4, D2Q5, D2Q9.
    velocities : (m, dim) int array
        Direction vectors e_i in lattice units.
    weights : (m,) float array
        Quadrature weights w_i (floats converted once from exact rationals).
    weights_exact : tuple of Fraction
        The exact rational weights backing `weights`.
    cs2_coeff : Fraction
        kappa with c_s^2 = kappa * (dx/dt)^2.
    """

    name: str
    velocities: np.ndarray
    weights: np.ndarray
    weights_exact: tuple
    cs2_coeff: Fraction
    opposite: np.ndarray = field(default=None)

    @property
    def m(self) -> int:
        return len(self.weights)

    @property
    def dim(self) -> int:
        return self.velocities.shape[1]

    @property
    def rest_index(self):
        """Index of the zero velocity, or None if the model has none."""
        idx = np.flatnonzero(~self.velocities.any(axis=1))
        return int(idx[0]) if idx.size else None

    def cs2(self, h: float, dt: float) -> float:
        """Physical squared sound speed for grid spacing h and time-step dt."""
        return float(self.cs2_coeff) * (h / dt) ** 2


def _make(name, velocities, weights, kappa):
    e = np.array(velocities, dtype=np.int64)
    w_exact = tuple(Fraction(*w) for w in weights)
    assert sum(w_exact) == 1
    w = np.array([float(x) for x in w_exact])
    #opposite map: e_opp = -e, guaranteed present in all builtin sets
    opp = np.empty(len(e), dtype=np.int64)
    for i, ei in enumerate(e):
        (j,) = np.flatnonzero((e == -ei).all(axis=1))
        opp[i] = j
    model = LatticeModel(name, e, w, w_exact, Fraction(*kappa), opp)
    model.velocities.setflags(write=False)
    model.weights.setflags(write=False)
    model.opposite.setflags(write=False)
    return model


_TABLE = {
    "D1Q2": _make("D1Q2", [[1], [-1]], [(1, 2), (1, 2)], (1, 1)),
    "D2Q4": _make(
        "D2Q4",
        [[1, 0], [0, 1], [-1, 0], [0, -1]],
        [(1, 4)] * 4,
        (1, 2),
    ),
    "D2Q5": _make(
        "D2Q5",
        [[0, 0], [1, 0], [0, 1], [-1, 0], [0, -1]],
        [(1, 3)] + [(1, 6)] * 4,
        (1, 3),
    ),
    "D2Q9": _make(
        "D2Q9",
        [
            [0, 0],
            [1, 0],
            [0, 1],
            [-1, 0],
            [0, -1],
            [1, 1],
            [-1, 1],
            [-1, -1],
            [1, -1],
        ],
        [(4, 9)] + [(1, 9)] * 4 + [(1, 36)] * 4,
        (1, 3),
    ),
}


def builtin_model(name: str) -> LatticeModel:
    """Return one of the built-in lattice models by name."""
    try:
        return _TABLE[name]
    except KeyError:
        raise ValueError(
            f"unknown lattice model {name!r}; supported: {', '.join(MODEL_NAMES)}"
        ) from None


def _check_normal(model, normal):
    n = np.asarray(normal, dtype=float).reshape(-1)
    if n.shape[0] != model.dim:
        raise ValueError(
            f"normal has dimension {n.shape[0]}, model {model.name} is {model.dim}D"
        )
    norm = np.linalg.norm(n)
    if norm < _DOT_TOL:
        raise ValueError("zero-length boundary normal")
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"boundary normal must be unit length, got |n| = {norm!r}")
    return n


def incoming_set(model: LatticeModel, normal) -> np.ndarray:
    """Indices of directions pointing into the domain at a wall.

    `normal` is the outward unit normal; returns exactly the i with
    e_i . n < 0 (strict — tangent directions are treated as known).
    """
    n = _check_normal(model, normal)
    dots = model.velocities @ n
    return np.flatnonzero(dots < -_DOT_TOL)


def opposite_map(model: LatticeModel) -> np.ndarray:
    """Index map i -> j with e_j = -e_i."""
    return model.opposite


def mirror_map(model: LatticeModel, normal) -> np.ndarray:
    """Index map reflecting each direction about the wall tangent plane.

    e' = e - 2 (e . n) n. All builtin models are closed under reflection
    about axis-aligned and diagonal normals; a direction whose mirror is
    not in the set raises ValueError.
    """
    n = _check_normal(model, normal)
    e = model.velocities.astype(float)
    mirrored = e - 2.0 * np.outer(e @ n, n)
    out = np.empty(model.m, dtype=np.int64)
    for i, em in enumerate(mirrored):
        d2 = ((e - em) ** 2).sum(axis=1)
        j = int(np.argmin(d2))
        if d2[j] > 1e-18:
            raise ValueError(
                f"mirror of direction {model.velocities[i]} about normal {n} "
                f"is not in model {model.name}"
            )
        out[i] = j
    return out
