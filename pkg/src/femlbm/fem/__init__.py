"""Finite element subsystem: meshes, (SUPG) assembly, theta stepping."""

from .mesh import Mesh, structured_mesh, load_mesh, save_mesh
from .assembly import assemble_galerkin, assemble_supg, supg_tau, FemSystem
from .solve import solve_sparse
from .stepper import FemState, ThetaStepper, initial_rate
from .interp import ElementLocator, interpolate_at

__all__ = [
    "Mesh",
    "structured_mesh",
    "load_mesh",
    "save_mesh",
    "assemble_galerkin",
    "assemble_supg",
    "supg_tau",
    "FemSystem",
    "solve_sparse",
    "FemState",
    "ThetaStepper",
    "initial_rate",
    "ElementLocator",
    "interpolate_at",
]
