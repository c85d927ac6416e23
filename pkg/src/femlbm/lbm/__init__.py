"""Lattice Boltzmann solver for the advection-diffusion equation.

The collision kernel has two interchangeable lanes: a Cython extension
(built at install time) and a pure-numpy fallback. The compiled lane is
used when importable; set FEMLBM_FORCE_PYTHON=1 to force the fallback.
"""

import os

if os.environ.get("FEMLBM_FORCE_PYTHON"):
    from . import kernels_np as kernels
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        from . import kernels_np as kernels

KERNEL_BACKEND = kernels.BACKEND

from .core import (  # noqa: E402
    LbmGrid,
    LbmField,
    relaxation_time,
    max_stable_dt,
    equilibrium,
    collide,
    stream,
    moments,
    h_function,
)
from .boundary import (  # noqa: E402
    BoundaryPatch,
    BoundarySet,
    entropy_dirichlet,
    entropy_neumann,
    bounce_back,
    specular_reflection,
)
from .sim import LbmSimulation  # noqa: E402

__all__ = [
    "KERNEL_BACKEND",
    "kernels",
    "LbmGrid",
    "LbmField",
    "relaxation_time",
    "max_stable_dt",
    "equilibrium",
    "collide",
    "stream",
    "moments",
    "h_function",
    "BoundaryPatch",
    "BoundarySet",
    "entropy_dirichlet",
    "entropy_neumann",
    "bounce_back",
    "specular_reflection",
    "LbmSimulation",
]
