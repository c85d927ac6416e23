"""Interface data transfer between non-matching FEM and LBM grids.

Coarse-to-fine: each interface LBM node is located in the FEM mesh and
receives the P1 interpolant (barycentric weights). Fine-to-coarse: each
interface FEM node is located in its surrounding LBM cell and receives the
bilinear (1D: linear) combination of the cell-corner concentrations,

    u5 = u1 (1-gx)(1-gy) + u2 gx (1-gy) + u3 gx gy + u4 (1-gx) gy

with gx = (x5 - x1)/h_f measured from the lower-left corner. Points
exactly on a cell edge assign to the lower-index cell.
"""

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, OutOfDomainError
from .fem.interp import ElementLocator


@dataclass(frozen=True)
class TransferMap:
    """Precomputed correspondences for one FEM/LBM interface pair.

    fem_to_lbm: list of (lbm node index tuple, containing-element node
    ids, barycentric weights). lbm_to_fem: list of (fem node id, corner
    index tuples, bilinear weights).
    """

    fem_to_lbm: tuple
    lbm_to_fem: tuple


def _lower_cell(coord, origin, h, n_nodes):
    """Cell index for one axis with the lower-cell tie-break."""
    s = (coord - origin) / h
    idx = int(np.floor(s + 1e-12))
    frac = s - idx
    if frac < 1e-12 and idx > 0:
        #exactly on a node: take the cell that ends here
        idx -= 1
        frac = 1.0
    if idx < 0 or idx > n_nodes - 2 or frac < -1e-9 or frac > 1.0 + 1e-9:
        return None
    return idx, min(max(frac, 0.0), 1.0)


def build_transfer_map(mesh, lbm_grid, interface_fem=(), interface_lbm=()):
    """Geometric correspondences for the two transfer directions.

    `interface_lbm` holds LBM node index tuples (or flat ints in 1D) to be
    fed from the FEM field; `interface_fem` holds FEM node ids to be fed
    from the LBM field.
    """
    locator = ElementLocator(mesh) if len(interface_lbm) else None
    f2l = []
    for node in interface_lbm:
        idx = (node,) if np.isscalar(node) else tuple(int(i) for i in node)
        x = lbm_grid.origin + lbm_grid.h * np.asarray(idx, float)
        try:
            elem, lam = locator.locate(x)
        except OutOfDomainError as exc:
            raise GeometryError(
                f"interface LBM node {idx} at {x.tolist()} is outside the "
                f"FEM mesh"
            ) from exc
        lam = np.clip(lam, 0.0, None)
        lam = lam / lam.sum()
        f2l.append((idx, mesh.elements[elem].copy(), lam))

    l2f = []
    dim = lbm_grid.dim
    for a in interface_fem:
        a = int(a)
        x = mesh.nodes[a]
        cells = []
        ok = True
        for ax in range(dim):
            res = _lower_cell(x[ax], lbm_grid.origin[ax], lbm_grid.h,
                              lbm_grid.dims[ax])
            if res is None:
                ok = False
                break
            cells.append(res)
        if not ok:
            raise GeometryError(
                f"interface FEM node {a} at {x.tolist()} is outside the "
                f"LBM grid"
            )
        if dim == 1:
            (i, gx), = cells
            corners = ((i,), (i + 1,))
            weights = np.array([1.0 - gx, gx])
        else:
            (i, gx), (j, gy) = cells
            corners = ((i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1))
            weights = np.array(
                [
                    (1.0 - gx) * (1.0 - gy),
                    gx * (1.0 - gy),
                    gx * gy,
                    (1.0 - gx) * gy,
                ]
            )
        l2f.append((a, corners, weights))
    return TransferMap(tuple(f2l), tuple(l2f))


def fem_to_lbm(tmap, d):
    """FEM nodal values -> concentrations at the interface LBM nodes.

    Returns (node index tuples, values) so callers can feed entropy
    Dirichlet patches on the fine grid.
    """
    d = np.asarray(d, float)
    nodes, vals = [], []
    for idx, conn, lam in tmap.fem_to_lbm:
        nodes.append(idx)
        vals.append(float(lam @ d[conn]))
    return nodes, np.array(vals)


def lbm_to_fem(tmap, u):
    """LBM concentration field -> values at the interface FEM nodes.

    Returns (fem node ids, values); these become strong Dirichlet data on
    the coarse side.
    """
    u = np.asarray(u, float)
    ids, vals = [], []
    for a, corners, weights in tmap.lbm_to_fem:
        ids.append(a)
        vals.append(float(sum(w * u[c] for w, c in zip(weights, corners))))
    return np.array(ids, int), np.array(vals)
