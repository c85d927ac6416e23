"""Grid-to-mesh and mesh-to-grid interface transfer."""

import numpy as np
import pytest

from femlbm.errors import GeometryError
from femlbm.fem.mesh import structured_mesh
from femlbm.lbm.core import LbmGrid
from femlbm.transfer import build_transfer_map, fem_to_lbm, lbm_to_fem


def _linear(pts, dim):
    pts = np.atleast_2d(pts)
    out = 1.5 + 2.0 * pts[:, 0]
    if dim == 2:
        out = out - 0.75 * pts[:, 1]
    return out


# -- mesh -> grid (P1 interpolation at lattice nodes) -----------------------

def test_fem_to_lbm_exact_on_linear_fields_2d():
    mesh = structured_mesh((0.0, 0.0), (1.0, 1.0), (7, 5))
    grid = LbmGrid(origin=(0.3, 0.2), h=0.04, dims=(6, 6))
    nodes = [(i, j) for i in range(6) for j in range(6)]
    tmap = build_transfer_map(mesh, grid, interface_lbm=nodes)
    d = _linear(mesh.nodes, 2)
    idx, vals = fem_to_lbm(tmap, d)
    pts = grid.origin + grid.h * np.asarray(idx, float)
    np.testing.assert_allclose(vals, _linear(pts, 2), rtol=1e-12, atol=1e-13)


def test_fem_to_lbm_exact_on_linear_fields_1d():
    mesh = structured_mesh((0.0,), (1.0,), (9,))
    grid = LbmGrid(origin=(0.15,), h=0.05, dims=(8,))
    tmap = build_transfer_map(mesh, grid, interface_lbm=list(range(8)))
    d = _linear(mesh.nodes, 1)
    idx, vals = fem_to_lbm(tmap, d)
    pts = grid.origin + grid.h * np.asarray(idx, float)
    np.testing.assert_allclose(vals, _linear(pts, 1), rtol=1e-12)


def test_fem_to_lbm_rejects_nodes_outside_mesh():
    mesh = structured_mesh((0.0, 0.0), (1.0, 1.0), (4, 4))
    grid = LbmGrid(origin=(0.9, 0.9), h=0.1, dims=(4, 4))
    with pytest.raises(GeometryError):
        build_transfer_map(mesh, grid, interface_lbm=[(3, 3)])


# -- grid -> mesh (bilinear at FEM nodes) -----------------------------------

def test_lbm_to_fem_exact_on_bilinear_fields():
    grid = LbmGrid(origin=(0.0, 0.0), h=0.05, dims=(21, 21))
    mesh = structured_mesh((0.12, 0.08), (0.88, 0.92), (5, 7))
    tmap = build_transfer_map(mesh, grid,
                              interface_fem=list(range(mesh.n_nodes)))
    X = grid.coords()
    #bilinear xy-term is reproduced exactly by the cell formula
    u = 0.4 + 1.1 * X[..., 0] - 0.6 * X[..., 1] + 2.0 * X[..., 0] * X[..., 1]
    ids, vals = lbm_to_fem(tmap, u)
    p = mesh.nodes[ids]
    expect = 0.4 + 1.1 * p[:, 0] - 0.6 * p[:, 1] + 2.0 * p[:, 0] * p[:, 1]
    np.testing.assert_allclose(vals, expect, rtol=1e-12, atol=1e-13)


def test_lbm_to_fem_exact_at_coincident_nodes():
    #FEM node sitting exactly on a lattice node gets that nodal value
    grid = LbmGrid(origin=(0.0, 0.0), h=0.1, dims=(11, 11))
    mesh = structured_mesh((0.2, 0.3), (0.8, 0.7), (6, 4))  # h_c = 0.1
    tmap = build_transfer_map(mesh, grid,
                              interface_fem=list(range(mesh.n_nodes)))
    rng = np.random.default_rng(0)
    u = rng.uniform(0.0, 1.0, grid.dims)
    ids, vals = lbm_to_fem(tmap, u)
    for a, val in zip(ids, vals):
        x = mesh.nodes[a]
        i, j = int(round(x[0] / 0.1)), int(round(x[1] / 0.1))
        assert val == pytest.approx(u[i, j], rel=1e-12)


def test_lbm_to_fem_on_node_tie_breaks_to_lower_cell():
    #a point exactly on an interior lattice node belongs to the cell that
    #ends there (frac = 1), so the weights are a pure corner pick
    grid = LbmGrid(origin=(0.0,), h=0.25, dims=(5,))
    mesh = structured_mesh((0.25,), (0.75,), (2,))  # nodes at 0.25,0.5,0.75
    tmap = build_transfer_map(mesh, grid,
                              interface_fem=list(range(mesh.n_nodes)))
    for a, corners, weights in tmap.lbm_to_fem:
        #lower-cell convention: the left corner index is node - 1
        node = int(round(mesh.nodes[a, 0] / 0.25))
        assert corners[0] == (node - 1,)
        np.testing.assert_allclose(weights, [0.0, 1.0], atol=1e-9)


def test_lbm_to_fem_rejects_nodes_outside_grid():
    grid = LbmGrid(origin=(0.0, 0.0), h=0.1, dims=(5, 5))
    mesh = structured_mesh((0.2, 0.2), (0.9, 0.4), (7, 2))
    with pytest.raises(GeometryError):
        build_transfer_map(mesh, grid, interface_fem=[mesh.n_nodes - 1])


def test_transfer_map_is_deterministic():
    mesh = structured_mesh((0.0, 0.0), (1.0, 1.0), (6, 6))
    grid = LbmGrid(origin=(0.25, 0.25), h=0.05, dims=(11, 11))
    nodes = [(i, j) for i in range(11) for j in range(0, 11, 2)]
    inside = np.flatnonzero(
        (mesh.nodes[:, 0] >= 0.25) & (mesh.nodes[:, 0] <= 0.75)
        & (mesh.nodes[:, 1] >= 0.25) & (mesh.nodes[:, 1] <= 0.75))
    fem_ids = inside.tolist()
    a = build_transfer_map(mesh, grid, interface_fem=fem_ids,
                           interface_lbm=nodes)
    b = build_transfer_map(mesh, grid, interface_fem=fem_ids,
                           interface_lbm=nodes)
    for (ia, ca, wa), (ib, cb, wb) in zip(a.fem_to_lbm, b.fem_to_lbm):
        assert ia == ib and np.array_equal(ca, cb)
        np.testing.assert_array_equal(wa, wb)
    for (ia, ca, wa), (ib, cb, wb) in zip(a.lbm_to_fem, b.lbm_to_fem):
        assert ia == ib and ca == cb
        np.testing.assert_array_equal(wa, wb)
