"""Point location and nodal interpolation on simplicial meshes."""

import numpy as np

from ..errors import OutOfDomainError

#barycentric tolerance relative to element size
_BARY_TOL = 1e-10


class ElementLocator:
    """Uniform-bin spatial hash over element bounding boxes.

    Candidate elements for a query point come from its bin; membership is
    then confirmed by barycentric coordinates (scan). Build time is linear
    in the number of elements, queries are O(candidates).
    """

    def __init__(self, mesh, bins_per_axis=None):
        self.mesh = mesh
        xs = mesh.nodes[mesh.elements]          # (ne, nl, dim)
        self.lo = mesh.nodes.min(axis=0)
        self.hi = mesh.nodes.max(axis=0)
        ne = mesh.n_elements
        if bins_per_axis is None:
            bins_per_axis = max(1, int(round(ne ** (1.0 / mesh.dim) / 2)))
        self.nb = np.full(mesh.dim, int(bins_per_axis))
        span = np.where(self.hi > self.lo, self.hi - self.lo, 1.0)
        self.width = span / self.nb
        self._bins = {}
        el_lo = xs.min(axis=1)
        el_hi = xs.max(axis=1)
        lo_idx = self._clip(np.floor((el_lo - self.lo) / self.width).astype(int))
        hi_idx = self._clip(np.floor((el_hi - self.lo) / self.width).astype(int))
        for e in range(ne):
            ranges = [
                range(lo_idx[e, a], hi_idx[e, a] + 1) for a in range(mesh.dim)
            ]
            if mesh.dim == 1:
                keys = [(i,) for i in ranges[0]]
            else:
                keys = [(i, j) for i in ranges[0] for j in ranges[1]]
            for key in keys:
                self._bins.setdefault(key, []).append(e)
        #precompute barycentric transforms
        if mesh.dim == 1:
            self._x0 = xs[:, 0, 0]
            self._len = xs[:, 1, 0] - xs[:, 0, 0]
        else:
            self._x0 = xs[:, 0]
            d1 = xs[:, 1] - xs[:, 0]
            d2 = xs[:, 2] - xs[:, 0]
            det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
            #inverse of [[d1x, d2x], [d1y, d2y]] rows
            self._inv = np.stack(
                [
                    np.stack([d2[:, 1], -d2[:, 0]], axis=1),
                    np.stack([-d1[:, 1], d1[:, 0]], axis=1),
                ],
                axis=1,
            ) / det[:, None, None]

    def _clip(self, idx):
        return np.clip(idx, 0, self.nb - 1)

    def barycentric(self, elem, point):
        """Barycentric coordinates of `point` in element `elem`."""
        if self.mesh.dim == 1:
            s = (point[0] - self._x0[elem]) / self._len[elem]
            return np.array([1.0 - s, s])
        rs = self._inv[elem] @ (np.asarray(point, float) - self._x0[elem])
        return np.array([1.0 - rs[0] - rs[1], rs[0], rs[1]])

    def locate(self, point):
        """Return (element id, barycentric coords); OutOfDomainError if none."""
        point = np.atleast_1d(np.asarray(point, float))
        key = tuple(
            int(c) for c in self._clip(
                np.floor((point - self.lo) / self.width).astype(int)
            )
        )
        best_elem, best_short = None, np.inf
        for e in self._bins.get(key, ()):
            lam = self.barycentric(e, point)
            short = lam.min()
            if short >= -_BARY_TOL:
                return e, lam
            if -short < best_short:
                best_elem, best_short = e, -short
        #fall back to a full scan (point may sit outside its bin's boxes)
        for e in range(self.mesh.n_elements):
            lam = self.barycentric(e, point)
            short = lam.min()
            if short >= -_BARY_TOL:
                return e, lam
            if -short < best_short:
                best_elem, best_short = e, -short
        raise OutOfDomainError(
            f"point {point.tolist()} lies outside the mesh",
            nearest_element=best_elem,
        )

    def interpolate(self, d, points):
        """Evaluate the P1 interpolant of nodal values d at many points."""
        points = np.atleast_2d(np.asarray(points, float))
        out = np.empty(len(points))
        for k, pt in enumerate(points):
            e, lam = self.locate(pt)
            out[k] = float(lam @ d[self.mesh.elements[e]])
        return out


def interpolate_at(mesh, d, point, locator=None):
    """P1 interpolation of nodal values `d` at one point."""
    loc = locator if locator is not None else ElementLocator(mesh)
    e, lam = loc.locate(point)
    return float(lam @ np.asarray(d, float)[mesh.elements[e]])
