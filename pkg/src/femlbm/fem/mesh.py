"""Interval and triangle meshes with tagged boundary node sets.

A mesh is nodes + connectivity + named boundary tags. Tags map a label
(e.g. "dirichlet", "neumann", "interface") to a sorted array of node ids;
strong conditions and coupling interfaces are applied per tag.

The plain-text exchange format is line oriented::

    mesh dim <d>
    node <x> [<y>]
    elem <a> <b> [<c>]
    tag <name> <node-id> [<node-id> ...]

one record per line, zero-based indices, '#' comments allowed.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np

from ..errors import GeometryError


@dataclass(frozen=True)
class Mesh:
    """Simplicial mesh: 2-node lines (dim 1) or 3-node triangles (dim 2)."""

    dim: int
    nodes: np.ndarray       # (n_nodes, dim)
    elements: np.ndarray    # (n_elem, dim + 1) int
    boundary_tags: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, float)
        if nodes.ndim == 1:
            nodes = nodes[:, None]
        elements = np.asarray(self.elements, int)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "elements", elements)
        if self.dim not in (1, 2):
            raise GeometryError(f"dim must be 1 or 2, got {self.dim}")
        if nodes.shape[1] != self.dim:
            raise GeometryError("node coordinate dimension mismatch")
        if elements.ndim != 2 or elements.shape[1] != self.dim + 1:
            raise GeometryError(
                f"elements must be (n, {self.dim + 1}) connectivity"
            )
        if elements.size and (elements.min() < 0 or elements.max() >= len(nodes)):
            raise GeometryError("element connectivity index out of range")
        if np.any(self.measures() <= 0):
            raise GeometryError("non-positive element measure")
        tags = {}
        for name, ids in self.boundary_tags.items():
            ids = np.unique(np.asarray(ids, int))
            if ids.size and (ids.min() < 0 or ids.max() >= len(nodes)):
                raise GeometryError(f"tag {name!r} references unknown nodes")
            tags[name] = ids
        object.__setattr__(self, "boundary_tags", tags)

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_elements(self):
        return len(self.elements)

    def measures(self):
        """Element lengths (1D) or signed-orientation areas (2D)."""
        xs = self.nodes[self.elements]
        if self.dim == 1:
            return xs[:, 1, 0] - xs[:, 0, 0]
        d1 = xs[:, 1] - xs[:, 0]
        d2 = xs[:, 2] - xs[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def element_sizes(self):
        """h_e per element: length in 1D, longest edge in 2D."""
        xs = self.nodes[self.elements]
        if self.dim == 1:
            return xs[:, 1, 0] - xs[:, 0, 0]
        e01 = np.linalg.norm(xs[:, 1] - xs[:, 0], axis=1)
        e12 = np.linalg.norm(xs[:, 2] - xs[:, 1], axis=1)
        e20 = np.linalg.norm(xs[:, 0] - xs[:, 2], axis=1)
        return np.maximum(np.maximum(e01, e12), e20)


def structured_mesh(lo, hi, divisions, tags=True):
    """Uniform mesh of the box [lo, hi] with `divisions` cells per axis.

    1D: line elements. 2D: each cell split into two triangles along the
    (lower-left, upper-right) diagonal with positive orientation. Boundary
    nodes are auto-tagged "left", "right" and in 2D "bottom", "top"
    (corners belong to both adjacent side tags) plus "boundary".
    """
    lo = np.atleast_1d(np.asarray(lo, float))
    hi = np.atleast_1d(np.asarray(hi, float))
    dim = len(lo)
    div = np.atleast_1d(np.asarray(divisions, int))
    if div.size == 1:
        div = np.repeat(div, dim)
    if np.any(hi <= lo):
        raise GeometryError("degenerate box: hi must exceed lo componentwise")
    if np.any(div < 1):
        raise GeometryError("divisions must be >= 1")
    if dim == 1:
        n = div[0] + 1
        nodes = np.linspace(lo[0], hi[0], n)[:, None]
        elements = np.stack([np.arange(n - 1), np.arange(1, n)], axis=1)
        boundary = {"left": [0], "right": [n - 1], "boundary": [0, n - 1]}
    elif dim == 2:
        nx, ny = div[0] + 1, div[1] + 1
        xs = np.linspace(lo[0], hi[0], nx)
        ys = np.linspace(lo[1], hi[1], ny)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        nodes = np.stack([X.reshape(-1), Y.reshape(-1)], axis=1)

        def nid(i, j):
            return i * ny + j

        elements = []
        for i in range(nx - 1):
            for j in range(ny - 1):
                a, b = nid(i, j), nid(i + 1, j)
                c, d = nid(i + 1, j + 1), nid(i, j + 1)
                elements.append((a, b, c))
                elements.append((a, c, d))
        elements = np.array(elements, int)
        boundary = {
            "left": [nid(0, j) for j in range(ny)],
            "right": [nid(nx - 1, j) for j in range(ny)],
            "bottom": [nid(i, 0) for i in range(nx)],
            "top": [nid(i, ny - 1) for i in range(nx)],
        }
        boundary["boundary"] = sorted(
            set().union(*[set(v) for v in boundary.values()])
        )
    else:
        raise GeometryError("only 1D and 2D boxes are supported")
    return Mesh(dim, nodes, elements, boundary if tags else {})


def save_mesh(mesh, path):
    """Write the plain-text node/element/tag format."""
    with open(path, "w") as fh:
        fh.write(f"mesh dim {mesh.dim}\n")
        for x in mesh.nodes:
            fh.write("node " + " ".join(f"{c:.17g}" for c in x) + "\n")
        for conn in mesh.elements:
            fh.write("elem " + " ".join(str(int(a)) for a in conn) + "\n")
        for name, ids in sorted(mesh.boundary_tags.items()):
            fh.write(f"tag {name} " + " ".join(str(int(a)) for a in ids) + "\n")


def load_mesh(path):
    """Read the plain-text node/element/tag format."""
    dim = None
    nodes, elements, tags = [], [], {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            kind = parts[0]
            if kind == "mesh":
                dim = int(parts[2])
            elif kind == "node":
                nodes.append([float(c) for c in parts[1:]])
            elif kind == "elem":
                elements.append([int(a) for a in parts[1:]])
            elif kind == "tag":
                tags[parts[1]] = [int(a) for a in parts[2:]]
            else:
                raise GeometryError(f"{path}:{lineno}: unknown record {kind!r}")
    if dim is None:
        raise GeometryError(f"{path}: missing 'mesh dim' header")
    return Mesh(dim, np.array(nodes, float), np.array(elements, int), tags)
