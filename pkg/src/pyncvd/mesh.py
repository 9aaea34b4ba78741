#
# This file is part of pyncvd
#
# https://github.com/pyncvd/pyncvd.git
#
# Copyright (c) 2024 pyncvd developers
#    All Rights Reserved
#
# License:  BSD-3-Clause
"""
Contains the class `Mesh` and the functions to build structured
triangulations of the unit square with edge topology.
"""
__all__ = ['Mesh', 'build_unit_square_mesh', 'classify_boundary_vertices']

import numpy as np

# - global parameters ------------------------------
DIAGONALS = ('lower-left-to-upper-right',)


# - local functions --------------------------------
def _edge_topology(triangles: np.ndarray) -> tuple:
    """Derive the edge table from the triangle table.

    Local edge k of a triangle is the edge opposite to its vertex k, i.e.
    (vertex[(k+1) % 3], vertex[(k+2) % 3]).

    Returns
    -------
    tuple
       edges (E, 2) with the lower vertex index first,
       edge_triangles (E, 2) with -1 for a missing neighbour,
       triangle_edges (T, 3)
    """
    n_tri = triangles.shape[0]
    local = np.stack([triangles[:, [1, 2]],
                      triangles[:, [2, 0]],
                      triangles[:, [0, 1]]], axis=1).reshape(-1, 2)
    local = np.sort(local, axis=1)
    edges, inverse = np.unique(local, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    triangle_edges = inverse.reshape(n_tri, 3)

    owner = np.repeat(np.arange(n_tri), 3)
    edge_triangles = np.full((edges.shape[0], 2), -1, dtype=int)
    # first owner in triangle order, then the second one
    order = np.argsort(inverse, kind='stable')
    sorted_edges = inverse[order]
    first = np.ones(order.size, dtype=bool)
    first[1:] = sorted_edges[1:] != sorted_edges[:-1]
    edge_triangles[sorted_edges[first], 0] = owner[order[first]]
    edge_triangles[sorted_edges[~first], 1] = owner[order[~first]]

    return edges, edge_triangles, triangle_edges


# - class Mesh -------------------------------------
class Mesh:
    """Triangulation of a polygonal domain with edge topology.

    Parameters
    ----------
    vertices :  ndarray, shape (V, 2)
       Vertex coordinates
    triangles :  ndarray, shape (T, 3)
       Vertex indices per triangle, counterclockwise

    Raises
    ------
    ValueError
       If a triangle has a non-positive signed area or an edge is shared
       by more than two triangles.

    Notes
    -----
    All arrays are read-only after construction, a mesh can be shared
    between workers.
    """
    def __init__(self, vertices, triangles) -> None:
        """Initialize the mesh and its edge topology.
        """
        self.vertices = np.ascontiguousarray(vertices, dtype=float)
        self.triangles = np.ascontiguousarray(triangles, dtype=int)

        area = self.signed_areas()
        if np.any(area <= 0):
            raise ValueError('triangles should be counterclockwise'
                             ' with positive area')

        res = _edge_topology(self.triangles)
        self.edges, self.edge_triangles, self.triangle_edges = res
        counts = np.bincount(self.triangle_edges.reshape(-1),
                             minlength=self.n_edges)
        if np.any(counts > 2):
            raise ValueError('non-manifold edge in triangulation')
        self.boundary_edges = np.nonzero(self.edge_triangles[:, 1] < 0)[0]

        lengths = np.linalg.norm(self.vertices[self.edges[:, 1]]
                                 - self.vertices[self.edges[:, 0]], axis=1)
        self.h = float(lengths.max())

        for arr in (self.vertices, self.triangles, self.edges,
                    self.edge_triangles, self.triangle_edges,
                    self.boundary_edges):
            arr.setflags(write=False)

    def __repr__(self) -> str:
        class_name = type(self).__name__
        return (f'{class_name}(V={self.n_vertices}, E={self.n_edges},'
                f' T={self.n_triangles}, h={self.h:.6g})')

    # ---------- PUBLIC FUNCTIONS ----------
    @property
    def n_vertices(self) -> int:
        """Return number of vertices.
        """
        return self.vertices.shape[0]

    @property
    def n_edges(self) -> int:
        """Return number of edges.
        """
        return self.edges.shape[0]

    @property
    def n_triangles(self) -> int:
        """Return number of triangles.
        """
        return self.triangles.shape[0]

    def signed_areas(self) -> np.ndarray:
        """Return the signed area of each triangle.
        """
        xy0 = self.vertices[self.triangles[:, 0]]
        xy1 = self.vertices[self.triangles[:, 1]]
        xy2 = self.vertices[self.triangles[:, 2]]
        return 0.5 * ((xy1[:, 0] - xy0[:, 0]) * (xy2[:, 1] - xy0[:, 1])
                      - (xy1[:, 1] - xy0[:, 1]) * (xy2[:, 0] - xy0[:, 0]))

    def jacobians(self) -> tuple:
        """Return the affine maps of the reference triangle.

        Returns
        -------
        tuple
           mat (T, 2, 2) with columns x1 - x0 and x2 - x0,
           det (T,) the Jacobian determinants (twice the area)
        """
        xy0 = self.vertices[self.triangles[:, 0]]
        mat = np.stack([self.vertices[self.triangles[:, 1]] - xy0,
                        self.vertices[self.triangles[:, 2]] - xy0], axis=2)
        det = mat[:, 0, 0] * mat[:, 1, 1] - mat[:, 0, 1] * mat[:, 1, 0]
        return mat, det

    def edge_normals(self) -> np.ndarray:
        """Return the global unit normal of every edge.

        The tangent runs from the lower to the higher vertex index, the
        normal is this tangent rotated clockwise.
        """
        tangent = (self.vertices[self.edges[:, 1]]
                   - self.vertices[self.edges[:, 0]])
        tangent /= np.linalg.norm(tangent, axis=1)[:, None]
        return np.stack([tangent[:, 1], -tangent[:, 0]], axis=1)

    def edge_signs(self) -> np.ndarray:
        """Return +1 where the global edge normal points out of a triangle.

        Returns
        -------
        ndarray, shape (T, 3)
           Orientation of local edge k of each triangle
        """
        start = self.triangles[:, [1, 2, 0]]
        return np.where(start == self.edges[self.triangle_edges, 0], 1, -1)

    def boundary_vertices(self) -> np.ndarray:
        """Return sorted indices of the vertices on the boundary.
        """
        return np.unique(self.edges[self.boundary_edges].reshape(-1))

    def euler_characteristic(self) -> int:
        """Return V - E + T.
        """
        return self.n_vertices - self.n_edges + self.n_triangles


# - main functions ---------------------------------
def build_unit_square_mesh(n: int,
                           diagonal='lower-left-to-upper-right') -> Mesh:
    """Build a uniform triangulation of the unit square.

    Parameters
    ----------
    n :  int
       Number of subdivisions per side
    diagonal :  {'lower-left-to-upper-right'}
       Orientation of the cell diagonals

    Returns
    -------
    Mesh
       (n+1)^2 vertices numbered j*(n+1)+i, 2n^2 triangles numbered
       row-major with two triangles per cell

    Raises
    ------
    ValueError
       If n < 1 or the diagonal orientation is not supported
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError('number of subdivisions should be at least 1')
    if diagonal not in DIAGONALS:
        raise ValueError(f'diagonal should be one of {DIAGONALS}')

    coords = np.arange(n + 1) / n
    xx, yy = np.meshgrid(coords, coords)
    vertices = np.stack([xx.reshape(-1), yy.reshape(-1)], axis=1)

    ii, jj = np.meshgrid(np.arange(n), np.arange(n))
    v00 = (jj * (n + 1) + ii).reshape(-1)
    v10 = v00 + 1
    v01 = v00 + n + 1
    v11 = v01 + 1
    triangles = np.empty((2 * n * n, 3), dtype=int)
    triangles[0::2] = np.stack([v00, v10, v11], axis=1)
    triangles[1::2] = np.stack([v00, v11, v01], axis=1)

    return Mesh(vertices, triangles)


def classify_boundary_vertices(mesh: Mesh) -> np.ndarray:
    """Return the sorted indices of the vertices on the domain boundary.
    """
    return mesh.boundary_vertices()
