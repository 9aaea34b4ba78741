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
Tests of the triangulation and its edge topology.
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from pyncvd.mesh import Mesh, build_unit_square_mesh, classify_boundary_vertices


@pytest.mark.parametrize('n_sub', [1, 2, 4, 7])
def test_counts(n_sub):
    mesh = build_unit_square_mesh(n_sub)
    assert mesh.n_vertices == (n_sub + 1) ** 2
    assert mesh.n_triangles == 2 * n_sub ** 2
    assert mesh.n_edges == 3 * n_sub ** 2 + 2 * n_sub
    assert mesh.euler_characteristic() == 1
    assert mesh.boundary_edges.size == 4 * n_sub
    assert classify_boundary_vertices(mesh).size == 4 * n_sub


def test_unit_square_n4(mesh4):
    assert (mesh4.n_vertices, mesh4.n_edges, mesh4.n_triangles) == (25, 56, 32)
    assert_allclose(mesh4.signed_areas(), 1 / 32)
    assert mesh4.h == pytest.approx(np.sqrt(2) / 4)
    # vertex j*(n+1)+i sits at (i/n, j/n)
    assert_allclose(mesh4.vertices[7], [0.5, 0.25])


def test_boundary_vertices(mesh4):
    bverts = mesh4.boundary_vertices()
    xy = mesh4.vertices[bverts]
    on_side = np.isclose(xy, 0.).any(axis=1) | np.isclose(xy, 1.).any(axis=1)
    assert on_side.all()
    assert_array_equal(bverts, np.sort(bverts))
    assert 12 not in bverts


def test_edge_topology(mesh4):
    assert np.all(mesh4.edges[:, 0] < mesh4.edges[:, 1])
    interior = mesh4.edge_triangles[:, 1] >= 0
    assert interior.sum() == mesh4.n_edges - mesh4.boundary_edges.size
    for tri in range(mesh4.n_triangles):
        for k in range(3):
            edge = mesh4.edges[mesh4.triangle_edges[tri, k]]
            local = sorted(mesh4.triangles[tri, [(k + 1) % 3, (k + 2) % 3]])
            assert_array_equal(edge, local)


def test_edge_signs_opposite(mesh4):
    signs = mesh4.edge_signs()
    for edge in np.nonzero(mesh4.edge_triangles[:, 1] >= 0)[0]:
        pair = []
        for tri in mesh4.edge_triangles[edge]:
            k = int(np.nonzero(mesh4.triangle_edges[tri] == edge)[0][0])
            pair.append(signs[tri, k])
        assert pair[0] == -pair[1]


def test_edge_normals(mesh4):
    normals = mesh4.edge_normals()
    assert_allclose(np.linalg.norm(normals, axis=1), 1.)
    tangent = (mesh4.vertices[mesh4.edges[:, 1]]
               - mesh4.vertices[mesh4.edges[:, 0]])
    assert_allclose(np.sum(normals * tangent, axis=1), 0., atol=1e-15)


def test_read_only(mesh2):
    with pytest.raises(ValueError):
        mesh2.vertices[0, 0] = 1.
    with pytest.raises(ValueError):
        mesh2.triangle_edges[0, 0] = 0


def test_clockwise_rejected():
    vertices = [[0., 0.], [1., 0.], [0., 1.]]
    with pytest.raises(ValueError, match='counterclockwise'):
        Mesh(vertices, [[0, 2, 1]])


def test_non_manifold_rejected():
    vertices = [[0., 0.], [1., 0.], [0., 1.], [0., -1.], [0.5, 1.]]
    triangles = [[0, 1, 2], [1, 0, 3], [0, 1, 4]]
    with pytest.raises(ValueError, match='non-manifold'):
        Mesh(vertices, triangles)


@pytest.mark.parametrize('n_sub', [0, -2, 1.5])
def test_invalid_subdivisions(n_sub):
    with pytest.raises(ValueError):
        build_unit_square_mesh(n_sub)


def test_invalid_diagonal():
    with pytest.raises(ValueError):
        build_unit_square_mesh(2, diagonal='upper-left-to-lower-right')
