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
Tests of the constrained sparse solvers.
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import sparse
from scipy.io import mmread

import pyncvd.sparse_linalg as sparse_linalg
from pyncvd.fem_core import (CellQuadrature, FeSpace, SpaceKind,
                             assemble_bilinear, assemble_load)
from pyncvd.sparse_linalg import (LinearSystem, SolverError, apply_dirichlet,
                                  export_matrix_market, factorize, solve)


def _laplace_1d(size):
    """Neumann Laplacian of a chain, row sums zero."""
    diag = 2. * np.ones(size)
    diag[[0, -1]] = 1.
    return sparse.diags([-np.ones(size - 1), diag, -np.ones(size - 1)],
                        [-1, 0, 1], format='csr')


@pytest.fixture(scope='module')
def poisson(mesh4):
    """P1 Poisson problem -lap u = 1 with u = 0 on the boundary."""
    p1 = FeSpace(mesh4, SpaceKind.P1)
    stiff = assemble_bilinear(p1, p1, 'stiffness')
    rhs = assemble_load(p1, 1., CellQuadrature(mesh4, 2))
    return stiff, rhs, mesh4.boundary_vertices()


def _dense_reference(matrix, rhs, dofs, values):
    mat = matrix.toarray()
    vec = rhs.copy()
    mat[dofs, :] = 0.
    mat[dofs, dofs] = 1.
    vec[dofs] = values
    return np.linalg.solve(mat, vec)


def test_identity():
    rhs = np.array([1., -2., 3.])
    res = solve(LinearSystem(sparse.identity(3, format='csr'), rhs))
    assert_allclose(res, rhs)


def test_two_by_two():
    matrix = sparse.csr_matrix([[2., 1.], [1., 2.]])
    assert_allclose(solve(LinearSystem(matrix, np.array([3., 3.]))), [1., 1.])


def test_chain_with_fixed_end():
    system = LinearSystem.from_arrays(_laplace_1d(6), np.zeros(6), [5], 1.)
    assert_allclose(solve(system), np.ones(6), atol=1e-14)


def test_poisson_against_dense(poisson):
    stiff, rhs, bverts = poisson
    res = solve(LinearSystem.from_arrays(stiff, rhs, bverts, 0.))
    assert_allclose(res, _dense_reference(stiff, rhs, bverts, 0.),
                    atol=1e-13)
    assert_allclose(res[bverts], 0.)
    # maximum of the discrete solution at the centre vertex
    assert np.argmax(res) == 12


def test_apply_dirichlet(poisson):
    stiff, rhs, bverts = poisson
    system = LinearSystem(stiff, rhs)
    assert apply_dirichlet(system) is system

    values = np.linspace(0., 1., bverts.size)
    reduced = apply_dirichlet(LinearSystem.from_arrays(stiff, rhs, bverts,
                                                       values))
    assert reduced.constrained_dofs == {}
    assert abs(reduced.matrix - reduced.matrix.T).max() < 1e-15
    assert_allclose(reduced.rhs[bverts], values)


def test_permutation_equivariance(poisson):
    stiff, rhs, bverts = poisson
    perm = np.random.default_rng(7).permutation(stiff.shape[0])
    inv = np.argsort(perm)
    res = solve(LinearSystem.from_arrays(stiff, rhs, bverts, 0.))
    res_perm = solve(LinearSystem.from_arrays(
        stiff[perm][:, perm], rhs[perm], inv[bverts], 0.))
    assert_allclose(res_perm, res[perm], atol=1e-13)


def test_mean_constraint(mesh4):
    p1 = FeSpace(mesh4, SpaceKind.P1)
    stiff = assemble_bilinear(p1, p1, 'stiffness')
    mass = assemble_bilinear(p1, p1, 'mass')
    lumped = np.asarray(mass.sum(axis=1)).reshape(-1)
    rhs = mass @ (mesh4.vertices[:, 0] - 0.5)
    dofs = np.arange(p1.n_dofs)

    res = solve(LinearSystem(stiff, rhs, mean_constraint=(dofs, lumped)))
    assert lumped @ res == pytest.approx(0., abs=1e-13)
    assert_allclose(stiff @ res, rhs, atol=1e-12)


def test_singular_pivot():
    matrix = sparse.csr_matrix(np.array([[1., 0.], [0., 0.]]))
    with pytest.raises(SolverError) as exc_info:
        solve(LinearSystem(matrix, np.array([1., 0.])))
    assert exc_info.value.pivot == 1
    assert 'row 1' in str(exc_info.value)


def test_gmres(poisson):
    stiff, rhs, bverts = poisson
    system = LinearSystem.from_arrays(stiff, rhs, bverts, 0.)
    assert_allclose(solve(system, method='gmres'), solve(system),
                    rtol=1e-9, atol=1e-12)


def test_factorization(poisson):
    stiff, rhs, bverts = poisson
    system = LinearSystem.from_arrays(stiff, rhs, bverts, 0.)
    factor = factorize(system)
    assert factor.size == stiff.shape[0]
    assert_allclose(factor.solve(rhs), solve(system), atol=1e-14)

    # new boundary values: constant one solves the homogeneous problem
    res = factor.solve(np.zeros_like(rhs), np.ones(bverts.size))
    assert_allclose(res, 1., atol=1e-13)


def test_export(tmp_path, poisson):
    stiff, rhs, bverts = poisson
    system = LinearSystem.from_arrays(stiff, rhs, bverts, 0.,
                                      (np.array([12]), np.array([1.])))
    mat_file, rhs_file = export_matrix_market(system, tmp_path / 'poisson')
    assert mat_file.name == 'poisson.mtx'
    assert rhs_file.name == 'poisson_rhs.mtx'
    matrix = sparse.csr_matrix(mmread(mat_file))
    vec = np.asarray(mmread(rhs_file)).reshape(-1)
    assert matrix.shape == (stiff.shape[0] + 1, stiff.shape[0] + 1)
    assert vec.size == stiff.shape[0] + 1
    res = np.linalg.solve(matrix.toarray(), vec)
    assert res[12] == pytest.approx(0., abs=1e-13)


def test_system_validation():
    with pytest.raises(ValueError):
        LinearSystem(sparse.csr_matrix(np.ones((2, 3))), np.zeros(2))
    with pytest.raises(ValueError):
        LinearSystem(sparse.identity(2, format='csr'), np.zeros(3))
    with pytest.raises(ValueError):
        LinearSystem.from_arrays(sparse.identity(3, format='csr'),
                                 np.zeros(3), [0], 1.,
                                 (np.array([0, 1]), np.ones(2)))
    with pytest.raises(ValueError):
        solve(LinearSystem(sparse.identity(2, format='csr'), np.zeros(2)),
              method='cholesky')


def test_solver_error_message():
    exc = SolverError('matrix is singular', pivot=3, step=5)
    assert str(exc) == 'matrix is singular (zero pivot at row 3) at time step 5'
    assert SolverError('GMRES did not converge', iterations=7).iterations == 7


class _SkewedLu:
    """Factorization returning scaled solutions."""
    def __init__(self, lu, scale):
        self.lu = lu
        self.scale = scale

    def solve(self, rhs):
        return self.scale * self.lu.solve(rhs)


def test_residual_checked(monkeypatch, poisson):
    stiff, rhs, bverts = poisson
    system = LinearSystem.from_arrays(stiff, rhs, bverts, 0.)
    factor = factorize(system)
    expected = factor.solve(rhs)
    exact_lu = sparse_linalg._lu_factor

    # one refinement step repairs a small defect
    monkeypatch.setattr(sparse_linalg, '_lu_factor',
                        lambda matrix: _SkewedLu(exact_lu(matrix), 1 + 1e-8))
    assert_allclose(solve(system), expected, rtol=1e-12, atol=1e-15)

    monkeypatch.setattr(sparse_linalg, '_lu_factor',
                        lambda matrix: _SkewedLu(exact_lu(matrix), 1.01))
    with pytest.raises(SolverError, match='relative residual'):
        solve(system)
    factor.lu = _SkewedLu(factor.lu, 1.01)
    with pytest.raises(SolverError, match='relative residual'):
        factor.solve(rhs)
