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
Tests of the divergence-free Raviart-Thomas projection.
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.linalg import null_space

from pyncvd.divfree_projection import (DivFreeProjector, ProjectionMode,
                                       boundary_flux_moments,
                                       project_div_free)
from pyncvd.fem_core import (CellQuadrature, FeSpace, SpaceKind,
                             assemble_bilinear, assemble_load)
from pyncvd.manufactured import StabilityCase, build_case_2d
from pyncvd.mesh import build_unit_square_mesh


def swirl(pts, t=0.):
    """Divergence-free field vanishing on the boundary."""
    return StabilityCase().u(pts, t)


def shear(pts, t=0.):
    """Divergence-free field with nonzero normal trace."""
    return build_case_2d().u(pts, 1.)


@pytest.fixture(scope='module')
def projector(mesh4):
    return DivFreeProjector(mesh4, ProjectionMode.ZERO_TRACE)


def _l2(cquad, values):
    return np.sqrt(cquad.integrate(np.sum(values ** 2, axis=-1)))


def test_zero_input(projector):
    res = projector.project(np.zeros(projector.cquad.dx.shape + (2,)))
    assert_allclose(res.rt_coeffs, 0., atol=1e-15)
    assert res.mode == ProjectionMode.ZERO_TRACE


def test_divergence_and_trace(projector):
    res = projector.project(lambda pts: np.stack(
        [np.sin(3 * pts[..., 1]), pts[..., 0] ** 2], axis=-1), time_index=3)
    assert res.source_time_index == 3
    assert np.abs(res.divergence(projector.cquad)).max() < 1e-10
    assert_allclose(res.rt_coeffs[projector.bdofs], 0., atol=1e-14)


def test_dense_oracle():
    """Compare with the minimizer over the discrete divergence-free space."""
    mesh = build_unit_square_mesh(1)
    cquad = CellQuadrature(mesh, 8)
    rt1 = FeSpace(mesh, SpaceKind.RT1)
    dg1 = FeSpace(mesh, SpaceKind.DGP1)
    velocity = np.stack([cquad.points[..., 1], -cquad.points[..., 0]],
                        axis=-1)

    mass = assemble_bilinear(rt1, rt1, 'mass', quad=cquad).toarray()
    bdiv = assemble_bilinear(dg1, rt1, 'div', quad=cquad).toarray()
    load = assemble_load(rt1, velocity, cquad)
    free = np.setdiff1d(np.arange(rt1.n_dofs), rt1.boundary_dofs())
    basis = null_space(bdiv[:, free])
    expected = np.zeros(rt1.n_dofs)
    expected[free] = basis @ np.linalg.solve(
        basis.T @ mass[np.ix_(free, free)] @ basis, basis.T @ load[free])

    res = project_div_free(velocity, mesh, ProjectionMode.ZERO_TRACE,
                           quad=cquad)
    assert basis.shape[1] == 1
    assert np.abs(expected).max() > 1e-3
    assert_allclose(res.rt_coeffs, expected, atol=1e-12)


def test_idempotent_and_contraction(projector):
    cquad = projector.cquad
    velocity = swirl(cquad.points) + np.array([0.3, -0.1])
    first = projector.project(velocity)
    second = projector.project(first.values(cquad))
    assert_allclose(second.rt_coeffs, first.rt_coeffs, atol=1e-12)
    assert _l2(cquad, first.values(cquad)) <= _l2(cquad, velocity) + 1e-14


def _curl_p2(mesh, cquad, rng):
    """Return the curl of a random P2 stream function at the quadrature points.

    The stream function vanishes on the boundary, so the curl is a discrete
    divergence-free field with zero normal trace.
    """
    psi_vert = rng.standard_normal(mesh.n_vertices)
    psi_vert[mesh.boundary_vertices()] = 0.
    psi_edge = rng.standard_normal(mesh.n_edges)
    psi_edge[mesh.boundary_edges] = 0.

    lam = cquad.rule.points
    # physical gradients of the barycentric coordinates, (T, 3, 2)
    ref_grad = np.array([[-1., -1.], [1., 0.], [0., 1.]])
    grad_lam = np.einsum('tij,kj->tki', cquad.inv_t, ref_grad)
    grad = np.zeros(cquad.dx.shape + (2,))
    for k in range(3):
        coef = psi_vert[mesh.triangles[:, k]]
        grad += np.einsum('t,q,ti->tqi', coef, 4 * lam[:, k] - 1,
                          grad_lam[:, k])
        i, j = (k + 1) % 3, (k + 2) % 3
        coef = 4 * psi_edge[mesh.triangle_edges[:, k]]
        grad += np.einsum('t,q,ti->tqi', coef, lam[:, i], grad_lam[:, j])
        grad += np.einsum('t,q,ti->tqi', coef, lam[:, j], grad_lam[:, i])
    return np.stack([grad[..., 1], -grad[..., 0]], axis=-1)


@pytest.mark.parametrize('n_sub', [4, 8, 16,
                                   pytest.param(32, marks=pytest.mark.slow)])
def test_orthogonality(n_sub):
    """The defect u - w is L2-orthogonal to discrete divergence-free fields."""
    mesh = build_unit_square_mesh(n_sub)
    projector = DivFreeProjector(mesh, ProjectionMode.ZERO_TRACE)
    cquad = projector.cquad
    rng = np.random.default_rng(n_sub)
    coef = rng.standard_normal(4)
    velocity = np.stack(
        [np.sin(coef[0] * cquad.points[..., 1]) + coef[1],
         np.cos(coef[2] * cquad.points[..., 0]) * coef[3]], axis=-1)
    defect = velocity - projector.project(velocity).values(cquad)

    for _ in range(3):
        curl = _curl_p2(mesh, cquad, rng)
        # the curl lies in the discrete space, the projection keeps it
        kept = projector.project(curl).values(cquad)
        assert_allclose(kept, curl, atol=1e-9 * np.abs(curl).max())
        inner = cquad.integrate(np.sum(defect * curl, axis=-1))
        scale = _l2(cquad, defect) * _l2(cquad, curl)
        assert abs(inner) < 1e-11 * scale



def test_convection_skew_symmetric(projector, mesh4):
    proj = projector.project(swirl)
    p1 = FeSpace(mesh4, SpaceKind.P1)
    conv = assemble_bilinear(p1, p1, 'convection',
                             {'b': proj.values(projector.cquad)},
                             quad=projector.cquad)
    assert abs(conv + conv.T).max() < 1e-13


def test_prescribed_trace(mesh4):
    projector = DivFreeProjector(mesh4, 'PrescribedNormalTrace')
    res = projector.project(shear, shear, t=1.)
    assert np.abs(res.divergence(projector.cquad)).max() < 1e-10
    moments = boundary_flux_moments(mesh4, shear, 1.)
    assert_allclose(res.rt_coeffs[projector.bdofs], moments, atol=1e-14)
    assert np.abs(moments).max() > 1e-3


def test_prescribed_trace_needs_data(mesh4):
    projector = DivFreeProjector(mesh4, ProjectionMode.PRESCRIBED_TRACE)
    with pytest.raises(ValueError, match='boundary data'):
        projector.project(shear)
    with pytest.raises(ValueError, match='net outward flux'):
        projector.project(shear, lambda pts, t: pts.copy())


def test_identity_mode(mesh4):
    projector = DivFreeProjector(mesh4, ProjectionMode.IDENTITY)
    assert projector.factor is None
    velocity = shear(projector.cquad.points)
    res = projector.project(velocity)
    assert res.rt_coeffs is None
    assert_allclose(res.values(projector.cquad), velocity)
    with pytest.raises(TypeError):
        res.divergence(projector.cquad)


def test_rt0(mesh4):
    projector = DivFreeProjector(mesh4, ProjectionMode.ZERO_TRACE, rt_order=0)
    res = projector.project(lambda pts: np.stack(
        [np.ones(pts.shape[:-1]), pts[..., 0]], axis=-1))
    assert res.rt_coeffs.size == mesh4.n_edges
    assert np.abs(res.divergence(projector.cquad)).max() < 1e-10
    assert_allclose(res.rt_coeffs[mesh4.boundary_edges], 0., atol=1e-14)


def test_invalid_order(mesh4):
    with pytest.raises(ValueError):
        DivFreeProjector(mesh4, ProjectionMode.ZERO_TRACE, rt_order=2)


def test_convergence_order():
    errors = []
    for n_sub in (8, 16):
        mesh = build_unit_square_mesh(n_sub)
        res = project_div_free(swirl, mesh, ProjectionMode.ZERO_TRACE)
        cquad = CellQuadrature(mesh, 8)
        errors.append(_l2(cquad, res.values(cquad) - swirl(cquad.points)))
    assert 3.5 < errors[0] / errors[1] < 4.5
