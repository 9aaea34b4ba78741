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
L2 projection of a velocity field onto divergence-free Raviart-Thomas
fields with a controlled normal trace.

The projection w of u solves the mixed problem: find w in RT, l in DG with

    (w, v) + (l, div v) = (u, v)   for all v
    (div w, q) = 0                 for all q

where the boundary normal moments of w are imposed strongly.
"""
__all__ = ['ProjectionMode', 'ProjectedVelocity', 'DivFreeProjector',
           'project_div_free', 'boundary_flux_moments']

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import sparse

from .fem_core import (CellQuadrature, FeSpace, SpaceKind, assemble_bilinear,
                       assemble_load, edge_quadrature)
from .mesh import Mesh
from .sparse_linalg import LinearSystem, factorize

# - global parameters ------------------------------
FLUX_TOLERANCE = 1e-10


class ProjectionMode(Enum):
    """Boundary treatment of the divergence-free projection.
    """
    ZERO_TRACE = 'ZeroNormalTrace'
    PRESCRIBED_TRACE = 'PrescribedNormalTrace'
    IDENTITY = 'Identity'


@dataclass(frozen=True)
class ProjectedVelocity:
    """Transport velocity of the density step.

    Attributes
    ----------
    rt_coeffs :  ndarray or None
       Raviart-Thomas coefficients, None in identity mode
    mode :  ProjectionMode
    source_time_index :  int
       Time level of the projected velocity
    space :  FeSpace or None
       Raviart-Thomas space of `rt_coeffs`
    raw_values :  ndarray or None
       Velocity at the quadrature points (identity mode only)
    """
    rt_coeffs: np.ndarray
    mode: ProjectionMode
    source_time_index: int
    space: FeSpace = None
    raw_values: np.ndarray = None

    def values(self, cquad: CellQuadrature) -> np.ndarray:
        """Return the velocity at the quadrature points, shape (T, nq, 2).
        """
        if self.rt_coeffs is None:
            return self.raw_values
        return self.space.evaluate(self.rt_coeffs, cquad)

    def divergence(self, cquad: CellQuadrature) -> np.ndarray:
        """Return the divergence at the quadrature points, shape (T, nq).
        """
        if self.rt_coeffs is None:
            raise TypeError('divergence not available in identity mode')
        return self.space.evaluate_divergence(self.rt_coeffs, cquad)


# - local functions --------------------------------
def _outward_signs(mesh: Mesh, edges: np.ndarray) -> np.ndarray:
    """Return +1 where the global normal of a boundary edge points outward.
    """
    tri = mesh.edge_triangles[edges, 0]
    centroid = mesh.vertices[mesh.triangles[tri]].mean(axis=1)
    midpoint = mesh.vertices[mesh.edges[edges]].mean(axis=1)
    inner = np.sum((midpoint - centroid) * mesh.edge_normals()[edges], axis=1)
    return np.where(inner > 0, 1., -1.)


def boundary_flux_moments(mesh: Mesh, velocity, t=0., rt_order=1,
                          n_pts=3) -> np.ndarray:
    """Return the normal moments of a velocity on the boundary edges.

    Parameters
    ----------
    mesh :  Mesh
    velocity :  callable
       Evaluator velocity(points, t) of shape (..., 2)
    t :  float
    rt_order :  {0, 1}
       0: flux per boundary edge; 1: moments against the hat functions of
       the lower and higher vertex, interleaved per edge
    n_pts :  int
       Gauss points per edge

    Returns
    -------
    ndarray
       Moments with respect to the global edge normals, ordered like
       `FeSpace.boundary_dofs`
    """
    edges = mesh.boundary_edges
    nodes, weights = edge_quadrature(n_pts)
    xy_lo = mesh.vertices[mesh.edges[edges, 0]]
    xy_hi = mesh.vertices[mesh.edges[edges, 1]]
    length = np.linalg.norm(xy_hi - xy_lo, axis=1)
    pts = xy_lo[:, None, :] + nodes[None, :, None] * (xy_hi - xy_lo)[:, None]
    flux = np.einsum('eqi,ei->eq', velocity(pts, t),
                     mesh.edge_normals()[edges])
    flux *= length[:, None] * weights[None, :]
    if rt_order == 0:
        return flux.sum(axis=1)
    return np.stack([flux @ (1 - nodes), flux @ nodes], axis=1).reshape(-1)


# - class DivFreeProjector -------------------------
class DivFreeProjector:
    """Assemble and factorize the mixed projection system of a mesh.

    Parameters
    ----------
    mesh :  Mesh
    mode :  ProjectionMode or str
    rt_order :  {1, 0}
       Order of the Raviart-Thomas space; order 0 uses a piecewise constant
       multiplier
    quad :  CellQuadrature or int, default=8
       Quadrature of the right-hand side and the system matrix
    verbose :  bool
    """
    def __init__(self, mesh: Mesh, mode, rt_order=1, quad=None,
                 verbose=False) -> None:
        self.mesh = mesh
        self.mode = mode if isinstance(mode, ProjectionMode) \
            else ProjectionMode(mode)
        if rt_order not in (0, 1):
            raise ValueError('order of Raviart-Thomas space should be 0 or 1')
        self.rt_order = rt_order
        self.verbose = verbose
        self.cquad = quad if isinstance(quad, CellQuadrature) \
            else CellQuadrature(mesh, 8 if quad is None else quad)
        self.rt_space = None
        self.dg_space = None
        self.factor = None
        if self.mode != ProjectionMode.IDENTITY:
            self.__build()

    def __repr__(self) -> str:
        class_name = type(self).__name__
        return (f'{class_name}({self.mesh!r}, mode={self.mode.value},'
                f' rt_order={self.rt_order})')

    def __build(self) -> None:
        """Assemble and factorize the mixed system.
        """
        if self.rt_order == 1:
            kinds = (SpaceKind.RT1, SpaceKind.DGP1)
        else:
            kinds = (SpaceKind.RT0, SpaceKind.DGP0)
        self.rt_space = FeSpace(self.mesh, kinds[0])
        self.dg_space = FeSpace(self.mesh, kinds[1])

        mass = assemble_bilinear(self.rt_space, self.rt_space, 'mass',
                                 quad=self.cquad)
        bdiv = assemble_bilinear(self.dg_space, self.rt_space, 'div',
                                 quad=self.cquad)
        matrix = sparse.bmat([[mass, bdiv.T], [bdiv, None]], format='csr')

        n_rt = self.rt_space.n_dofs
        area = np.abs(self.mesh.signed_areas())
        weights = np.repeat(area / self.dg_space.kind.n_local,
                            self.dg_space.kind.n_local)
        mean = (n_rt + self.dg_space.cell_dofs.reshape(-1), weights)

        self.bdofs = self.rt_space.boundary_dofs()
        system = LinearSystem.from_arrays(matrix, np.zeros(matrix.shape[0]),
                                          self.bdofs, 0., mean)
        self.factor = factorize(system)
        if self.verbose:
            print(f'[INFO]: projection system of size {matrix.shape[0]}'
                  f' factorized')

    # ---------- PUBLIC FUNCTIONS ----------
    def project(self, velocity, boundary_normal_data=None, t=0.,
                time_index=0) -> ProjectedVelocity:
        """Project a velocity field.

        Parameters
        ----------
        velocity :  ndarray or callable
           Velocity at the quadrature points, shape (T, nq, 2), or an
           evaluator of the physical points
        boundary_normal_data :  callable, optional
           Evaluator data(points, t) of the boundary velocity, required in
           prescribed-trace mode
        t :  float
           Time of the boundary data
        time_index :  int

        Returns
        -------
        ProjectedVelocity

        Raises
        ------
        ValueError
           If boundary data are missing or have a nonzero net flux
        SolverError
           If the mixed system is singular
        """
        if callable(velocity):
            velocity = velocity(self.cquad.points)
        velocity = np.asarray(velocity, dtype=float)

        if self.mode == ProjectionMode.IDENTITY:
            return ProjectedVelocity(None, self.mode, time_index,
                                     raw_values=velocity)

        bc_values = np.zeros(self.bdofs.size)
        if self.mode == ProjectionMode.PRESCRIBED_TRACE:
            if boundary_normal_data is None:
                raise ValueError('prescribed-trace projection needs'
                                 ' boundary data')
            bc_values = boundary_flux_moments(self.mesh, boundary_normal_data,
                                              t, self.rt_order)
            per_edge = bc_values.reshape(self.mesh.boundary_edges.size, -1)
            net_flux = np.sum(per_edge.sum(axis=1) * _outward_signs(
                self.mesh, self.mesh.boundary_edges))
            if abs(net_flux) > FLUX_TOLERANCE:
                raise ValueError(f'boundary data have net outward flux'
                                 f' {net_flux:.3e}')

        rhs = np.zeros(self.factor.size)
        rhs[:self.rt_space.n_dofs] = assemble_load(self.rt_space, velocity,
                                                   self.cquad)
        res = self.factor.solve(rhs, bc_values)
        return ProjectedVelocity(res[:self.rt_space.n_dofs], self.mode,
                                 time_index, self.rt_space)

    def interpolate(self, rt_coeffs) -> ProjectedVelocity:
        """Wrap Raviart-Thomas coefficients as a projected velocity.
        """
        return ProjectedVelocity(np.asarray(rt_coeffs, dtype=float),
                                 self.mode, 0, self.rt_space)


# - main function ----------------------------------
def project_div_free(velocity, mesh: Mesh, mode, boundary_normal_data=None,
                     t=0., rt_order=1, quad=None) -> ProjectedVelocity:
    """Project a velocity onto divergence-free Raviart-Thomas fields.

    Builds a `DivFreeProjector`; use the class directly to project many
    fields on the same mesh.
    """
    projector = DivFreeProjector(mesh, mode, rt_order, quad)
    return projector.project(velocity, boundary_normal_data, t)
