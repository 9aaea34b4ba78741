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
Finite element spaces on triangles (P1, P1 plus bubble, Raviart-Thomas of
order 0 and 1, discontinuous P0 and P1), reference-element basis functions,
quadrature and element-matrix assembly into CSR matrices.

References
----------
* Raviart-Thomas spaces: D. Boffi, F. Brezzi, M. Fortin, Mixed Finite Element
  Methods and Applications, Springer 2013, chapter 2.3
"""
__all__ = ['SpaceKind', 'QuadRule', 'FeSpace', 'CellQuadrature',
           'quadrature_rule', 'evaluate_basis', 'edge_quadrature',
           'assemble_bilinear', 'assemble_load', 'interpolate_nodal',
           'default_threads']

from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from functools import lru_cache
from os import environ
from weakref import WeakKeyDictionary

import numpy as np
from scipy import sparse
from scipy.special import roots_jacobi, roots_legendre

from .mesh import Mesh

# - global parameters ------------------------------
THREADS_ENV = 'NCVD_THREADS'

MAX_QUAD_DEGREE = 10

# vertices of the reference triangle
REF_VERTICES = np.array([[0., 0.], [1., 0.], [0., 1.]])

# reference gradients of the barycentric coordinates
REF_GRAD_P1 = np.array([[-1., -1.], [1., 0.], [0., 1.]])

BUBBLE_SCALE = 27.


class SpaceKind(Enum):
    """Finite element families supported by `FeSpace`.
    """
    P1 = 'P1Scalar'
    MINI = 'MiniVelocityComponent'
    RT1 = 'RT1'
    DGP1 = 'DGP1'
    RT0 = 'RT0'
    DGP0 = 'DGP0'

    @property
    def is_vector(self) -> bool:
        """Return True for the H(div) families.
        """
        return self in (SpaceKind.RT0, SpaceKind.RT1)

    @property
    def n_local(self) -> int:
        """Return number of local basis functions per triangle.
        """
        return {SpaceKind.P1: 3, SpaceKind.MINI: 4, SpaceKind.RT1: 8,
                SpaceKind.DGP1: 3, SpaceKind.RT0: 3,
                SpaceKind.DGP0: 1}[self]


# - quadrature -------------------------------------
class QuadRule:
    """Quadrature rule on the reference triangle (0,0), (1,0), (0,1).

    Parameters
    ----------
    points :  ndarray, shape (nq, 3)
       Barycentric coordinates of the quadrature points
    weights :  ndarray, shape (nq,)
       Weights, summing to 1/2
    degree :  int
       Polynomial degree integrated exactly
    """
    def __init__(self, points, weights, degree: int) -> None:
        self.points = np.asarray(points, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        self.degree = degree
        self.points.setflags(write=False)
        self.weights.setflags(write=False)

    def __repr__(self) -> str:
        return f'QuadRule(degree={self.degree}, n_points={self.size})'

    @property
    def size(self) -> int:
        """Return number of quadrature points.
        """
        return self.weights.size

    @property
    def xy(self) -> np.ndarray:
        """Return Cartesian reference coordinates, shape (nq, 2).
        """
        return self.points[:, 1:]


@lru_cache(maxsize=None)
def quadrature_rule(degree: int) -> QuadRule:
    """Return a conical-product Gauss rule on the reference triangle.

    The triangle is the image of the unit square under
    (s, v) -> (s, v (1 - s)); the s-direction uses Gauss-Jacobi nodes for
    the weight (1 - s), the v-direction Gauss-Legendre nodes.

    Parameters
    ----------
    degree :  int
       Polynomial degree to integrate exactly, 1 <= degree <= 10

    Returns
    -------
    QuadRule
       rule with ((degree + 2) // 2)^2 points

    Raises
    ------
    ValueError
       If the degree is not supported
    """
    if not isinstance(degree, (int, np.integer)) \
       or not 1 <= degree <= MAX_QUAD_DEGREE:
        raise ValueError(f'quadrature degree should be in [1,'
                         f' {MAX_QUAD_DEGREE}]')

    n_pts = (degree + 2) // 2
    x_jac, w_jac = roots_jacobi(n_pts, 1., 0.)
    x_leg, w_leg = roots_legendre(n_pts)
    s_nodes = (x_jac + 1) / 2
    s_weights = w_jac / 4
    v_nodes = (x_leg + 1) / 2
    v_weights = w_leg / 2

    xx = np.repeat(s_nodes, n_pts)
    yy = np.outer(1 - s_nodes, v_nodes).reshape(-1)
    weights = np.outer(s_weights, v_weights).reshape(-1)
    points = np.stack([1 - xx - yy, xx, yy], axis=1)

    return QuadRule(points, weights, degree)


def edge_quadrature(n_pts=3) -> tuple:
    """Return Gauss-Legendre nodes and weights on [0, 1].
    """
    nodes, weights = roots_legendre(n_pts)
    return (nodes + 1) / 2, weights / 2


# - reference basis functions ----------------------
def _rt_monomials(order: int, xy: np.ndarray) -> tuple:
    """Return a monomial basis of RT_order on the reference triangle.

    Returns
    -------
    tuple
       values (nm, nq, 2), divergences (nm, nq)
    """
    xx = xy[:, 0]
    yy = xy[:, 1]
    one = np.ones_like(xx)
    zero = np.zeros_like(xx)
    if order == 0:
        vals = [(one, zero), (zero, one), (xx, yy)]
        divs = [zero, zero, 2 * one]
    else:
        vals = [(one, zero), (xx, zero), (yy, zero),
                (zero, one), (zero, xx), (zero, yy),
                (xx * xx, xx * yy), (xx * yy, yy * yy)]
        divs = [zero, one, zero, zero, zero, one, 3 * xx, 3 * yy]

    values = np.array([np.stack(val, axis=-1) for val in vals])
    return values, np.array(divs)


@lru_cache(maxsize=None)
def _rt_coefficients(order: int) -> np.ndarray:
    """Return the monomial coefficients of the nodal RT basis.

    The degrees of freedom are, per reference edge k (opposite vertex k and
    running from vertex (k+1)%3 to vertex (k+2)%3), the moments of the outward
    normal trace against the edge hat functions of both end points (order 1)
    or against the constant (order 0); for order 1 followed by the two
    interior moments against the unit vectors.
    """
    s_nodes, s_weights = edge_quadrature(3)
    rows = []
    for k in range(3):
        xy_a = REF_VERTICES[(k + 1) % 3]
        xy_b = REF_VERTICES[(k + 2) % 3]
        tangent = xy_b - xy_a
        normal = np.array([tangent[1], -tangent[0]])   # times edge length
        pts = xy_a[None, :] + s_nodes[:, None] * tangent[None, :]
        vals, _ = _rt_monomials(order, pts)
        flux = vals @ normal
        if order == 0:
            rows.append(flux @ s_weights)
        else:
            rows.append(flux @ (s_weights * (1 - s_nodes)))
            rows.append(flux @ (s_weights * s_nodes))

    if order == 1:
        rule = quadrature_rule(4)
        vals, _ = _rt_monomials(order, rule.xy)
        rows.append(vals[:, :, 0] @ rule.weights)
        rows.append(vals[:, :, 1] @ rule.weights)

    return np.linalg.inv(np.array(rows))


def _as_barycentric(ref_points) -> np.ndarray:
    """Return reference points as an array of shape (nq, 3).
    """
    lam = np.atleast_2d(np.asarray(ref_points, dtype=float))
    if lam.shape[1] != 3:
        raise ValueError('reference points should be barycentric triples')
    return lam


def evaluate_basis(kind: SpaceKind, ref_points) -> tuple:
    """Evaluate the reference basis of a finite element family.

    Parameters
    ----------
    kind :  SpaceKind
       Finite element family
    ref_points :  array_like, shape (3,) or (nq, 3)
       Barycentric coordinates on the reference triangle

    Returns
    -------
    tuple
       Lagrange families: values (nb, nq) and reference gradients
       (nb, nq, 2); Raviart-Thomas families: vector values (nb, nq, 2)
       and divergences (nb, nq)

    Notes
    -----
    The bubble of the mini element is 27 l0 l1 l2, equal to one in the
    barycenter. The order-1 Raviart-Thomas basis is ordered edge by edge
    (two functions per edge, first end point (k+1)%3) followed by the two
    interior functions.
    """
    lam = _as_barycentric(ref_points)
    n_pts = lam.shape[0]

    if kind in (SpaceKind.P1, SpaceKind.DGP1):
        grads = np.broadcast_to(REF_GRAD_P1[:, None, :], (3, n_pts, 2))
        return lam.T.copy(), grads.copy()

    if kind == SpaceKind.DGP0:
        return np.ones((1, n_pts)), np.zeros((1, n_pts, 2))

    if kind == SpaceKind.MINI:
        bubble = BUBBLE_SCALE * lam[:, 0] * lam[:, 1] * lam[:, 2]
        grad_bubble = BUBBLE_SCALE * (
            (lam[:, 1] * lam[:, 2])[:, None] * REF_GRAD_P1[0]
            + (lam[:, 0] * lam[:, 2])[:, None] * REF_GRAD_P1[1]
            + (lam[:, 0] * lam[:, 1])[:, None] * REF_GRAD_P1[2])
        values = np.vstack([lam.T, bubble[None, :]])
        grads = np.concatenate(
            [np.broadcast_to(REF_GRAD_P1[:, None, :], (3, n_pts, 2)),
             grad_bubble[None, :, :]], axis=0)
        return values, grads

    if kind.is_vector:
        order = 1 if kind == SpaceKind.RT1 else 0
        coefs = _rt_coefficients(order)
        vals, divs = _rt_monomials(order, lam[:, 1:])
        return (np.einsum('ji,jqd->iqd', coefs, vals),
                np.einsum('ji,jq->iq', coefs, divs))

    raise KeyError(f'unknown space kind {kind}')


# - class CellQuadrature ---------------------------
class CellQuadrature:
    """Quadrature rule mapped to every triangle of a mesh.

    Parameters
    ----------
    mesh :  Mesh
    rule :  QuadRule or int
       Quadrature rule or its degree

    Attributes
    ----------
    points :  ndarray, shape (T, nq, 2)
       Physical quadrature points
    dx :  ndarray, shape (T, nq)
       Quadrature weights times |det J|
    """
    def __init__(self, mesh: Mesh, rule) -> None:
        self.mesh = mesh
        self.rule = rule if isinstance(rule, QuadRule) \
            else quadrature_rule(rule)
        self.mat, self.det = mesh.jacobians()
        self.inv_t = np.linalg.inv(self.mat).transpose(0, 2, 1)
        xy0 = mesh.vertices[mesh.triangles[:, 0]]
        self.points = xy0[:, None, :] + np.einsum('tij,qj->tqi', self.mat,
                                                  self.rule.xy)
        self.dx = np.abs(self.det)[:, None] * self.rule.weights[None, :]

    def __repr__(self) -> str:
        return f'CellQuadrature({self.mesh!r}, degree={self.rule.degree})'

    @property
    def n_points(self) -> int:
        """Return number of quadrature points per triangle.
        """
        return self.rule.size

    def integrate(self, values: np.ndarray) -> float:
        """Integrate values at the quadrature points over the mesh.
        """
        return float(np.sum(self.dx * values))


# - class FeSpace ----------------------------------
class FeSpace:
    """Degree-of-freedom map of a finite element space on a mesh.

    Parameters
    ----------
    mesh :  Mesh
    kind :  SpaceKind or str
       Finite element family

    Attributes
    ----------
    cell_dofs :  ndarray, shape (T, n_local)
       Global DOF indices per triangle
    cell_signs :  ndarray, shape (T, n_local)
       Orientation of the DOFs (edge DOFs of Raviart-Thomas spaces),
       otherwise ones
    n_dofs :  int
       Dimension of the space

    Notes
    -----
    P1 DOFs are the vertices. Mini DOFs are the vertices followed by one
    bubble per triangle. RT1 DOFs 2e and 2e+1 belong to edge e and its lower
    and higher vertex, DOFs 2E + 2t and 2E + 2t + 1 are interior to triangle
    t. RT0 DOF e is the flux through edge e. Edge DOFs use the global edge
    normal (see `Mesh.edge_normals`).
    """
    def __init__(self, mesh: Mesh, kind) -> None:
        self.mesh = mesh
        self.kind = kind if isinstance(kind, SpaceKind) else SpaceKind(kind)
        self.cell_signs = np.ones((mesh.n_triangles, self.kind.n_local))
        self._cache = WeakKeyDictionary()

        n_tri = mesh.n_triangles
        if self.kind == SpaceKind.P1:
            self.cell_dofs = mesh.triangles.copy()
            self.n_dofs = mesh.n_vertices
        elif self.kind == SpaceKind.MINI:
            self.cell_dofs = np.hstack(
                [mesh.triangles,
                 mesh.n_vertices + np.arange(n_tri)[:, None]])
            self.n_dofs = mesh.n_vertices + n_tri
        elif self.kind == SpaceKind.DGP1:
            self.cell_dofs = np.arange(3 * n_tri).reshape(n_tri, 3)
            self.n_dofs = 3 * n_tri
        elif self.kind == SpaceKind.DGP0:
            self.cell_dofs = np.arange(n_tri)[:, None]
            self.n_dofs = n_tri
        elif self.kind == SpaceKind.RT0:
            self.cell_dofs = mesh.triangle_edges.copy()
            self.cell_signs = mesh.edge_signs().astype(float)
            self.n_dofs = mesh.n_edges
        else:
            self._init_rt1()

        self.cell_dofs.setflags(write=False)

    def _init_rt1(self) -> None:
        """Build the DOF map of the order-1 Raviart-Thomas space.
        """
        mesh = self.mesh
        n_tri = mesh.n_triangles
        signs = mesh.edge_signs()
        dofs = np.empty((n_tri, 8), dtype=int)
        for k in range(3):
            edge = mesh.triangle_edges[:, k]
            start = mesh.triangles[:, (k + 1) % 3]
            at_low = start == mesh.edges[edge, 0]
            dofs[:, 2 * k] = np.where(at_low, 2 * edge, 2 * edge + 1)
            dofs[:, 2 * k + 1] = np.where(at_low, 2 * edge + 1, 2 * edge)
            self.cell_signs[:, 2 * k] = signs[:, k]
            self.cell_signs[:, 2 * k + 1] = signs[:, k]
        dofs[:, 6] = 2 * mesh.n_edges + 2 * np.arange(n_tri)
        dofs[:, 7] = dofs[:, 6] + 1
        self.cell_dofs = dofs
        self.n_dofs = 2 * mesh.n_edges + 2 * n_tri

    def __repr__(self) -> str:
        return f'FeSpace({self.kind.value}, n_dofs={self.n_dofs})'

    # ---------- PUBLIC FUNCTIONS ----------
    @property
    def is_vector(self) -> bool:
        """Return True for H(div) spaces.
        """
        return self.kind.is_vector

    def boundary_dofs(self) -> np.ndarray:
        """Return the DOFs attached to the boundary of the mesh.

        Vertex DOFs for Lagrange spaces, edge DOFs for Raviart-Thomas
        spaces; empty for discontinuous spaces.
        """
        mesh = self.mesh
        if self.kind in (SpaceKind.P1, SpaceKind.MINI):
            return mesh.boundary_vertices()
        if self.kind == SpaceKind.RT0:
            return mesh.boundary_edges.copy()
        if self.kind == SpaceKind.RT1:
            return np.sort(np.concatenate([2 * mesh.boundary_edges,
                                           2 * mesh.boundary_edges + 1]))
        return np.empty(0, dtype=int)

    def tabulate(self, cquad: CellQuadrature) -> dict:
        """Return the physical basis functions at the quadrature points.

        Returns
        -------
        dict
           Lagrange spaces: 'values' (nb, nq), 'grads' (T, nb, nq, 2);
           Raviart-Thomas spaces: 'values' (T, nb, nq, 2), 'divs' (T, nb, nq)
        """
        if cquad.mesh is not self.mesh:
            raise ValueError('quadrature and space are on different meshes')

        if cquad in self._cache:
            return self._cache[cquad]

        ref_vals, ref_other = evaluate_basis(self.kind, cquad.rule.points)
        if self.is_vector:
            scale = self.cell_signs / cquad.det[:, None]
            res = {'values': scale[:, :, None, None]
                   * np.einsum('tij,bqj->tbqi', cquad.mat, ref_vals),
                   'divs': scale[:, :, None] * ref_other[None, :, :]}
        else:
            res = {'values': ref_vals,
                   'grads': np.einsum('tij,bqj->tbqi', cquad.inv_t,
                                      ref_other)}
        self._cache[cquad] = res
        return res

    def evaluate(self, coeffs, cquad: CellQuadrature) -> np.ndarray:
        """Evaluate a coefficient vector at the quadrature points.

        Returns
        -------
        ndarray
           shape (T, nq) for Lagrange spaces, (T, nq, 2) for Raviart-Thomas
        """
        tab = self.tabulate(cquad)
        local = np.asarray(coeffs)[self.cell_dofs]
        if self.is_vector:
            return np.einsum('tb,tbqi->tqi', local, tab['values'])
        return local @ tab['values']

    def evaluate_gradient(self, coeffs, cquad: CellQuadrature) -> np.ndarray:
        """Evaluate the gradient of a Lagrange field, shape (T, nq, 2).
        """
        if self.is_vector:
            raise TypeError('gradient not available for H(div) spaces')
        tab = self.tabulate(cquad)
        local = np.asarray(coeffs)[self.cell_dofs]
        return np.einsum('tb,tbqi->tqi', local, tab['grads'])

    def evaluate_divergence(self, coeffs,
                            cquad: CellQuadrature) -> np.ndarray:
        """Evaluate the divergence of an H(div) field, shape (T, nq).
        """
        if not self.is_vector:
            raise TypeError('divergence only available for H(div) spaces')
        tab = self.tabulate(cquad)
        local = np.asarray(coeffs)[self.cell_dofs]
        return np.einsum('tb,tbq->tq', local, tab['divs'])


# - assembly ---------------------------------------
FORMS = ('mass', 'stiffness', 'convection', 'div', 'reaction')

REQUIRED_COEFFICIENT = {'convection': 'b', 'reaction': 'd'}
DEFAULT_COEFFICIENT = {'mass': 'w', 'stiffness': 'c', 'div': 'd'}


def default_threads() -> int:
    """Return the number of assembly threads set by NCVD_THREADS.

    Values which are not a positive integer fall back to one thread.
    """
    value = environ.get(THREADS_ENV, '1')
    try:
        return max(1, int(value))
    except ValueError:
        print(f'[WARNING]: {THREADS_ENV}={value!r} is not an integer,'
              ' using one thread')
        return 1


def _sample(coef, cquad: CellQuadrature, vector=False) -> np.ndarray:
    """Return a coefficient at the quadrature points.

    A coefficient is a number, an array of values at the quadrature points
    or a callable of the physical points.
    """
    shape = cquad.dx.shape + ((2,) if vector else ())
    if callable(coef):
        coef = coef(cquad.points)
    return np.broadcast_to(np.asarray(coef, dtype=float), shape)


def _cell_values(space: FeSpace, cquad: CellQuadrature, cells: slice,
                 what: str) -> np.ndarray:
    """Return basis data of a space on a block of triangles.
    """
    tab = space.tabulate(cquad)
    n_tri = cquad.dx[cells].shape[0]
    if what == 'values' and not space.is_vector:
        ref = tab['values']
        return np.broadcast_to(ref[None], (n_tri,) + ref.shape)
    return tab[what][cells]


def _local_matrices(space_row, space_col, form, coef, cquad, component,
                    cells: slice) -> np.ndarray:
    """Compute element matrices (T, nr, nc) on a block of triangles.
    """
    dx = cquad.dx[cells]
    if form in ('mass', 'reaction'):
        wdx = dx * coef[cells]
        row = _cell_values(space_row, cquad, cells, 'values')
        col = _cell_values(space_col, cquad, cells, 'values')
        if space_row.is_vector:
            return np.einsum('tq,trqi,tcqi->trc', wdx, row, col)
        return np.einsum('tq,trq,tcq->trc', wdx, row, col)

    if form == 'stiffness':
        row = _cell_values(space_row, cquad, cells, 'grads')
        col = _cell_values(space_col, cquad, cells, 'grads')
        return np.einsum('tq,trqi,tcqi->trc', dx * coef[cells], row, col)

    if form == 'convection':
        row = _cell_values(space_row, cquad, cells, 'values')
        col = _cell_values(space_col, cquad, cells, 'grads')
        return np.einsum('tq,tqi,tcqi,trq->trc', dx, coef[cells], col, row)

    # div
    row = _cell_values(space_row, cquad, cells, 'values')
    if space_col.is_vector:
        col = _cell_values(space_col, cquad, cells, 'divs')
    else:
        col = _cell_values(space_col, cquad, cells, 'grads')[..., component]
    return np.einsum('tq,tcq,trq->trc', dx * coef[cells], col, row)


def assemble_bilinear(space_row: FeSpace, space_col: FeSpace, form: str,
                      coefficients=None, quad=None, component=None,
                      threads=None) -> sparse.csr_matrix:
    """Assemble the matrix of a bilinear form.

    Entry (i, j) equals the sum over triangles of the quadrature value of
    form(phi_j, psi_i), phi_j from `space_col`, psi_i from `space_row`.

    Parameters
    ----------
    space_row, space_col :  FeSpace
       Test and trial spaces on the same mesh
    form :  {'mass', 'stiffness', 'convection', 'div', 'reaction'}
       mass(w): (w phi, psi); stiffness(c): (c grad phi, grad psi);
       convection(b): (b . grad phi, psi); div(d): (d div phi, psi), or
       (d d_k phi, psi) for Lagrange trial spaces; reaction(d): (d phi, psi)
    coefficients :  dict, optional
       Coefficient evaluators keyed by 'w', 'c', 'b' or 'd'
    quad :  CellQuadrature, QuadRule or int, default=8
       Quadrature rule
    component :  {0, 1}, optional
       Derivative direction of the 'div' form on a Lagrange trial space
    threads :  int, optional
       Number of threads over blocks of triangles, default `NCVD_THREADS`

    Returns
    -------
    scipy.sparse.csr_matrix
       Canonical CSR matrix (sorted indices, summed duplicates)

    Raises
    ------
    ValueError
       If the spaces do not share the mesh
    KeyError
       If the form is unknown or a required coefficient is missing
    """
    if space_row.mesh is not space_col.mesh:
        raise ValueError('spaces should share the same mesh')
    if form not in FORMS:
        raise KeyError(f'unknown form {form}, valid forms are {FORMS}')

    coefficients = {} if coefficients is None else coefficients
    if form in REQUIRED_COEFFICIENT:
        name = REQUIRED_COEFFICIENT[form]
        if name not in coefficients:
            raise KeyError(f'form {form} needs coefficient {name!r}')
    else:
        name = DEFAULT_COEFFICIENT[form]
    if form == 'div' and not space_col.is_vector and component is None:
        raise KeyError('div form on a Lagrange space needs a component')

    cquad = quad if isinstance(quad, CellQuadrature) \
        else CellQuadrature(space_row.mesh, 8 if quad is None else quad)
    coef = _sample(coefficients.get(name, 1.), cquad,
                   vector=form == 'convection')

    n_tri = space_row.mesh.n_triangles
    threads = default_threads() if threads is None else max(1, int(threads))
    bounds = np.linspace(0, n_tri, threads + 1).astype(int)
    blocks = [slice(bgn, end) for bgn, end in zip(bounds[:-1], bounds[1:])
              if end > bgn]
    if len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=len(blocks)) as pool:
            local = list(pool.map(
                lambda blk: _local_matrices(space_row, space_col, form, coef,
                                            cquad, component, blk), blocks))
        local = np.concatenate(local, axis=0)
    else:
        local = _local_matrices(space_row, space_col, form, coef, cquad,
                                component, slice(0, n_tri))

    rows = np.broadcast_to(space_row.cell_dofs[:, :, None], local.shape)
    cols = np.broadcast_to(space_col.cell_dofs[:, None, :], local.shape)
    mat = sparse.coo_matrix(
        (local.reshape(-1), (rows.reshape(-1), cols.reshape(-1))),
        shape=(space_row.n_dofs, space_col.n_dofs)).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    return mat


def assemble_load(space: FeSpace, values, quad: CellQuadrature) -> np.ndarray:
    """Assemble the load vector (f, psi_i).

    Parameters
    ----------
    space :  FeSpace
    values :  ndarray or callable
       f at the quadrature points, shape (T, nq) or (T, nq, 2) for H(div)
       spaces, or a callable of the physical points
    quad :  CellQuadrature
    """
    vals = _sample(values, quad, vector=space.is_vector)
    tab = space.tabulate(quad)
    if space.is_vector:
        local = np.einsum('tq,tqi,tbqi->tb', quad.dx, vals, tab['values'])
    else:
        local = np.einsum('tq,tq,bq->tb', quad.dx, vals, tab['values'])
    return np.bincount(space.cell_dofs.reshape(-1), weights=local.reshape(-1),
                       minlength=space.n_dofs)


def interpolate_nodal(space: FeSpace, field, t=0.) -> np.ndarray:
    """Return the nodal interpolant of an analytic field.

    Parameters
    ----------
    space :  FeSpace
       P1 or mini space
    field :  callable
       Scalar evaluator field(points, t), points of shape (..., 2)
    t :  float
       Time

    Returns
    -------
    ndarray
       Vertex values; bubble coefficients are zero

    Raises
    ------
    TypeError
       For Raviart-Thomas and discontinuous spaces
    """
    if space.kind not in (SpaceKind.P1, SpaceKind.MINI):
        raise TypeError(f'no nodal interpolation on {space.kind.value}')

    res = np.zeros(space.n_dofs)
    res[:space.mesh.n_vertices] = field(space.mesh.vertices, t)
    return res
