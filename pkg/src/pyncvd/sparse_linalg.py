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
Solve the sparse nonsymmetric and saddle-point systems of the time loop.

A `LinearSystem` holds an assembled matrix, its right-hand side, Dirichlet
constraints and an optional zero-mean constraint, the latter realized by one
augmented Lagrange-multiplier row and column.
"""
__all__ = ['LinearSystem', 'SolverError', 'Factorization', 'apply_dirichlet',
           'solve', 'factorize', 'export_matrix_market']

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.io import mmwrite
from scipy.sparse.csgraph import maximum_bipartite_matching
from scipy.sparse.linalg import LinearOperator, gmres, spilu, splu

# - global parameters ------------------------------
RESIDUAL_TOLERANCE = 1e-10

SOLVER_METHODS = ('direct', 'gmres')

MSG_SINGULAR = 'matrix is singular'


class SolverError(RuntimeError):
    """Failure of a sparse solve.

    Attributes
    ----------
    pivot :  int or None
       Row without a structural pivot, when known
    iterations :  int or None
       Number of Krylov iterations performed (iterative solver)
    step :  int or None
       Time step at which the solve failed, set by the time loop
    """
    def __init__(self, message, pivot=None, iterations=None, step=None):
        super().__init__(message)
        self.pivot = pivot
        self.iterations = iterations
        self.step = step

    def __str__(self) -> str:
        msg = super().__str__()
        if self.pivot is not None:
            msg += f' (zero pivot at row {self.pivot})'
        if self.iterations is not None:
            msg += f' (after {self.iterations} iterations)'
        if self.step is not None:
            msg += f' at time step {self.step}'
        return msg


# - class LinearSystem -----------------------------
@dataclass(frozen=True)
class LinearSystem:
    """Sparse linear system with constraints.

    Parameters
    ----------
    matrix :  scipy.sparse matrix, shape (n, n)
    rhs :  ndarray, shape (n,)
    constrained_dofs :  dict
       Dirichlet values keyed by DOF index
    mean_constraint :  tuple of ndarray, optional
       (dofs, weights): enforce sum(weights * x[dofs]) = 0
    """
    matrix: sparse.spmatrix
    rhs: np.ndarray
    constrained_dofs: dict = field(default_factory=dict)
    mean_constraint: tuple = None

    def __post_init__(self):
        if self.matrix.shape[0] != self.matrix.shape[1]:
            raise ValueError('system matrix should be square')
        if np.shape(self.rhs) != (self.matrix.shape[0],):
            raise ValueError('size of right-hand side does not match matrix')
        if self.mean_constraint is not None:
            dofs, weights = self.mean_constraint
            if len(dofs) != len(weights):
                raise ValueError('mean constraint dofs and weights differ')
            if set(np.asarray(dofs).tolist()) & set(self.constrained_dofs):
                raise ValueError('mean-constrained DOF also has a Dirichlet'
                                 ' value')

    @classmethod
    def from_arrays(cls, matrix, rhs, dofs=None, values=None,
                    mean_constraint=None):
        """Create a system from arrays of constrained DOFs and their values.
        """
        constrained = {}
        if dofs is not None:
            values = np.broadcast_to(np.asarray(values, dtype=float),
                                     np.shape(dofs))
            constrained = dict(zip(np.asarray(dofs).tolist(),
                                   values.tolist()))
        return cls(matrix, np.asarray(rhs, dtype=float), constrained,
                   mean_constraint)

    @property
    def size(self) -> int:
        """Return number of unknowns (excluding a multiplier).
        """
        return self.matrix.shape[0]

    def constraint_arrays(self) -> tuple:
        """Return the constrained DOFs and values as sorted arrays.
        """
        if not self.constrained_dofs:
            return np.empty(0, dtype=int), np.empty(0)
        dofs = np.array(sorted(self.constrained_dofs), dtype=int)
        values = np.array([self.constrained_dofs[x] for x in dofs.tolist()])
        return dofs, values


# - local functions --------------------------------
def _eliminate(matrix, dofs: np.ndarray):
    """Replace rows and columns of constrained DOFs by the identity.
    """
    keep = np.ones(matrix.shape[0])
    keep[dofs] = 0.
    scale = sparse.diags(keep)
    return (scale @ matrix @ scale + sparse.diags(1. - keep)).tocsr()


def _lift(matrix, rhs, dofs, values) -> np.ndarray:
    """Move known values to the right-hand side.
    """
    if dofs.size == 0:
        return np.array(rhs, dtype=float)
    x_bc = np.zeros(matrix.shape[0])
    x_bc[dofs] = values
    res = rhs - matrix @ x_bc
    res[dofs] = values
    return res


def _augment(matrix, rhs, mean_constraint) -> tuple:
    """Add the Lagrange multiplier of a zero-mean constraint.
    """
    if mean_constraint is None:
        return matrix, rhs
    dofs, weights = mean_constraint
    col = sparse.csr_matrix(
        (np.asarray(weights, dtype=float),
         (np.asarray(dofs), np.zeros(len(dofs), dtype=int))),
        shape=(matrix.shape[0], 1))
    aug = sparse.bmat([[matrix, col], [col.T, None]], format='csr')
    return aug, np.append(rhs, 0.)


def _structural_pivot(matrix):
    """Return the first row without a structural pivot, or None.
    """
    pattern = sparse.csr_matrix(matrix, copy=True)
    pattern.eliminate_zeros()
    matching = maximum_bipartite_matching(pattern, perm_type='column')
    unmatched = np.nonzero(matching < 0)[0]
    return int(unmatched[0]) if unmatched.size else None


def _lu_factor(matrix):
    """Sparse LU factorization with COLAMD column ordering.
    """
    try:
        return splu(sparse.csc_matrix(matrix), permc_spec='COLAMD')
    except RuntimeError as exc:
        raise SolverError(MSG_SINGULAR,
                          pivot=_structural_pivot(matrix)) from exc


def _gmres(matrix, rhs, rtol: float, maxiter: int) -> np.ndarray:
    """Restarted GMRES with an incomplete LU preconditioner.
    """
    mat = sparse.csc_matrix(matrix)
    try:
        ilu = spilu(mat, drop_tol=1e-5, fill_factor=20)
    except RuntimeError as exc:
        raise SolverError(MSG_SINGULAR,
                          pivot=_structural_pivot(matrix)) from exc
    precond = LinearOperator(mat.shape, ilu.solve)

    counter = [0]

    def _count(_):
        counter[0] += 1

    res, info = gmres(mat, rhs, rtol=rtol, atol=0., restart=50,
                      maxiter=maxiter, M=precond, callback=_count,
                      callback_type='pr_norm')
    if info != 0:
        raise SolverError('GMRES did not converge', iterations=counter[0])
    return res


def _lu_solve(lu, matrix, rhs) -> np.ndarray:
    """Solve with an LU factorization, refined once on a large residual.
    """
    res = lu.solve(rhs)
    defect = rhs - matrix @ res
    if np.linalg.norm(defect) > RESIDUAL_TOLERANCE * np.linalg.norm(rhs):
        res = res + lu.solve(defect)
    return res


def _check_residual(matrix, rhs, res, strict=False, verbose=False) -> float:
    """Return the relative residual of a solution.

    A residual above RESIDUAL_TOLERANCE raises SolverError when `strict`
    (direct solves) and only warns otherwise; GMRES stops on its own
    tolerance.
    """
    bnorm = np.linalg.norm(rhs)
    rnorm = np.linalg.norm(matrix @ res - rhs)
    rel = rnorm / bnorm if bnorm > 0 else rnorm
    if rel > RESIDUAL_TOLERANCE:
        msg = f'relative residual {rel:.3e} exceeds {RESIDUAL_TOLERANCE:.0e}'
        if strict:
            raise SolverError(msg)
        print(f'[WARNING]: {msg}')
    elif verbose:
        print(f'[INFO]: relative residual {rel:.3e}')
    return rel


# - main functions ---------------------------------
def apply_dirichlet(system: LinearSystem) -> LinearSystem:
    """Eliminate the Dirichlet constraints of a system.

    Constrained rows and columns are replaced by the identity and the
    prescribed values are moved to the right-hand side, so symmetric
    matrices stay symmetric.

    Returns
    -------
    LinearSystem
       system without Dirichlet constraints, the mean constraint is kept
    """
    if not system.constrained_dofs:
        return system

    dofs, values = system.constraint_arrays()
    if dofs.min() < 0 or dofs.max() >= system.size:
        raise ValueError('constrained DOF out of range')
    return replace(system,
                   matrix=_eliminate(system.matrix, dofs),
                   rhs=_lift(system.matrix, system.rhs, dofs, values),
                   constrained_dofs={})


def solve(system: LinearSystem, method='direct', rtol=1e-12, maxiter=200,
          verbose=False) -> np.ndarray:
    """Solve a linear system.

    Parameters
    ----------
    system :  LinearSystem
    method :  {'direct', 'gmres'}
       Sparse LU (default) or restarted GMRES with ILU preconditioner
    rtol :  float
       Relative tolerance of the iterative solver
    maxiter :  int
       Maximum number of GMRES restart cycles
    verbose :  bool

    Returns
    -------
    ndarray
       Solution, without the multiplier of a mean constraint

    Raises
    ------
    SolverError
       On a singular matrix (with the zero-pivot row when structural), when
       GMRES does not converge or when the relative residual of a direct
       solve exceeds RESIDUAL_TOLERANCE
    """
    if method not in SOLVER_METHODS:
        raise ValueError(f'solver method should be one of {SOLVER_METHODS}')

    reduced = apply_dirichlet(system)
    matrix, rhs = _augment(reduced.matrix.tocsr(), reduced.rhs,
                           reduced.mean_constraint)
    if method == 'direct':
        res = _lu_solve(_lu_factor(matrix), matrix, rhs)
    else:
        res = _gmres(matrix, rhs, rtol, maxiter)

    if not np.all(np.isfinite(res)):
        raise SolverError(MSG_SINGULAR, pivot=_structural_pivot(matrix))
    _check_residual(matrix, rhs, res, strict=method == 'direct',
                    verbose=verbose)
    return res[:system.size]


# - class Factorization ----------------------------
class Factorization:
    """Reusable LU factorization of a constrained system.

    The matrix, the constrained DOFs and the mean constraint are fixed;
    right-hand sides and Dirichlet values may change between solves.
    """
    def __init__(self, system: LinearSystem) -> None:
        self.matrix = system.matrix.tocsr()
        self.mean_constraint = system.mean_constraint
        self.dofs, self.values = system.constraint_arrays()
        reduced = _eliminate(self.matrix, self.dofs) \
            if self.dofs.size else self.matrix
        self.reduced, _ = _augment(reduced, np.zeros(self.size),
                                   self.mean_constraint)
        self.lu = _lu_factor(self.reduced)

    def __repr__(self) -> str:
        return (f'Factorization(size={self.size},'
                f' n_constrained={self.dofs.size})')

    @property
    def size(self) -> int:
        """Return number of unknowns.
        """
        return self.matrix.shape[0]

    def solve(self, rhs, bc_values=None) -> np.ndarray:
        """Solve for a new right-hand side.

        Parameters
        ----------
        rhs :  ndarray, shape (n,)
        bc_values :  ndarray, optional
           Dirichlet values in the order of the sorted constrained DOFs,
           default the values the factorization was created with
        """
        values = self.values if bc_values is None \
            else np.broadcast_to(np.asarray(bc_values, dtype=float),
                                 self.dofs.shape)
        vec = _lift(self.matrix, np.asarray(rhs, dtype=float), self.dofs,
                    values)
        if self.mean_constraint is not None:
            vec = np.append(vec, 0.)
        res = _lu_solve(self.lu, self.reduced, vec)
        if not np.all(np.isfinite(res)):
            raise SolverError(MSG_SINGULAR)
        _check_residual(self.reduced, vec, res, strict=True)
        return res[:self.size]


def factorize(system: LinearSystem) -> Factorization:
    """Factorize a system for repeated solves.
    """
    return Factorization(system)


def export_matrix_market(system: LinearSystem, path) -> tuple:
    """Write the constrained system in matrix-market format.

    The matrix is written to `path`, the right-hand side to a file with
    suffix '_rhs' next to it.

    Returns
    -------
    tuple of Path
       matrix file and right-hand side file
    """
    path = Path(path)
    reduced = apply_dirichlet(system)
    matrix, rhs = _augment(reduced.matrix.tocsr(), reduced.rhs,
                           reduced.mean_constraint)
    mat_file = path.with_suffix('.mtx')
    rhs_file = path.with_name(path.stem + '_rhs.mtx')
    mmwrite(mat_file, sparse.coo_matrix(matrix),
            comment='pyncvd constrained system')
    mmwrite(rhs_file, rhs.reshape(-1, 1))
    return mat_file, rhs_file
