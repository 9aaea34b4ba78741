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
Linearized semi-implicit Euler time loop for natural convection with
variable density, in three steps per time level:

1. density: sigma^{n+1} transported by the divergence-free projection of
   u^n;
2. momentum: rho^{n+1}-weighted mini-element saddle-point problem for
   (u^{n+1}, p^{n+1}) with transport velocity u^n;
3. temperature: rho^{n+1}-weighted advection-diffusion problem for
   theta^{n+1} with transport velocity u^n.

Convection terms are skew-symmetrized with half of div(rho^{n+1} u^n).
"""
__all__ = ['SimulationConfig', 'FieldState', 'SimulationResult', 'NcvdSolver',
           'BcMode', 'SourceMode', 'build_case', 'config_from_dict',
           'run_simulation']

from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np
from scipy import sparse

from .diagnostics import EnergyMonitor, ErrorRecord, l2_error, nodal_error
from .divfree_projection import (DivFreeProjector, ProjectedVelocity,
                                 ProjectionMode)
from .fem_core import (MAX_QUAD_DEGREE, CellQuadrature, FeSpace, SpaceKind,
                       assemble_bilinear, assemble_load, interpolate_nodal)
from .lib.config_def import tau_from_law
from .manufactured import (ExactSolution, StabilityCase, ZeroCase,
                           build_case_2d)
from .mesh import build_unit_square_mesh
from .sparse_linalg import SOLVER_METHODS, LinearSystem, SolverError, solve
from .vtk_io import write_snapshot

# - global parameters ------------------------------
ERROR_REFERENCES = ('exact', 'interpolant')


class BcMode(Enum):
    """Boundary values of velocity and temperature.
    """
    HOMOGENEOUS = 'homogeneous'
    MANUFACTURED = 'manufactured'


class SourceMode(Enum):
    """Right-hand sides of the three equations.
    """
    NONE = 'none'
    MANUFACTURED = 'manufactured'


# - class SimulationConfig -------------------------
@dataclass
class SimulationConfig:
    """Parameters of a run.

    The number of steps is round(t_final / tau) and tau is re-normalized to
    t_final / n_steps, so a run ends exactly at t_final.

    Parameters
    ----------
    mu, kappa :  float
       Viscosity and thermal conductivity
    t_final :  float
       End time
    tau :  float
       Time step
    n :  int
       Number of mesh subdivisions per side
    bc_mode :  BcMode
    projection_mode :  ProjectionMode, optional
       Default prescribed trace for manufactured boundary values, zero trace
       for homogeneous ones
    source_mode :  SourceMode
    quad_degree :  int
    rt_order :  {1, 0}
       Raviart-Thomas order of the density transport velocity
    solver :  {'direct', 'gmres'}
    vtk_every :  int
       Write a VTK snapshot every vtk_every steps, 0 disables
    """
    mu: float = 0.1
    kappa: float = 0.1
    t_final: float = 1.0
    tau: float = 1 / 16
    n: int = 16
    bc_mode: BcMode = BcMode.MANUFACTURED
    projection_mode: ProjectionMode = None
    source_mode: SourceMode = SourceMode.MANUFACTURED
    quad_degree: int = 8
    rt_order: int = 1
    solver: str = 'direct'
    vtk_every: int = 0
    n_steps: int = field(init=False)

    def __post_init__(self):
        self.bc_mode = BcMode(self.bc_mode)
        self.source_mode = SourceMode(self.source_mode)
        if self.projection_mode is None:
            self.projection_mode = ProjectionMode.PRESCRIBED_TRACE \
                if self.bc_mode == BcMode.MANUFACTURED \
                else ProjectionMode.ZERO_TRACE
        self.projection_mode = ProjectionMode(self.projection_mode)

        if self.mu <= 0 or self.kappa <= 0:
            raise ValueError('mu and kappa should be positive')
        if self.tau <= 0 or self.t_final <= 0:
            raise ValueError('tau and t_final should be positive')
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError('number of subdivisions should be at least 1')
        if not 1 <= self.quad_degree <= MAX_QUAD_DEGREE:
            raise ValueError(f'quadrature degree should be in [1,'
                             f' {MAX_QUAD_DEGREE}]')
        if self.rt_order not in (0, 1):
            raise ValueError('rt_order should be 0 or 1')
        if self.solver not in SOLVER_METHODS:
            raise ValueError(f'solver should be one of {SOLVER_METHODS}')
        if self.vtk_every < 0:
            raise ValueError('vtk_every should be non-negative')
        if self.bc_mode == BcMode.MANUFACTURED \
           and self.source_mode != SourceMode.MANUFACTURED:
            raise ValueError('manufactured boundary values need'
                             ' manufactured sources')

        self.n_steps = int(round(self.t_final / self.tau))
        if self.n_steps < 1:
            raise ValueError('time step larger than twice the final time')
        self.tau = self.t_final / self.n_steps

    @property
    def h(self) -> float:
        """Return the mesh size 1/n.
        """
        return 1. / self.n


def config_from_dict(values: dict) -> tuple:
    """Convert merged command-line/file parameters to a configuration.

    Parameters
    ----------
    values :  dict
       Keys of `lib.config_def.DEFAULT_CONFIG`

    Returns
    -------
    tuple
       (SimulationConfig, case name)
    """
    case_name = values['case']
    bc_mode = BcMode(values['bc'])
    source_mode = SourceMode.MANUFACTURED if case_name == 'mms2d' \
        else SourceMode.NONE
    if bc_mode == BcMode.MANUFACTURED and case_name == 'zero':
        # exact boundary values of the zero case are homogeneous
        source_mode = SourceMode.MANUFACTURED

    rt_order = 1
    projection = values['projection']
    if projection == 'rt0':
        rt_order = 0
        projection = None
    elif projection is not None:
        projection = {'zero-trace': ProjectionMode.ZERO_TRACE,
                      'prescribed-trace': ProjectionMode.PRESCRIBED_TRACE,
                      'identity': ProjectionMode.IDENTITY}[projection]

    n_sub = values['n']
    tau = values['tau'] if values['tau'] is not None \
        else tau_from_law(n_sub, values['tau_law'])
    config = SimulationConfig(
        mu=values['mu'], kappa=values['kappa'], t_final=values['t_final'],
        tau=tau, n=n_sub, bc_mode=bc_mode, projection_mode=projection,
        source_mode=source_mode, quad_degree=values['quad_degree'],
        rt_order=rt_order, solver=values['solver'],
        vtk_every=values['vtk_every'])
    return config, case_name


def build_case(name: str, mu=0.1, kappa=0.1, f_shift=0.) -> ExactSolution:
    """Return the case with the given name.
    """
    if name == 'mms2d':
        return build_case_2d(mu, kappa, f_shift)
    if name == 'zero':
        return ZeroCase(mu, kappa)
    if name == 'stability':
        return StabilityCase(mu, kappa)
    raise KeyError(f'unknown case {name!r}')


# - class FieldState -------------------------------
@dataclass(frozen=True)
class FieldState:
    """Discrete fields at one time level.

    Attributes
    ----------
    sigma :  ndarray
       P1 coefficients of the square root of the density
    u :  tuple of ndarray
       Mini-element coefficients of both velocity components
    p :  ndarray
       P1 coefficients of the zero-mean pressure
    theta :  ndarray
       P1 coefficients of the temperature
    time_index :  int
    projected_u :  ProjectedVelocity
       Transport velocity of the next density step
    """
    sigma: np.ndarray
    u: tuple
    p: np.ndarray
    theta: np.ndarray
    time_index: int
    projected_u: ProjectedVelocity = None

    @property
    def sigma_min(self) -> float:
        """Return the minimum of sigma over the vertices.
        """
        return float(np.min(self.sigma))

    @property
    def positivity_lost(self) -> bool:
        """Return True when sigma is not positive at some vertex.
        """
        return self.sigma_min <= 0

    def copy(self):
        """Return a snapshot with copied coefficient arrays.
        """
        return replace(self, sigma=self.sigma.copy(),
                       u=tuple(x.copy() for x in self.u), p=self.p.copy(),
                       theta=self.theta.copy())


@dataclass
class SimulationResult:
    """Outcome of `run_simulation`.
    """
    state: FieldState
    energy: object
    errors: ErrorRecord = None
    positivity_lost: bool = False


# - class NcvdSolver -------------------------------
class NcvdSolver:
    """Time integrator of one configuration and case.

    Parameters
    ----------
    config :  SimulationConfig
    case :  ExactSolution
       Initial data, sources and boundary values
    verbose :  bool

    Notes
    -----
    Momentum unknowns are ordered (u_x, u_y, p) with the mini DOFs of each
    component (vertices first, then bubbles) and the P1 pressure DOFs.
    """
    def __init__(self, config: SimulationConfig, case: ExactSolution,
                 verbose=False) -> None:
        self.config = config
        self.case = case
        self.verbose = verbose
        if config.source_mode == SourceMode.MANUFACTURED \
           and not case.has_exact:
            raise ValueError('manufactured sources need an exact solution')

        self.mesh = build_unit_square_mesh(config.n)
        self.cquad = CellQuadrature(self.mesh, config.quad_degree)
        self.p1 = FeSpace(self.mesh, SpaceKind.P1)
        self.mini = FeSpace(self.mesh, SpaceKind.MINI)
        self.projector = DivFreeProjector(self.mesh, config.projection_mode,
                                          config.rt_order, self.cquad,
                                          verbose=verbose)

        self.mass_p1 = assemble_bilinear(self.p1, self.p1, 'mass',
                                         quad=self.cquad)
        self.stiff_p1 = assemble_bilinear(self.p1, self.p1, 'stiffness',
                                          quad=self.cquad)
        self.stiff_mini = assemble_bilinear(self.mini, self.mini, 'stiffness',
                                            quad=self.cquad)
        self.bdiv = [assemble_bilinear(self.p1, self.mini, 'div',
                                       quad=self.cquad, component=k)
                     for k in range(2)]
        self.lumped_p1 = np.asarray(self.mass_p1.sum(axis=1)).reshape(-1)
        self.bverts = self.mesh.boundary_vertices()
        if verbose:
            print(f'[INFO]: {self.mesh!r}, tau={config.tau:.6g},'
                  f' steps={config.n_steps}')

    def __repr__(self) -> str:
        class_name = type(self).__name__
        return f'{class_name}({self.config!r}, case={self.case.name})'

    # ---------- data of the case ----------
    def source_values(self, t: float) -> dict:
        """Return f, g and g2 at the quadrature points at time t.
        """
        pts = self.cquad.points
        if self.config.source_mode == SourceMode.NONE:
            zeros = np.zeros(self.cquad.dx.shape)
            return {'f': np.zeros(zeros.shape + (2,)), 'g': zeros,
                    'g2': zeros}
        return {'f': self.case.f_eval(pts, t), 'g': self.case.g_eval(pts, t),
                'g2': self.case.g2_eval(pts, t)}

    def boundary_values(self, t: float) -> dict:
        """Return velocity and temperature at the boundary vertices.
        """
        if self.config.bc_mode == BcMode.HOMOGENEOUS:
            zeros = np.zeros(self.bverts.size)
            return {'u': (zeros, zeros), 'theta': zeros}
        xy = self.mesh.vertices[self.bverts]
        vel = self.case.u(xy, t)
        return {'u': (vel[:, 0], vel[:, 1]),
                'theta': self.case.theta(xy, t)}

    def _boundary_flux_data(self):
        if self.config.projection_mode != ProjectionMode.PRESCRIBED_TRACE:
            return None
        if self.config.bc_mode == BcMode.HOMOGENEOUS:
            return lambda pts, t: np.zeros(pts.shape)
        return self.case.u

    def velocity_values(self, u_coeffs) -> np.ndarray:
        """Return a mini velocity at the quadrature points, (T, nq, 2).
        """
        return np.stack([self.mini.evaluate(x, self.cquad) for x in u_coeffs],
                        axis=-1)

    def project(self, u_coeffs, time_index: int) -> ProjectedVelocity:
        """Return the transport velocity of the density step.
        """
        return self.projector.project(
            self.velocity_values(u_coeffs), self._boundary_flux_data(),
            time_index * self.config.tau, time_index)

    # ---------- time steps ----------
    def initialize_state(self) -> FieldState:
        """Return the nodal interpolants of the initial data.

        Raises
        ------
        ValueError
           If the initial sigma is not positive at some vertex
        """
        case = self.case
        sigma = interpolate_nodal(self.p1, case.sigma, 0.)
        if np.min(sigma) <= 0:
            raise ValueError('initial density should be positive at all'
                             ' vertices')
        u_0 = tuple(interpolate_nodal(
            self.mini, lambda pts, t, k=k: case.u(pts, t)[..., k], 0.)
                    for k in range(2))
        theta = interpolate_nodal(self.p1, case.theta, 0.)
        return FieldState(sigma, u_0, np.zeros(self.mesh.n_vertices), theta,
                          0, self.project(u_0, 0))

    def _solve(self, system: LinearSystem, step: int) -> np.ndarray:
        try:
            return solve(system, method=self.config.solver,
                         verbose=self.verbose)
        except SolverError as exc:
            exc.step = step
            raise

    def step_density(self, state: FieldState,
                     sources: dict = None) -> np.ndarray:
        """Solve (M/tau + C(w)) sigma^{n+1} = M sigma^n / tau + G2.

        C(w) is the convection matrix of the projected velocity w of the
        state; sigma has no boundary condition.
        """
        tau = self.config.tau
        step = state.time_index + 1
        if sources is None:
            sources = self.source_values(step * tau)
        if state.projected_u is None:
            raise ValueError('state has no projected velocity')
        conv = assemble_bilinear(
            self.p1, self.p1, 'convection',
            {'b': state.projected_u.values(self.cquad)}, quad=self.cquad)
        rhs = self.mass_p1 @ state.sigma / tau \
            + assemble_load(self.p1, sources['g2'], self.cquad)
        return self._solve(LinearSystem(self.mass_p1 / tau + conv, rhs), step)

    def _transport(self, state: FieldState, sigma_new) -> dict:
        """Return the coefficient fields shared by momentum and temperature.
        """
        cquad = self.cquad
        sig_new = self.p1.evaluate(sigma_new, cquad)
        sig_old = self.p1.evaluate(state.sigma, cquad)
        rho = sig_new * sig_new
        grad_rho = 2 * sig_new[..., None] \
            * self.p1.evaluate_gradient(sigma_new, cquad)
        vel = self.velocity_values(state.u)
        div_u = sum(self.mini.evaluate_gradient(x, cquad)[..., k]
                    for k, x in enumerate(state.u))
        return {'rho': rho, 'sigma2': sig_new * sig_old, 'u': vel,
                'b': rho[..., None] * vel,
                'd': 0.5 * (np.sum(grad_rho * vel, axis=-1) + rho * div_u)}

    def _transport_operator(self, space: FeSpace, coef: dict, diffusion,
                            stiffness) -> sparse.csr_matrix:
        """Return (rho/tau) M + diffusion K + C(rho u) + D(d) on a space.
        """
        return (assemble_bilinear(space, space, 'mass',
                                  {'w': coef['rho'] / self.config.tau},
                                  quad=self.cquad)
                + diffusion * stiffness
                + assemble_bilinear(space, space, 'convection',
                                    {'b': coef['b']}, quad=self.cquad)
                + assemble_bilinear(space, space, 'reaction',
                                    {'d': coef['d']}, quad=self.cquad))

    def step_momentum(self, state: FieldState, sigma_new,
                      sources: dict = None, bc_values: dict = None) -> tuple:
        """Solve the saddle-point problem of velocity and pressure.

        Returns
        -------
        tuple
           ((u_x, u_y), p) at the new time level
        """
        tau = self.config.tau
        step = state.time_index + 1
        if sources is None:
            sources = self.source_values(step * tau)
        if bc_values is None:
            bc_values = self.boundary_values(step * tau)
        coef = self._transport(state, sigma_new)

        amat = self._transport_operator(self.mini, coef, self.config.mu,
                                        self.stiff_mini)
        matrix = sparse.bmat(
            [[amat, None, -self.bdiv[0].T],
             [None, amat, -self.bdiv[1].T],
             [-self.bdiv[0], -self.bdiv[1], None]], format='csr')

        n_mini = self.mini.n_dofs
        rhs = np.zeros(matrix.shape[0])
        for k in range(2):
            load = sources['f'][..., k] \
                + coef['sigma2'] * coef['u'][..., k] / tau
            rhs[k * n_mini:(k + 1) * n_mini] = assemble_load(
                self.mini, load, self.cquad)

        dofs = np.concatenate([self.bverts, n_mini + self.bverts])
        values = np.concatenate(bc_values['u'])
        mean = (2 * n_mini + np.arange(self.p1.n_dofs), self.lumped_p1)
        res = self._solve(LinearSystem.from_arrays(matrix, rhs, dofs, values,
                                                   mean), step)
        return ((res[:n_mini], res[n_mini:2 * n_mini]), res[2 * n_mini:])

    def step_temperature(self, state: FieldState, sigma_new,
                         sources: dict = None,
                         bc_values: dict = None) -> np.ndarray:
        """Solve the advection-diffusion problem of the temperature.

        The transport velocity is the velocity u^n of the state.
        """
        tau = self.config.tau
        step = state.time_index + 1
        if sources is None:
            sources = self.source_values(step * tau)
        if bc_values is None:
            bc_values = self.boundary_values(step * tau)
        coef = self._transport(state, sigma_new)

        matrix = self._transport_operator(self.p1, coef, self.config.kappa,
                                          self.stiff_p1)
        theta_old = self.p1.evaluate(state.theta, self.cquad)
        rhs = assemble_load(self.p1,
                            sources['g'] + coef['sigma2'] * theta_old / tau,
                            self.cquad)
        return self._solve(LinearSystem.from_arrays(
            matrix, rhs, self.bverts, bc_values['theta']), step)

    def advance(self, state: FieldState) -> FieldState:
        """Advance the fields by one time step.

        Density, then velocity and pressure, then temperature; the
        projected velocity of the new state is computed from the new
        velocity.
        """
        step = state.time_index + 1
        t_new = step * self.config.tau
        sources = self.source_values(t_new)
        bc_values = self.boundary_values(t_new)

        sigma = self.step_density(state, sources)
        u_new, p_new = self.step_momentum(state, sigma, sources, bc_values)
        theta = self.step_temperature(state, sigma, sources, bc_values)
        try:
            projected = self.project(u_new, step)
        except SolverError as exc:
            exc.step = step
            raise
        return FieldState(sigma, u_new, p_new, theta, step, projected)

    def errors(self, state: FieldState, reference='exact') -> ErrorRecord:
        """Return the L2 errors of a state against the exact solution.

        Parameters
        ----------
        state :  FieldState
        reference :  {'exact', 'interpolant'}
           Measure the distance to the exact fields, or only the error of
           the vertex values (see `nodal_error`)
        """
        if not self.case.has_exact:
            raise ValueError(f'case {self.case.name} has no exact solution')
        if reference not in ERROR_REFERENCES:
            raise ValueError(f'unknown error reference {reference},'
                             f' valid references are {ERROR_REFERENCES}')
        t = state.time_index * self.config.tau
        case = self.case
        norm = l2_error if reference == 'exact' else nodal_error
        return ErrorRecord(
            self.config.h, self.config.tau,
            norm(state.sigma, self.p1, case.rho, t, self.cquad,
                 transform=np.square),
            norm(list(state.u), self.mini, case.u, t, self.cquad),
            norm(state.theta, self.p1, case.theta, t, self.cquad),
            norm(state.p, self.p1, case.p, t, self.cquad))

    def write_vtk(self, state: FieldState, out_dir) -> Path:
        """Write a VTK snapshot of the state at the vertices.
        """
        n_vert = self.mesh.n_vertices
        velocity = np.stack([x[:n_vert] for x in state.u], axis=1)
        flname = Path(out_dir) / f'ncvd_n{self.config.n}' \
            f'_{state.time_index:05d}.vtk'
        write_snapshot(flname, self.mesh,
                       {'sigma': state.sigma, 'rho': state.sigma ** 2,
                        'theta': state.theta, 'p': state.p},
                       {'u': velocity},
                       title=f'time_index={state.time_index}')
        return flname

    def run(self, vtk_dir=None) -> SimulationResult:
        """Integrate from t = 0 to t_final.

        Raises
        ------
        SolverError
           With the failing time step in attribute `step`
        """
        config = self.config
        state = self.initialize_state()
        monitor = EnergyMonitor(self)
        monitor.record(state)
        write_vtk = vtk_dir is not None and config.vtk_every > 0
        if write_vtk:
            Path(vtk_dir).mkdir(parents=True, exist_ok=True)
            self.write_vtk(state, vtk_dir)

        positivity_lost = False
        for _ in range(config.n_steps):
            state = self.advance(state)
            monitor.record(state)
            if state.positivity_lost and not positivity_lost:
                positivity_lost = True
                print(f'[WARNING]: sigma not positive at time step'
                      f' {state.time_index} (min={state.sigma_min:.3e})')
            if write_vtk and state.time_index % config.vtk_every == 0:
                self.write_vtk(state, vtk_dir)
            if self.verbose:
                print(f'[INFO]: step {state.time_index}/{config.n_steps}'
                      f' min(sigma)={state.sigma_min:.6g}')

        errors = self.errors(state) if self.case.has_exact else None
        return SimulationResult(state, monitor.to_xarray(), errors,
                                positivity_lost)


# - main function ----------------------------------
def run_simulation(config: SimulationConfig, case: ExactSolution = None,
                   vtk_dir=None, verbose=False) -> SimulationResult:
    """Run the scheme from t = 0 to t_final.

    Parameters
    ----------
    config :  SimulationConfig
    case :  ExactSolution, optional
       Default the two-dimensional manufactured case with the viscosity and
       conductivity of the configuration
    vtk_dir :  str or Path, optional
       Directory of the VTK snapshots (written when config.vtk_every > 0)
    verbose :  bool

    Returns
    -------
    SimulationResult
       Final state, energy report and (with an exact solution) the errors
       at t_final
    """
    if case is None:
        case = build_case_2d(config.mu, config.kappa)
    return NcvdSolver(config, case, verbose).run(vtk_dir)
