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
Error norms, observed convergence orders and discrete energy reports.
"""
__all__ = ['ErrorRecord', 'EnergyMonitor', 'l2_error', 'eoc',
           'nodal_error', 'energy_report', 'density_identity_defect',
           'write_error_csv', 'read_error_csv', 'write_energy_csv',
           'ERROR_FIELDS']

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import xarray as xr

from .fem_core import CellQuadrature, FeSpace, SpaceKind

# - global parameters ------------------------------
ERROR_FIELDS = ('rho', 'u', 'theta', 'p')

CSV_HEADER = 'h,tau,' + ','.join(f'err_{x},rate_{x}' for x in ERROR_FIELDS)

ENERGY_ATTRS = {
    'sigma_sq': ('squared L2-norm of sigma', ''),
    'sigma_u_sq': ('squared L2-norm of sigma u', ''),
    'sigma_theta_sq': ('squared L2-norm of sigma theta', ''),
    'grad_u_sq': ('squared L2-norm of grad u', ''),
    'grad_theta_sq': ('squared L2-norm of grad theta', ''),
    'sigma_min': ('minimum of sigma over the vertices', ''),
    'density_slack': ('|s1|^2 + |s1 - s0|^2 - |s0|^2 of the last step', ''),
    'density_source': ('2 tau (g2, sigma) of the last step', ''),
    'momentum_slack': ('cumulative momentum energy inequality slack',
                       'positive when satisfied'),
    'temperature_slack': ('cumulative temperature energy inequality slack',
                          'positive when satisfied')}


@dataclass(frozen=True)
class ErrorRecord:
    """L2 errors at the final time of one run.

    Attributes
    ----------
    h, tau :  float
       Mesh size and time step
    err_rho, err_u, err_theta, err_p :  float
       L2 errors of density, velocity, temperature and pressure
    rates :  dict
       Observed orders with respect to the previous (coarser) record,
       empty for the coarsest record
    """
    h: float
    tau: float
    err_rho: float
    err_u: float
    err_theta: float
    err_p: float
    rates: dict = field(default_factory=dict)

    def __post_init__(self):
        if min(self.errors()) < 0:
            raise ValueError('errors should be non-negative')

    def errors(self) -> tuple:
        """Return the errors in the order rho, u, theta, p.
        """
        return tuple(getattr(self, f'err_{x}') for x in ERROR_FIELDS)


# - error norms ------------------------------------
def l2_error(coeffs, space: FeSpace, exact, t=0., quad=8,
             transform=None) -> float:
    """Return the L2 distance between a discrete and an exact field.

    Parameters
    ----------
    coeffs :  ndarray or sequence of ndarray
       Coefficients of the discrete field; a sequence of vectors is treated
       as the components of a vector field
    space :  FeSpace
       Space of each component
    exact :  callable
       Evaluator exact(points, t), scalar or with a trailing component axis
    t :  float
       Time
    quad :  CellQuadrature or int
       Quadrature rule or its degree
    transform :  callable, optional
       Pointwise map applied to the discrete values, e.g. np.square for the
       density computed from sigma
    """
    cquad = quad if isinstance(quad, CellQuadrature) \
        else CellQuadrature(space.mesh, quad)

    if isinstance(coeffs, (list, tuple)):
        values = np.stack([space.evaluate(x, cquad) for x in coeffs],
                          axis=-1)
    else:
        values = space.evaluate(coeffs, cquad)
    if transform is not None:
        values = transform(values)

    diff = values - exact(cquad.points, t)
    if diff.ndim == 3:
        diff = np.sum(diff * diff, axis=-1)
    else:
        diff = diff * diff
    return float(np.sqrt(cquad.integrate(diff)))


def nodal_error(coeffs, space: FeSpace, exact, t=0., quad=8,
                transform=None) -> float:
    """Return the L2 norm of the error of the vertex values.

    The difference between the discrete and the exact vertex values is
    extended as a P1 field, bubble coefficients of the mini space are
    ignored. Arguments are those of `l2_error`.

    Raises
    ------
    TypeError
       For Raviart-Thomas and discontinuous spaces
    """
    if space.kind not in (SpaceKind.P1, SpaceKind.MINI):
        raise TypeError(f'no vertex values in space {space.kind.value}')
    mesh = space.mesh
    p1 = space if space.kind == SpaceKind.P1 else FeSpace(mesh, SpaceKind.P1)
    cquad = quad if isinstance(quad, CellQuadrature) \
        else CellQuadrature(mesh, quad)

    comps = coeffs if isinstance(coeffs, (list, tuple)) else [coeffs]
    nodal = np.stack([np.asarray(x)[:mesh.n_vertices] for x in comps],
                     axis=-1)
    if transform is not None:
        nodal = transform(nodal)
    diff = nodal - np.reshape(exact(mesh.vertices, t), nodal.shape)
    values = np.stack([p1.evaluate(x, cquad) for x in diff.T], axis=-1)
    return float(np.sqrt(cquad.integrate(np.sum(values * values, axis=-1))))


def eoc(records) -> list:
    """Fill in the observed orders of a sequence of records.

    Parameters
    ----------
    records :  sequence of ErrorRecord
       Ordered coarse to fine, h halving from one record to the next

    Returns
    -------
    list of ErrorRecord
       rate = log2(err_coarse / err_fine) per field, none for the first

    Raises
    ------
    ValueError
       If h does not halve between consecutive records
    """
    res = []
    for ii, rec in enumerate(records):
        if ii == 0:
            res.append(replace(rec, rates={}))
            continue
        prev = records[ii - 1]
        if not np.isclose(prev.h, 2 * rec.h, rtol=1e-9, atol=0):
            raise ValueError('mesh size should halve between records')
        rates = {}
        for key, err_c, err_f in zip(ERROR_FIELDS, prev.errors(),
                                     rec.errors()):
            with np.errstate(divide='ignore', invalid='ignore'):
                rates[key] = float(np.log2(err_c / err_f))
        res.append(replace(rec, rates=rates))
    return res


# - error tables -----------------------------------
def _format_row(rec: ErrorRecord) -> str:
    cols = [f'{rec.h:.6g}', f'{rec.tau:.6g}']
    for key, err in zip(ERROR_FIELDS, rec.errors()):
        cols.append(f'{err:.6g}')
        cols.append(f'{rec.rates[key]:.6g}' if key in rec.rates else '')
    return ','.join(cols)


def write_error_csv(records, path, mode='w') -> None:
    """Write error records as CSV.

    The header is written when the file is created (mode 'w'); use mode 'a'
    to append rows to an existing table.
    """
    with Path(path).open(mode, encoding='ascii') as fid:
        if mode == 'w':
            fid.write(CSV_HEADER + '\n')
        for rec in records:
            fid.write(_format_row(rec) + '\n')


def read_error_csv(path) -> list:
    """Read error records written by `write_error_csv`.
    """
    table = np.genfromtxt(path, delimiter=',', names=True, ndmin=1)
    res = []
    for row in table:
        rates = {key: float(row[f'rate_{key}']) for key in ERROR_FIELDS
                 if np.isfinite(row[f'rate_{key}'])}
        res.append(ErrorRecord(float(row['h']), float(row['tau']),
                               *(float(row[f'err_{x}'])
                                 for x in ERROR_FIELDS), rates=rates))
    return res


# - class EnergyMonitor ----------------------------
class EnergyMonitor:
    """Accumulate the discrete energy quantities of a run.

    Parameters
    ----------
    solver :  NcvdSolver
       Provides the quadrature (`cquad`), the spaces (`p1`, `mini`), the
       configuration and the source values (`source_values`)

    Notes
    -----
    The density slack ||s1||^2 + ||s1 - s0||^2 - ||s0||^2 equals
    2 tau (g2, s1) when the transport velocity is divergence-free with zero
    normal trace. The momentum and temperature slacks are the right-hand
    side minus the left-hand side of the summed energy inequalities and are
    only monitored.
    """
    def __init__(self, solver) -> None:
        self.solver = solver
        self.rows = []
        self._prev_sigma = None
        self._sum_f = 0.
        self._sum_g = 0.
        self._sum_grad_u = 0.
        self._sum_grad_theta = 0.
        self._initial = None

    def __len__(self) -> int:
        return len(self.rows)

    def _norms(self, state) -> dict:
        cquad = self.solver.cquad
        p1 = self.solver.p1
        mini = self.solver.mini
        sig = p1.evaluate(state.sigma, cquad)
        vel = np.stack([mini.evaluate(x, cquad) for x in state.u], axis=-1)
        temp = p1.evaluate(state.theta, cquad)
        grad_u = sum(np.sum(mini.evaluate_gradient(x, cquad) ** 2, axis=-1)
                     for x in state.u)
        grad_t = np.sum(p1.evaluate_gradient(state.theta, cquad) ** 2,
                        axis=-1)
        return {'sigma': sig,
                'sigma_sq': cquad.integrate(sig ** 2),
                'sigma_u_sq': cquad.integrate(
                    sig ** 2 * np.sum(vel ** 2, axis=-1)),
                'sigma_theta_sq': cquad.integrate((sig * temp) ** 2),
                'grad_u_sq': cquad.integrate(grad_u),
                'grad_theta_sq': cquad.integrate(grad_t),
                'sigma_min': float(np.min(state.sigma))}

    def record(self, state) -> dict:
        """Add the energy quantities of a new time level.
        """
        cquad = self.solver.cquad
        config = self.solver.config
        tau = config.tau
        norms = self._norms(state)
        sig = norms.pop('sigma')

        if self._prev_sigma is None:
            self._initial = norms
            slack = source = 0.
        else:
            t_new = state.time_index * tau
            sources = self.solver.source_values(t_new)
            prev_sq = cquad.integrate(self._prev_sigma ** 2)
            slack = (norms['sigma_sq'] + cquad.integrate(
                (sig - self._prev_sigma) ** 2) - prev_sq)
            source = 2 * tau * cquad.integrate(sources['g2'] * sig)
            self._sum_f += tau * cquad.integrate(
                np.sum(sources['f'] ** 2, axis=-1))
            self._sum_g += tau * cquad.integrate(sources['g'] ** 2)
            self._sum_grad_u += tau * norms['grad_u_sq']
            self._sum_grad_theta += tau * norms['grad_theta_sq']

        init = self._initial
        row = dict(norms, time_index=state.time_index,
                   density_slack=slack, density_source=source,
                   momentum_slack=(init['sigma_u_sq'] + self._sum_f
                                   - norms['sigma_u_sq']
                                   - 2 * config.mu * self._sum_grad_u),
                   temperature_slack=(init['sigma_theta_sq'] + self._sum_g
                                      - norms['sigma_theta_sq']
                                      - config.kappa * self._sum_grad_theta))
        self.rows.append(row)
        self._prev_sigma = sig
        return row

    def to_xarray(self) -> xr.Dataset:
        """Return the energy report as an xarray Dataset.
        """
        index = np.array([x['time_index'] for x in self.rows], dtype='i4')
        tau = self.solver.config.tau
        xds = xr.Dataset(coords={'time_index': index})
        xds['time'] = xr.DataArray(tau * index, dims=('time_index',),
                                   attrs={'longname': 'time'})
        for key, (longname, comment) in ENERGY_ATTRS.items():
            attrs = {'longname': longname}
            if comment:
                attrs['comment'] = comment
            xds[key] = xr.DataArray(
                np.array([x[key] for x in self.rows], dtype='f8'),
                dims=('time_index',), attrs=attrs)
        xds.attrs = {'tau': tau, 'mu': self.solver.config.mu,
                     'kappa': self.solver.config.kappa}
        return xds


# - main functions ---------------------------------
def energy_report(history, solver) -> xr.Dataset:
    """Compute the energy report of a sequence of snapshots.

    Parameters
    ----------
    history :  sequence of FieldState
       Snapshots of one run, consecutive time levels
    solver :  NcvdSolver
       Solver that produced the snapshots
    """
    monitor = EnergyMonitor(solver)
    for state in history:
        monitor.record(state)
    return monitor.to_xarray()


def density_identity_defect(report: xr.Dataset) -> float:
    """Return the largest density identity defect relative to ||sigma_0||^2.

    The defect of a step is |slack - 2 tau (g2, sigma)|.
    """
    if report.sizes['time_index'] < 2:
        return 0.
    defect = np.abs(report['density_slack'].values[1:]
                    - report['density_source'].values[1:])
    return float(defect.max() / report['sigma_sq'].values[0])


def write_energy_csv(report: xr.Dataset, path) -> None:
    """Write an energy report as CSV, one row per time level.
    """
    report.to_dataframe().to_csv(path, float_format='%.6g')
