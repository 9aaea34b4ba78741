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
Command-line interface: single runs, convergence sweeps, stability runs and
validation of the manufactured solutions.
"""
__all__ = ['main', 'cmd_run', 'cmd_convergence', 'cmd_stability',
           'cmd_validate_mms']

import argparse
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .diagnostics import (density_identity_defect, eoc, write_energy_csv,
                          write_error_csv)
from .lib.config_def import (BC_MODES, CASES, DEFAULT_CONFIG, PROJECTIONS,
                             STABILITY_DEFAULTS, TAU_LAWS, merge_config,
                             read_config, tau_from_law)
from .manufactured import (build_case_2d, build_case_3d, residuals,
                           sample_grid)
from .ncvd_io import write_run_product
from .ncvd_scheme import NcvdSolver, build_case, config_from_dict
from .sparse_linalg import SolverError

# - global parameters ------------------------------
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

DEFAULT_LEVELS = (4, 8, 16, 32, 64)

IDENTITY_TOLERANCE = 1e-9
MMS_TOLERANCE = 1e-6

EPILOG_HELP = """Usage:
  Single run of the manufactured problem with tau = h:
    ncvd_solver.py run --n 16 --tau-law h --mu 0.1 --kappa 0.1
  Convergence sweep with tau = h^2, four workers:
    ncvd_solver.py convergence --tau-law h2 --levels 2 4 8 16 32 --jobs 4
  Discrete energy identity of the density, 32 steps:
    ncvd_solver.py stability --steps 32
  Same run without the divergence-free projection (expected to fail):
    ncvd_solver.py stability --break-projection
  Check the forcings of the manufactured solutions:
    ncvd_solver.py validate-mms
"""

CONFIG_KEYS = tuple(DEFAULT_CONFIG)


# - local functions --------------------------------
def _add_config_flags(parser) -> None:
    """Add flags mirroring the configuration keys (default: not given).
    """
    parser.add_argument('--config', type=Path, default=None,
                        help='TOML file with run parameters')
    parser.add_argument('--n', type=int, default=None,
                        help='number of mesh subdivisions per side')
    parser.add_argument('--tau', type=float, default=None,
                        help='time step, overrides --tau-law')
    parser.add_argument('--tau-law', default=None, choices=tuple(TAU_LAWS),
                        help='time step h, h^2 or h^3 with h = 1/n')
    parser.add_argument('--mu', type=float, default=None, help='viscosity')
    parser.add_argument('--kappa', type=float, default=None,
                        help='thermal conductivity')
    parser.add_argument('--t-final', type=float, default=None,
                        help='final time')
    parser.add_argument('--case', default=None, choices=CASES,
                        help='initial data and exact solution')
    parser.add_argument('--bc', default=None, choices=BC_MODES,
                        help='boundary values of velocity and temperature')
    parser.add_argument('--projection', default=None, choices=PROJECTIONS,
                        help='transport velocity of the density equation')
    parser.add_argument('--quad-degree', type=int, default=None,
                        help='degree of the quadrature rule')
    parser.add_argument('--vtk-every', type=int, default=None,
                        help='write a VTK snapshot every K steps')
    parser.add_argument('--solver', default=None, choices=('direct', 'gmres'),
                        help='sparse direct solver or GMRES')
    parser.add_argument('--out', type=Path, default=Path('.'),
                        help='output directory')
    parser.add_argument('--force', action='store_true',
                        help='overwrite existing output files')
    parser.add_argument('--verbose', action='store_true', help='be verbose')


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='ncvd_solver.py',
        formatter_class=argparse.RawTextHelpFormatter,
        description='Natural convection with variable density:'
        ' finite element runs and diagnostics',
        epilog=EPILOG_HELP)
    subparsers = parser.add_subparsers(dest='subcommand', required=True)

    sub = subparsers.add_parser('run', help='single simulation')
    _add_config_flags(sub)

    sub = subparsers.add_parser('convergence',
                                help='errors and orders for a mesh sequence')
    _add_config_flags(sub)
    sub.add_argument('--levels', type=int, nargs='+',
                     default=list(DEFAULT_LEVELS),
                     help='mesh subdivisions, doubling')
    sub.add_argument('--jobs', type=int, default=1,
                     help='number of concurrent runs')

    sub = subparsers.add_parser('stability',
                                help='discrete energy identity of density')
    _add_config_flags(sub)
    sub.add_argument('--steps', type=int, default=None,
                     help='number of time steps')
    sub.add_argument('--break-projection', action='store_true',
                     help='transport density by the raw velocity')

    sub = subparsers.add_parser('validate-mms',
                                help='finite-difference residuals of the'
                                ' manufactured solutions')
    sub.add_argument('--perturb-forcing', action='store_true',
                     help='add 1 to the momentum forcing')
    sub.add_argument('--verbose', action='store_true', help='be verbose')
    return parser


def _config_values(args, defaults=None) -> dict:
    """Merge defaults, config file and flags.
    """
    file_values = read_config(args.config) if args.config else None
    flag_values = {key: getattr(args, key) for key in CONFIG_KEYS}
    return merge_config(file_values, flag_values, defaults)


def _check_output(path: Path, force: bool) -> None:
    if path.exists() and not force:
        raise FileExistsError(f'{path} exists, use --force to overwrite')


def _run_level(values: dict):
    """Run one resolution of a convergence sweep.
    """
    config, case_name = config_from_dict(values)
    case = build_case(case_name, config.mu, config.kappa)
    return NcvdSolver(config, case).run().errors


# - main functions ---------------------------------
def cmd_run(values: dict, out_dir: Path, force=False, verbose=False) -> int:
    """Run one simulation and write the errors at the final time.

    Writes run_n<n>.csv (errors, exact solutions only), run_n<n>.nc and,
    with vtk_every > 0, VTK snapshots in <out_dir>/vtk.
    """
    config, case_name = config_from_dict(values)
    case = build_case(case_name, config.mu, config.kappa)

    out_dir.mkdir(parents=True, exist_ok=True)
    csv_file = out_dir / f'run_n{config.n}.csv'
    nc_file = out_dir / f'run_n{config.n}.nc'
    _check_output(csv_file, force)
    _check_output(nc_file, force)

    solver = NcvdSolver(config, case, verbose)
    vtk_dir = out_dir / 'vtk' if config.vtk_every > 0 else None
    result = solver.run(vtk_dir)

    if result.errors is not None:
        write_error_csv([result.errors], csv_file)
        rec = result.errors
        print(f'[INFO]: h={rec.h:.6g} tau={rec.tau:.6g}'
              f' err_rho={rec.err_rho:.6g} err_u={rec.err_u:.6g}'
              f' err_theta={rec.err_theta:.6g} err_p={rec.err_p:.6g}')
    else:
        print(f'[WARNING]: case {case_name} has no exact solution,'
              f' no errors written')
    write_run_product(nc_file, solver, result, case_name, overwrite=force)
    return EXIT_OK


def cmd_convergence(values: dict, levels, out_dir: Path, force=False,
                    jobs=1, verbose=False) -> int:
    """Run a sequence of doubling resolutions and write errors and orders.

    The time step follows values['tau_law']; rows are written coarse to
    fine as soon as they are available.
    """
    levels = list(levels)
    if len(levels) < 2 or any(fine != 2 * coarse for coarse, fine
                              in zip(levels[:-1], levels[1:])):
        raise ValueError('levels should double, e.g. 4 8 16')

    out_dir.mkdir(parents=True, exist_ok=True)
    csv_file = out_dir / f'convergence_tau-{values["tau_law"]}.csv'
    _check_output(csv_file, force)

    runs = [dict(values, n=n, tau=None, vtk_every=0) for n in levels]
    records = []
    if jobs > 1:
        pool = ProcessPoolExecutor(max_workers=jobs)
        results = pool.map(_run_level, runs)
    else:
        pool = None
        results = map(_run_level, runs)
    try:
        for res in results:
            if res is None:
                raise ValueError('convergence sweeps need an exact solution')
            records.append(res)
            rec = eoc(records)[-1]
            write_error_csv([rec], csv_file,
                            mode='w' if len(records) == 1 else 'a')
            if verbose:
                print(f'[INFO]: h={rec.h:.6g} done, rates={rec.rates}')
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    return EXIT_OK


def cmd_stability(values: dict, out_dir: Path, force=False,
                  verbose=False) -> int:
    """Source-free run checking the discrete energy identity of the density.

    Exit status 1 when the identity is violated by more than 1e-9 relative
    to ||sigma_0||^2 or when ||sigma|| increases.

    Raises
    ------
    ValueError
       If the case is not the stability case with homogeneous boundary
       values
    """
    for key in ('case', 'bc'):
        if values[key] != STABILITY_DEFAULTS[key]:
            raise ValueError(f'stability runs need {key}='
                             f'{STABILITY_DEFAULTS[key]}, got {values[key]}')
    config, case_name = config_from_dict(values)
    case = build_case(case_name, config.mu, config.kappa)

    out_dir.mkdir(parents=True, exist_ok=True)
    csv_file = out_dir / 'stability.csv'
    _check_output(csv_file, force)

    result = NcvdSolver(config, case, verbose).run()
    report = result.energy
    write_energy_csv(report, csv_file)

    defect = density_identity_defect(report)
    sigma_sq = report['sigma_sq'].values
    growth = float(np.max(np.diff(sigma_sq), initial=0.)) / sigma_sq[0]
    print(f'[INFO]: density identity defect {defect:.3e},'
          f' max growth of |sigma|^2 {growth:.3e}')
    print(f'[INFO]: momentum slack min'
          f' {report["momentum_slack"].values.min():.6g},'
          f' temperature slack min'
          f' {report["temperature_slack"].values.min():.6g} (monitored)')
    if defect > IDENTITY_TOLERANCE or growth > IDENTITY_TOLERANCE:
        print('[FATAL]: discrete energy identity of the density violated')
        return EXIT_FAILURE
    return EXIT_OK


def cmd_validate_mms(perturb_forcing=False, verbose=False) -> int:
    """Check the forcings of the 2D and 3D manufactured cases.
    """
    f_shift = 1. if perturb_forcing else 0.
    status = EXIT_OK
    for case in (build_case_2d(f_shift=f_shift),
                 build_case_3d(f_shift=f_shift)):
        points = sample_grid(case.dim)
        res = residuals(case, points).max(axis=1)
        worst = int(np.argmax(res))
        if verbose or res[worst] <= MMS_TOLERANCE:
            print(f'[INFO]: {case.name} max residual {res[worst]:.3e}')
        if res[worst] > MMS_TOLERANCE:
            print(f'[FATAL]: {case.name} residual {res[worst]:.3e} at'
                  f' (x, t) = {tuple(float(x) for x in points[worst])}')
            status = EXIT_FAILURE
    return status


def main(argv=None) -> int:
    """
    main function

    Returns
    -------
    int
       0 on success, 1 on solver failure, identity violation, failed
       validation or refused overwrite, 2 on invalid flags or configuration
    """
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK

    if args.subcommand == 'validate-mms':
        return cmd_validate_mms(args.perturb_forcing, args.verbose)

    try:
        if args.subcommand == 'stability':
            values = _config_values(args, STABILITY_DEFAULTS)
            if args.steps is not None:
                if args.steps < 1:
                    raise ValueError('number of steps should be positive')
                if values['tau'] is None:
                    values['tau'] = tau_from_law(values['n'],
                                                 values['tau_law'])
                values['t_final'] = args.steps * values['tau']
            if args.break_projection:
                values['projection'] = 'identity'
        else:
            values = _config_values(args)
        if args.verbose:
            print(f'[INFO]: configuration {values}')
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f'[FATAL]: invalid configuration: {exc}')
        return EXIT_USAGE

    try:
        if args.subcommand == 'run':
            return cmd_run(values, args.out, args.force, args.verbose)
        if args.subcommand == 'convergence':
            return cmd_convergence(values, args.levels, args.out, args.force,
                                   args.jobs, args.verbose)
        return cmd_stability(values, args.out, args.force, args.verbose)
    except (ValueError, KeyError) as exc:
        print(f'[FATAL]: invalid configuration: {exc}')
        return EXIT_USAGE
    except SolverError as exc:
        print(f'[FATAL]: solver failure: {exc}')
        return EXIT_FAILURE
    except FileExistsError as exc:
        print(f'[FATAL]: {exc}')
        return EXIT_FAILURE
