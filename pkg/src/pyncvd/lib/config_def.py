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
Defines the default run parameters and reads run configuration files.

Configuration files are TOML; sections are allowed and flattened, keys equal
the command-line flags with '-' replaced by '_', e.g.::

   [model]
   mu = 0.1
   kappa = 0.1

   [discretization]
   n = 16
   tau_law = "h2"
"""
__all__ = ['DEFAULT_CONFIG', 'TAU_LAWS', 'CASES', 'BC_MODES', 'PROJECTIONS',
           'STABILITY_DEFAULTS', 'read_config', 'merge_config',
           'tau_from_law']

from pathlib import Path

import toml

# - global parameters ------------------------------
TAU_LAWS = {'h': 1, 'h2': 2, 'h3': 3}

CASES = ('mms2d', 'zero', 'stability')

BC_MODES = ('homogeneous', 'manufactured')

PROJECTIONS = ('zero-trace', 'prescribed-trace', 'identity', 'rt0')

# parameters of the two-dimensional manufactured test problem
DEFAULT_CONFIG = {
    'n': 16,
    'tau': None,
    'tau_law': 'h',
    'mu': 0.1,
    'kappa': 0.1,
    't_final': 1.0,
    'case': 'mms2d',
    'bc': 'manufactured',
    'projection': None,
    'quad_degree': 8,
    'vtk_every': 0,
    'solver': 'direct',
}

# source-free run of 32 steps from smooth initial data
STABILITY_DEFAULTS = {
    'n': 8,
    'tau': 1 / 32,
    't_final': 1.0,
    'case': 'stability',
    'bc': 'homogeneous',
}


# - main functions --------------------------------
def tau_from_law(n: int, law: str) -> float:
    """Return the time step h, h^2 or h^3 for mesh size h = 1/n.
    """
    if law not in TAU_LAWS:
        raise ValueError(f'tau law should be one of {tuple(TAU_LAWS)}')
    return (1. / n) ** TAU_LAWS[law]


def read_config(flname) -> dict:
    """Read a TOML configuration file.

    Parameters
    ----------
    flname : str or Path
       Name of the configuration file

    Returns
    -------
    dict
       Flattened key-value pairs

    Raises
    ------
    FileNotFoundError
       If the file does not exist
    KeyError
       On keys which are not run parameters or on duplicated keys
    """
    flname = Path(flname)
    if not flname.is_file():
        raise FileNotFoundError(f'{flname} does not exist')

    res = {}

    def _flatten(table):
        for key, value in table.items():
            if isinstance(value, dict):
                _flatten(value)
                continue
            key = key.replace('-', '_')
            if key not in DEFAULT_CONFIG:
                raise KeyError(f'unknown configuration key {key!r}')
            if key in res:
                raise KeyError(f'configuration key {key!r} defined twice')
            res[key] = value

    _flatten(toml.load(flname))
    return res


def merge_config(file_values=None, flag_values=None, defaults=None) -> dict:
    """Combine defaults, file values and command-line values.

    Flags override file values, which override the defaults; a value None
    means "not given". A table which sets tau_law without tau discards the
    tau of the tables below it. The optional `defaults` replace entries of
    DEFAULT_CONFIG for one subcommand.
    """
    res = dict(DEFAULT_CONFIG)
    for table in (defaults, file_values, flag_values):
        if table is None:
            continue
        for key in table:
            if key not in DEFAULT_CONFIG:
                raise KeyError(f'unknown configuration key {key!r}')
        if table.get('tau_law') is not None and table.get('tau') is None:
            res['tau'] = None
        for key, value in table.items():
            if value is not None:
                res[key] = value
    return res
