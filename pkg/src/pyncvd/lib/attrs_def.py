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
Provides the common global-attributes for pyncvd run products.
"""
__all__ = ['attrs_def']

from dataclasses import asdict
from datetime import datetime, timezone
from os import environ

import pyncvd.version as version


# - local functions --------------------------------
def _creation_time() -> datetime:
    """Return the creation time, fixed by SOURCE_DATE_EPOCH when set."""
    epoch = environ.get('SOURCE_DATE_EPOCH')
    if epoch:
        return datetime.fromtimestamp(int(epoch), timezone.utc)
    return datetime.now(timezone.utc)


# - main functions --------------------------------
def attrs_def(config=None, case_name=None) -> dict:
    """
    Defines all global attributes for a run product.

    Parameters
    ----------
    config : SimulationConfig, optional
       Configuration of the run, stored as attributes 'config_<key>'
    case_name : str, optional
       Name of the initial data / manufactured case

    Returns
    -------
    dict
       Global attributes of a netCDF4 run product
    """
    res = {
        "title": "Natural convection with variable density",
        "conventions": "CF-1.6",
        "source": "finite element simulation, mini element velocity,"
                  " P1 pressure, P1 density and temperature",
        "time_scheme": "linearized semi-implicit backward Euler",
        "product_name": None,
        "case": case_name,
        "date_created": _creation_time().isoformat(timespec='milliseconds'),
        "software_name": 'https://github.com/pyncvd/pyncvd',
        "software_version": version.get(),
    }

    if config is not None:
        for key, value in asdict(config).items():
            if hasattr(value, 'value'):
                value = value.value
            if value is None or isinstance(value, bool):
                value = str(value)
            res[f'config_{key}'] = value

    return res
