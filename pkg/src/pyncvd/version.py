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
Provide access to the software version as obtained from git.
"""

from pyncvd import __version__


def get(full=False) -> str:
    """Returns software version as obtained from git.

    Parameters
    ----------
    full :  bool
       Return the version including the local part (commit, date)
    """
    if full:
        return __version__

    return __version__.split('+')[0]
