# This file is part of pyncvd
#
# https://github.com/pyncvd/pyncvd.git
#
# Copyright (c) 2024 pyncvd developers
#   All Rights Reserved
#
# License:  BSD-3-Clause

"""Python package pyncvd contains a finite element solver for natural
   convection with variable density, its manufactured test cases and
   convergence diagnostics.
"""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version(__name__)
except PackageNotFoundError:
    __version__ = '0.0.0+unknown'
