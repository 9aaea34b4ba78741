#!/usr/bin/env python3
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
Python script to run the natural convection solver: single runs,
convergence sweeps, stability runs and validation of the manufactured
solutions. Use option '--help' for usage.
"""
import sys

from pyncvd.cli_runner import main


# --------------------------------------------------
if __name__ == '__main__':
    sys.exit(main())
