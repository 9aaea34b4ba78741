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
Shared pytest options and fixtures.
"""
import pytest

from pyncvd.mesh import build_unit_square_mesh


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False,
                     help='run slow convergence sweeps')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip_slow = pytest.mark.skip(reason='needs --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope='session')
def mesh4():
    """Unit square, 4 subdivisions per side."""
    return build_unit_square_mesh(4)


@pytest.fixture(scope='session')
def mesh2():
    return build_unit_square_mesh(2)
