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
Tests of the command-line interface and its exit codes.
"""
import numpy as np
import pytest
from netCDF4 import Dataset

from pyncvd.cli_runner import main
from pyncvd.diagnostics import read_error_csv

ZERO_RUN = ['run', '--case', 'zero', '--bc', 'homogeneous', '--n', '2',
            '--tau', '0.5']


def test_run_zero_case(tmp_path):
    assert main(ZERO_RUN + ['--out', str(tmp_path)]) == 0
    assert (tmp_path / 'run_n2.nc').is_file()
    records = read_error_csv(tmp_path / 'run_n2.csv')
    assert len(records) == 1
    assert records[0].h == 0.5
    assert max(records[0].errors()) == 0.


def test_run_with_config_file(tmp_path):
    config = tmp_path / 'zero.toml'
    config.write_text('case = "zero"\nbc = "homogeneous"\n\n[grid]\nn = 2\n'
                      'tau = 0.5\nvtk_every = 1\n', encoding='ascii')
    out_dir = tmp_path / 'out'
    assert main(['run', '--config', str(config), '--n', '3',
                 '--out', str(out_dir)]) == 0
    assert (out_dir / 'run_n3.csv').is_file()
    assert len(list((out_dir / 'vtk').glob('*.vtk'))) == 3


def test_tau_law_flag_over_config_tau(tmp_path):
    config = tmp_path / 'zero.toml'
    config.write_text('case = "zero"\nbc = "homogeneous"\n\n[grid]\nn = 2\n'
                      'tau = 0.5\n', encoding='ascii')
    assert main(['run', '--config', str(config), '--tau-law', 'h2',
                 '--out', str(tmp_path)]) == 0
    assert read_error_csv(tmp_path / 'run_n2.csv')[0].tau == 0.25


def test_refuse_overwrite(tmp_path):
    argv = ZERO_RUN + ['--out', str(tmp_path)]
    assert main(argv) == 0
    assert main(argv) == 1
    assert main(argv + ['--force']) == 0


@pytest.mark.parametrize('argv', [
    ['run', '--n', '0'],
    ['run', '--mu', '-1'],
    ['run', '--case', 'mms3d'],
    ['run', '--config', 'missing.toml'],
    ['convergence', '--levels', '2', '6'],
    ['convergence', '--levels', '4'],
    ['stability', '--steps', '0'],
    ['stability', '--case', 'mms2d'],
    ['stability', '--bc', 'manufactured'],
    ['unknown'],
    []])
def test_usage_errors(tmp_path, argv):
    if argv:
        argv = argv + ['--out', str(tmp_path)] if argv[0] != 'unknown' \
            else argv
    assert main(argv) == 2


def test_help():
    assert main(['--help']) == 0


def test_stability_passes(tmp_path):
    assert main(['stability', '--n', '4', '--steps', '8',
                 '--out', str(tmp_path)]) == 0
    lines = (tmp_path / 'stability.csv').read_text().splitlines()
    assert len(lines) == 10


def test_stability_steps_with_tau_law(tmp_path):
    assert main(['stability', '--n', '4', '--tau-law', 'h2', '--steps', '4',
                 '--out', str(tmp_path)]) == 0
    lines = (tmp_path / 'stability.csv').read_text().splitlines()
    assert len(lines) == 6


def test_stability_without_projection_fails(tmp_path):
    assert main(['stability', '--n', '4', '--steps', '8', '--break-projection',
                 '--out', str(tmp_path)]) == 1


def test_validate_mms():
    assert main(['validate-mms']) == 0
    assert main(['validate-mms', '--perturb-forcing']) == 1


def test_convergence(tmp_path):
    argv = ['convergence', '--levels', '2', '4', '--t-final', '0.5']
    assert main(argv + ['--out', str(tmp_path / 'serial')]) == 0
    assert main(argv + ['--jobs', '2', '--out',
                        str(tmp_path / 'parallel')]) == 0

    serial = tmp_path / 'serial' / 'convergence_tau-h.csv'
    parallel = tmp_path / 'parallel' / 'convergence_tau-h.csv'
    assert serial.read_text() == parallel.read_text()
    records = read_error_csv(serial)
    assert [x.h for x in records] == [0.5, 0.25]
    assert [x.tau for x in records] == [0.5, 0.25]
    assert records[0].rates == {}
    assert all(np.isfinite(list(records[1].rates.values())))


def _attrs(obj):
    return {key: np.asarray(obj.getncattr(key)).tolist()
            for key in obj.ncattrs()}


def _product_contents(flname):
    """Attributes and variables of all groups of a netCDF4 file."""
    res = {}
    with Dataset(flname) as fid:
        groups = [fid]
        while groups:
            grp = groups.pop()
            res[grp.path] = _attrs(grp)
            for name, var in grp.variables.items():
                res[f'{grp.path}/{name}'] = (var[:].tolist(), _attrs(var))
            groups.extend(grp.groups.values())
    return res


def test_run_reproducible(tmp_path, monkeypatch):
    monkeypatch.setenv('SOURCE_DATE_EPOCH', '1700000000')
    argv = ['run', '--n', '4', '--tau', '0.125', '--t-final', '0.5']
    assert main(argv + ['--out', str(tmp_path / 'first')]) == 0
    assert main(argv + ['--out', str(tmp_path / 'second')]) == 0

    first = tmp_path / 'first'
    second = tmp_path / 'second'
    assert (first / 'run_n4.csv').read_bytes() \
        == (second / 'run_n4.csv').read_bytes()
    assert _product_contents(first / 'run_n4.nc') \
        == _product_contents(second / 'run_n4.nc')
