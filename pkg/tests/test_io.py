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
Tests of the VTK snapshots, the netCDF4 run products and the energy tables.
"""
import numpy as np
import pytest
import xarray as xr
from netCDF4 import Dataset
from numpy.testing import assert_allclose

from pyncvd.diagnostics import write_energy_csv
from pyncvd.ncvd_io import RunProduct, write_run_product
from pyncvd.ncvd_scheme import NcvdSolver, SimulationConfig
from pyncvd.manufactured import build_case_2d
from pyncvd.vtk_io import write_snapshot


@pytest.fixture(scope='module')
def finished_run():
    config = SimulationConfig(n=2, tau=0.25, t_final=0.5)
    solver = NcvdSolver(config, build_case_2d())
    return solver, solver.run()


# - VTK --------------------------------------------
def test_snapshot_layout(tmp_path, mesh2):
    flname = tmp_path / 'snap.vtk'
    velocity = np.column_stack([np.arange(9.), -np.arange(9.)])
    write_snapshot(flname, mesh2, {'p': np.linspace(0., 1., 9)},
                   {'u': velocity}, title='step 0')
    lines = flname.read_text(encoding='ascii').splitlines()

    assert lines[:5] == ['# vtk DataFile Version 2.0', 'step 0', 'ASCII',
                         'DATASET UNSTRUCTURED_GRID', 'POINTS 9 double']
    assert lines[5] == '0 0 0'
    assert lines[14] == 'CELLS 8 32'
    assert lines[15] == '3 0 1 4'
    assert lines[23] == 'CELL_TYPES 8'
    assert lines[24:32] == ['5'] * 8
    assert lines[32] == 'POINT_DATA 9'
    assert lines[33:35] == ['SCALARS p double 1', 'LOOKUP_TABLE default']
    assert float(lines[43]) == 1.
    assert lines[44] == 'VECTORS u double'
    assert lines[46] == '1 -1 0'
    assert len(lines) == 54


def test_snapshot_errors(tmp_path, mesh2):
    with pytest.raises(ValueError):
        write_snapshot(tmp_path / 'a.vtk', mesh2, {'bad name': np.zeros(9)})
    with pytest.raises(ValueError):
        write_snapshot(tmp_path / 'b.vtk', mesh2, {'p': np.zeros(4)})
    with pytest.raises(ValueError):
        write_snapshot(tmp_path / 'c.vtk', mesh2, vectors={'u': np.zeros(9)})


def test_solver_snapshot(tmp_path, finished_run):
    solver, result = finished_run
    flname = solver.write_vtk(result.state, tmp_path)
    assert flname.name == 'ncvd_n2_00002.vtk'
    text = flname.read_text(encoding='ascii')
    for name in ('sigma', 'rho', 'theta', 'p'):
        assert f'SCALARS {name} double 1' in text
    assert 'VECTORS u double' in text


def test_vtk_every(tmp_path):
    config = SimulationConfig(n=2, tau=0.25, t_final=0.5, vtk_every=1)
    NcvdSolver(config, build_case_2d()).run(tmp_path / 'vtk')
    assert len(list((tmp_path / 'vtk').glob('ncvd_n2_*.vtk'))) == 3


# - netCDF4 ----------------------------------------
def test_run_product(tmp_path, finished_run):
    solver, result = finished_run
    flname = write_run_product(tmp_path / 'run.nc', solver, result, 'mms2d')

    with Dataset(flname) as fid:
        assert fid.case == 'mms2d'
        assert fid.product_name == 'run.nc'
        assert fid.config_n == 2
        assert fid['mesh/vertices'].shape == (9, 2)
        assert fid['mesh/triangles'].shape == (8, 3)
        assert fid['fields'].time_index == 2
        assert fid['fields/u_x'].shape == (17,)
        assert_allclose(fid['fields/sigma'][:], result.state.sigma)
        assert fid['errors'].err_u == pytest.approx(result.errors.err_u)

    report = xr.open_dataset(flname, group='energy_report')
    assert report.sizes['time_index'] == 3
    assert_allclose(report['sigma_sq'].values,
                    result.energy['sigma_sq'].values)
    assert report.attrs['tau'] == 0.25
    report.close()


def test_run_product_overwrite(tmp_path, finished_run):
    solver, result = finished_run
    flname = tmp_path / 'run.nc'
    write_run_product(flname, solver, result)
    with pytest.raises(FileExistsError):
        RunProduct(flname)
    write_run_product(flname, solver, result, overwrite=True)


def test_energy_csv(tmp_path, finished_run):
    _, result = finished_run
    flname = tmp_path / 'energy.csv'
    write_energy_csv(result.energy, flname)
    lines = flname.read_text().splitlines()
    assert lines[0].startswith('time_index,time,sigma_sq,sigma_u_sq')
    assert len(lines) == 4
