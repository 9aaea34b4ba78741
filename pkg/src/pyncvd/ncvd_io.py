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
Contains the class `RunProduct` to write the outcome of a simulation to a
netCDF4 file: global attributes, mesh, final fields, errors and the energy
report.
"""
__all__ = ['RunProduct', 'write_run_product']

from pathlib import Path

import numpy as np
from netCDF4 import Dataset

from .lib.attrs_def import attrs_def

# - global parameters ------------------------------
FIELD_ATTRS = {
    'sigma': {'long_name': 'square root of density', 'space': 'P1'},
    'theta': {'long_name': 'temperature', 'space': 'P1'},
    'p': {'long_name': 'pressure', 'space': 'P1',
          'comment': 'zero mean with respect to the lumped mass'},
    'u_x': {'long_name': 'velocity, x-component', 'space': 'P1 + bubble'},
    'u_y': {'long_name': 'velocity, y-component', 'space': 'P1 + bubble'},
}


# - class RunProduct -------------------------------
class RunProduct:
    """Create a netCDF4 product of a simulation run.

    Parameters
    ----------
    product :  str or Path
       Name of the product
    overwrite :  bool, default=False
       Replace an existing product

    Raises
    ------
    FileExistsError
       If the product exists and overwrite is False
    """
    def __init__(self, product, overwrite=False) -> None:
        self.product = Path(product)
        self.fid = None
        self.__report = None
        if self.product.is_file() and not overwrite:
            raise FileExistsError(f'{self.product} exists, use --force')
        self.fid = Dataset(self.product, 'w', format='NETCDF4')

    def __repr__(self) -> str:
        class_name = type(self).__name__
        return f'{class_name}({self.product!r})'

    def __enter__(self):
        """Method called to initiate the context manager.
        """
        return self

    def __exit__(self, exc_type, exc_value, traceback) -> bool:
        """Method called when exiting the context manager.
        """
        self.close()
        return False  # any exception is raised by the with statement.

    def close(self) -> None:
        """Close the product, then append the energy report group.
        """
        if self.fid is None:
            return

        self.fid.close()
        self.fid = None
        if self.__report is not None:
            self.__report.to_netcdf(self.product, mode='a',
                                    group='/energy_report')

    # ---------- PUBLIC FUNCTIONS ----------
    def fill_global_attrs(self, config=None, case_name=None) -> None:
        """Define the global attributes of the product.
        """
        dict_attrs = attrs_def(config, case_name)
        dict_attrs['product_name'] = self.product.name
        for key, value in dict_attrs.items():
            if value is not None:
                self.fid.setncattr(key, value)

    def write_mesh(self, mesh) -> None:
        """Write vertices, triangles and edges.
        """
        gid = self.fid.createGroup('mesh')
        gid.createDimension('vertex', mesh.n_vertices)
        gid.createDimension('triangle', mesh.n_triangles)
        gid.createDimension('edge', mesh.n_edges)
        gid.createDimension('xy', 2)
        gid.createDimension('corner', 3)
        gid.createDimension('end', 2)

        dset = gid.createVariable('vertices', 'f8', ('vertex', 'xy'))
        dset.long_name = 'vertex coordinates'
        dset[:] = mesh.vertices
        dset = gid.createVariable('triangles', 'i4', ('triangle', 'corner'))
        dset.long_name = 'vertex indices, counterclockwise'
        dset[:] = mesh.triangles
        dset = gid.createVariable('edges', 'i4', ('edge', 'end'))
        dset.long_name = 'vertex indices, lower index first'
        dset[:] = mesh.edges

    def write_state(self, state, tau: float) -> None:
        """Write the fields of a state.

        Velocity components are stored with their bubble coefficients
        (dimension 'mini_dof': vertices, then triangles).
        """
        gid = self.fid.createGroup('fields')
        gid.createDimension('vertex', state.sigma.size)
        gid.createDimension('mini_dof', state.u[0].size)
        gid.setncattr('time_index', state.time_index)
        gid.setncattr('time', state.time_index * tau)
        gid.setncattr('sigma_min', state.sigma_min)

        values = {'sigma': state.sigma, 'theta': state.theta, 'p': state.p,
                  'u_x': state.u[0], 'u_y': state.u[1]}
        for key, value in values.items():
            dim = 'mini_dof' if key.startswith('u_') else 'vertex'
            dset = gid.createVariable(key, 'f8', (dim,))
            dset.setncatts(FIELD_ATTRS[key])
            dset[:] = value

    def write_errors(self, record) -> None:
        """Write the L2 errors at the final time as group attributes.
        """
        gid = self.fid.createGroup('errors')
        gid.setncattr('h', record.h)
        gid.setncattr('tau', record.tau)
        for key, value in zip(('rho', 'u', 'theta', 'p'), record.errors()):
            gid.setncattr(f'err_{key}', np.float64(value))

    def add_energy_report(self, report) -> None:
        """Store the energy report, written when the product is closed.
        """
        self.__report = report


# - main function ----------------------------------
def write_run_product(product, solver, result, case_name=None,
                      overwrite=False) -> Path:
    """Write the outcome of `NcvdSolver.run` to a netCDF4 product.
    """
    with RunProduct(product, overwrite) as prod:
        prod.fill_global_attrs(solver.config, case_name)
        prod.write_mesh(solver.mesh)
        prod.write_state(result.state, solver.config.tau)
        if result.errors is not None:
            prod.write_errors(result.errors)
        prod.add_energy_report(result.energy)
    return Path(product)
