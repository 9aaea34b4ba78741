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
Write triangle meshes and vertex fields as legacy ASCII VTK (version 2.0)
unstructured grids.
"""
__all__ = ['write_snapshot']

from pathlib import Path

import numpy as np

# - global parameters ------------------------------
VTK_TRIANGLE = 5


# - local functions --------------------------------
def _check_name(name: str) -> str:
    if not name or any(x.isspace() for x in name):
        raise ValueError(f'invalid VTK field name {name!r}')
    return name


def _lines_points(vertices: np.ndarray) -> list:
    xyz = np.zeros((vertices.shape[0], 3))
    xyz[:, :vertices.shape[1]] = vertices
    res = [f'POINTS {xyz.shape[0]} double']
    res += [' '.join(f'{x:.16g}' for x in row) for row in xyz]
    return res


def _lines_cells(triangles: np.ndarray) -> list:
    n_tri = triangles.shape[0]
    res = [f'CELLS {n_tri} {4 * n_tri}']
    res += [f'3 {i0:d} {i1:d} {i2:d}' for i0, i1, i2 in triangles]
    res.append(f'CELL_TYPES {n_tri}')
    res += [str(VTK_TRIANGLE)] * n_tri
    return res


# - main function ----------------------------------
def write_snapshot(flname, mesh, scalars=None, vectors=None,
                   title='pyncvd snapshot') -> None:
    """Write a mesh with vertex data to a legacy VTK file.

    Parameters
    ----------
    flname :  str or Path
       Name of the output file
    mesh :  Mesh
    scalars :  dict, optional
       Scalar fields at the vertices, shape (V,)
    vectors :  dict, optional
       Vector fields at the vertices, shape (V, 2) or (V, 3)
    title :  str
       Header line, at most 255 characters

    Examples
    --------
    >>> mesh = build_unit_square_mesh(4)
    >>> write_snapshot('rest.vtk', mesh, {'p': np.zeros(25)})
    """
    n_vert = mesh.n_vertices
    lines = ['# vtk DataFile Version 2.0', title.replace('\n', ' ')[:255],
             'ASCII', 'DATASET UNSTRUCTURED_GRID']
    lines += _lines_points(mesh.vertices)
    lines += _lines_cells(mesh.triangles)

    scalars = {} if scalars is None else scalars
    vectors = {} if vectors is None else vectors
    if scalars or vectors:
        lines.append(f'POINT_DATA {n_vert}')
    for name, values in scalars.items():
        values = np.asarray(values, dtype=float).reshape(-1)
        if values.size != n_vert:
            raise ValueError(f'field {name} should have {n_vert} values')
        lines += [f'SCALARS {_check_name(name)} double 1',
                  'LOOKUP_TABLE default']
        lines += [f'{x:.16g}' for x in values]
    for name, values in vectors.items():
        values = np.asarray(values, dtype=float)
        if values.shape[0] != n_vert or values.ndim != 2:
            raise ValueError(f'field {name} should have {n_vert} rows')
        xyz = np.zeros((n_vert, 3))
        xyz[:, :values.shape[1]] = values
        lines.append(f'VECTORS {_check_name(name)} double')
        lines += [' '.join(f'{x:.16g}' for x in row) for row in xyz]

    Path(flname).write_text('\n'.join(lines) + '\n', encoding='ascii')
