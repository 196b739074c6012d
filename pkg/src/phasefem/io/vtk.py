"""Legacy ASCII VTK (version 3.0) unstructured grids and ``.vtk.series`` indices."""

from __future__ import annotations

import io
import json
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..mesh import Mesh
from .atomic import write_atomic

__all__ = [
    "VTK_CELL_TYPES",
    "CELL_QUANTITIES",
    "element_average",
    "problem_output",
    "write_vtk",
    "read_vtk",
    "write_series_index",
    "VtkData",
]

VTK_CELL_TYPES = {"line2": 3, "line3": 21, "tri3": 5, "quad4": 9, "quad8": 23, "hex8": 12}

# integration-point quantities written as element averages when present
CELL_QUANTITIES = ("sigma_h", "eqps", "H")


def _fmt(v: float) -> str:
    return repr(float(v))


def element_average(dV: np.ndarray, ip_values: np.ndarray) -> np.ndarray:
    """Volume-weighted mean of integration-point values over each element."""
    v = np.asarray(ip_values, dtype=float).reshape(dV.shape)
    return (v * dV).sum(axis=1) / dV.sum(axis=1)


def problem_output(problem, names: Optional[Sequence[str]] = None) -> Tuple[Dict[str, np.ndarray], Dict[str, np.ndarray]]:
    """Nodal fields and element-averaged state of a problem, as ``(point_data, cell_data)``.

    ``names`` restricts the output to the listed field and state names; by
    default every field and every available cell quantity is included.
    """
    point, cell = {}, {}
    wanted = None if names is None else set(names)
    for name, f in problem.fields.items():
        if wanted is None or name in wanted:
            point[name] = f.nodal() if f.n_comp == 1 else f.nodal().reshape(-1, f.n_comp)
    for name in CELL_QUANTITIES:
        if name in problem.state and (wanted is None or name in wanted):
            cell[name] = element_average(problem.geom.dV, problem.state[name])
    return point, cell


def _data_block(out: io.StringIO, data: Mapping[str, np.ndarray], n: int, where: str) -> None:
    if not data:
        return
    out.write(f"{where} {n}\n")
    for name, values in data.items():
        a = np.asarray(values, dtype=float)
        if a.ndim == 1:
            if a.shape[0] != n:
                raise ValueError(f"{where.lower()} {name!r} has {a.shape[0]} values, expected {n}")
            out.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            out.write("\n".join(_fmt(v) for v in a))
            out.write("\n")
        elif a.ndim == 2 and a.shape[0] == n and a.shape[1] <= 3:
            pad = np.zeros((n, 3))
            pad[:, : a.shape[1]] = a
            out.write(f"VECTORS {name} double\n")
            out.write("\n".join(" ".join(_fmt(v) for v in row) for row in pad))
            out.write("\n")
        else:
            raise ValueError(f"{where.lower()} {name!r} has shape {a.shape}, expected ({n},) or ({n}, <=3)")


def write_vtk(
    mesh: Mesh,
    fields: Optional[Mapping[str, np.ndarray]],
    path,
    time: Optional[float] = None,
    cell_data: Optional[Mapping[str, np.ndarray]] = None,
    title: str = "phasefem",
) -> Path:
    """Write one unstructured-grid file; ``fields`` are nodal, ``cell_data`` per element."""
    if mesh.kind not in VTK_CELL_TYPES:
        raise ValueError(f"no VTK cell type for {mesh.kind}")
    out = io.StringIO()
    out.write("# vtk DataFile Version 3.0\n")
    out.write(title.replace("\n", " ")[:255] + "\n")
    out.write("ASCII\nDATASET UNSTRUCTURED_GRID\n")
    if time is not None:
        out.write(f"FIELD FieldData 1\nTIME 1 1 double\n{_fmt(time)}\n")
    xyz = np.zeros((mesh.n_nodes, 3))
    xyz[:, : mesh.dim] = mesh.nodes
    out.write(f"POINTS {mesh.n_nodes} double\n")
    out.write("\n".join(" ".join(_fmt(v) for v in row) for row in xyz))
    out.write("\n")
    conn = np.asarray(mesh.elements)
    ne, npe = conn.shape
    out.write(f"CELLS {ne} {ne * (npe + 1)}\n")
    out.write("\n".join(f"{npe} " + " ".join(str(int(i)) for i in row) for row in conn))
    out.write("\n")
    out.write(f"CELL_TYPES {ne}\n")
    out.write("\n".join([str(VTK_CELL_TYPES[mesh.kind])] * ne))
    out.write("\n")
    _data_block(out, fields or {}, mesh.n_nodes, "POINT_DATA")
    _data_block(out, cell_data or {}, ne, "CELL_DATA")
    return write_atomic(path, out.getvalue())


class VtkData:
    """Contents of a legacy file as read back by :func:`read_vtk`."""

    def __init__(self):
        self.points = np.zeros((0, 3))
        self.cells: List[List[int]] = []
        self.cell_types: List[int] = []
        self.point_data: Dict[str, np.ndarray] = {}
        self.cell_data: Dict[str, np.ndarray] = {}
        self.time: Optional[float] = None


def read_vtk(path) -> VtkData:
    """Reader for the subset of the legacy format that :func:`write_vtk` emits."""
    tokens = Path(path).read_text().split("\n")
    if not tokens[0].startswith("# vtk DataFile Version"):
        raise ValueError(f"{path}: not a legacy VTK file")
    if tokens[2].strip() != "ASCII":
        raise ValueError(f"{path}: only ASCII files are supported")
    words = " ".join(tokens[3:]).split()
    d = VtkData()
    i = 0
    section = None
    counts = {"POINT_DATA": 0, "CELL_DATA": 0}

    def take(k):
        nonlocal i
        vals = words[i:i + k]
        i += k
        return vals

    while i < len(words):
        w = words[i]
        i += 1
        if w == "DATASET":
            i += 1
        elif w == "FIELD":
            _, n_arr = take(2)
            for _ in range(int(n_arr)):
                name, nc, nt, _ = take(4)
                vals = [float(v) for v in take(int(nc) * int(nt))]
                if name == "TIME":
                    d.time = vals[0]
        elif w == "POINTS":
            n, _ = take(2)
            d.points = np.array(take(3 * int(n)), dtype=float).reshape(-1, 3)
        elif w == "CELLS":
            n, _ = take(2)
            for _ in range(int(n)):
                k = int(take(1)[0])
                d.cells.append([int(v) for v in take(k)])
        elif w == "CELL_TYPES":
            n = int(take(1)[0])
            d.cell_types = [int(v) for v in take(n)]
        elif w in counts:
            section = w
            counts[w] = int(take(1)[0])
        elif w == "SCALARS":
            name, _, _ = take(3)
            if words[i] == "LOOKUP_TABLE":
                i += 2
            target = d.point_data if section == "POINT_DATA" else d.cell_data
            target[name] = np.array(take(counts[section]), dtype=float)
        elif w == "VECTORS":
            name, _ = take(2)
            target = d.point_data if section == "POINT_DATA" else d.cell_data
            target[name] = np.array(take(3 * counts[section]), dtype=float).reshape(-1, 3)
        else:
            raise ValueError(f"{path}: unexpected token {w!r}")
    return d


def write_series_index(entries: Sequence[Tuple[str, float]], path) -> Path:
    """``.vtk.series`` JSON index listing ``(file name, time)`` pairs."""
    doc = {"file-series-version": "1.0", "files": [{"name": n, "time": float(t)} for n, t in entries]}
    return write_atomic(path, json.dumps(doc, indent=1) + "\n")
