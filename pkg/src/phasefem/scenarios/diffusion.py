"""Plain transient heat conduction on a generated or imported mesh."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .. import kernels as kn
from ..gmsh import read_mesh
from ..mesh import generate_structured
from ..solver import DirichletBC, Field, Problem
from ..solver.physics import HeatPhysics
from .common import result, run_scenario, schedule_from
from .spec import ScenarioResult, ScenarioSpec, SpecError

__all__ = ["heat_problem", "heat_case"]


def _mesh(g):
    if g.get("mesh_file"):
        return read_mesh(g["mesh_file"])
    try:
        return generate_structured(g["bounds"], g["divisions"], g.get("element", "quad4"))
    except KeyError as err:
        raise SpecError(f"geometry.{err.args[0]}", "needed when no mesh_file is given") from None


def heat_problem(spec: ScenarioSpec) -> Problem:
    g, ht, ld = spec.geometry, spec.section("heat"), spec.section("loading")
    mesh = _mesh(g)
    n = mesh.n_nodes
    T0 = float(ld.get("T_init", 0.0))
    bcs = []
    values = np.full(n, T0)
    for name, v in g.get("dirichlet", {}).items():
        try:
            nodes = mesh.nodes_in(name)
        except KeyError:
            raise SpecError(f"geometry.dirichlet.{name}", "no node set of that name in the mesh") from None
        bcs.append(DirichletBC(nodes, 0, float(v)))
        values[nodes] = float(v)
    params = kn.HeatParams(rho=ht["rho"], c_T=ht["c_T"], k0=ht["k0"])
    field = Field("T", "scalar", n, values=values, old=values.copy(), dirichlet=bcs)
    return Problem(mesh, [field], [HeatPhysics(params, "T")])


def heat_case(spec: ScenarioSpec, hooks: Sequence = ()) -> ScenarioResult:
    """Backward-Euler heat conduction; probes the maximum and volume-mean temperature."""
    problem = heat_problem(spec)
    sched = schedule_from(spec, [["T"]], tol_abs={"T": 1e-12})
    dV = problem.geom.dV.reshape(-1)
    vol = float(dV.sum())
    probes = {
        "T_max": lambda p: float(p.fields["T"].values.max()),
        "T_mean": lambda p: float(p.ip("T") @ dV / vol),
    }
    series, res = run_scenario("heat", problem, sched, probes, hooks)
    return result("heat", problem, series, res, {"T_mean": series["T_mean"].values[-1]})
