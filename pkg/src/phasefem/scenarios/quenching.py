"""Thermal shock of a ceramic plate: quarter model with a quenched outer surface."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .. import kernels as kn
from .. import mechanics as mech
from ..mesh import generate_structured
from ..solver import DirichletBC, Field, Problem
from ..solver.physics import FracturePhysics, HeatPhysics, MechanicsPhysics
from .common import axis, blocks_for, reversed_axis, result, run_scenario, schedule_from
from .postprocess import crack_count, nodes_along
from .spec import ScenarioResult, ScenarioSpec

__all__ = ["quenching_problem", "quenching_case", "edge_crack_count"]


def quenching_problem(spec: ScenarioSpec) -> Problem:
    g = spec.geometry
    el, fr, ht, ld = (spec.section(k) for k in ("elastic", "fracture", "heat", "loading"))
    L, W = float(g["length"]), float(g["width"])
    xs = axis(0.0, L, L, g["h_fine"], g["h_coarse"])
    ys = reversed_axis(0.0, W, W - g["band"], g["h_fine"], g["h_coarse"])
    mesh = generate_structured([(0.0, L), (0.0, W)], [xs, ys], "quad4")
    n = mesh.n_nodes
    T0, Ta = float(ld["T0"]), float(ld["T_a"])
    outer = np.union1d(mesh.nodes_in("top"), mesh.nodes_in("right"))
    temp = np.full(n, T0)
    temp[outer] = Ta
    fields = [
        Field("T", "scalar", n, values=temp, old=temp.copy(), dirichlet=[DirichletBC(outer, 0, Ta)]),
        Field("u", "displacement", n, n_comp=2, dirichlet=[
            DirichletBC(mesh.nodes_in("left"), 0, 0.0), DirichletBC(mesh.nodes_in("bottom"), 1, 0.0)]),
        Field("phi", "phase", n),
    ]
    elastic = mech.ElasticProps(E=el["E"], nu=el["nu"], alpha_T=el["alpha_T"], T0=T0)
    heat = kn.HeatParams(rho=ht["rho"], c_T=ht["c_T"], k0=ht["k0"],
                         degrade_conductivity=bool(ht.get("degrade_conductivity", False)))
    physics = [
        HeatPhysics(heat, "T", phase="phi"),
        MechanicsPhysics(elastic, "u", split="none", phase="phi", k_res=float(spec.schedule.get("k_res", 1e-6)),
                         temperature="T"),
        FracturePhysics(kn.FractureParams(G_c=fr["G_c"], ell=fr["ell"]), "phi"),
    ]
    return Problem(mesh, fields, physics)


def edge_crack_count(problem: Problem, inset: float, threshold: float = 0.95):
    """Cracks crossing the line at depth ``inset`` below the long quenched edge."""
    mesh = problem.mesh
    W = mesh.nodes[:, 1].max()
    ids = nodes_along(mesh, 1, W - inset)
    return crack_count(problem.fields["phi"].values[ids], mesh.nodes[ids, 0], threshold)


def quenching_case(spec: ScenarioSpec, hooks: Sequence = ()) -> ScenarioResult:
    """Quench from ``T0`` to ``T_a``; reports damage and the crack count along the long edge."""
    problem = quenching_problem(spec)
    inset = float(spec.geometry["count_inset"])
    scheme = spec.schedule.get("scheme", "staggered")
    sched = schedule_from(spec, [["T"]] + blocks_for(scheme, ["u", "phi"], []), tol_abs={"T": 1e-12, "u": 1e-12,
                                                                                          "phi": 1e-12})
    probes = {
        "max_phi": lambda p: float(p.fields["phi"].values.max()),
        "crack_count": lambda p: float(edge_crack_count(p, inset)[0]),
    }
    series, res = run_scenario("quenching", problem, sched, probes, hooks)
    count, spacing = edge_crack_count(problem, inset)
    metrics = {
        "crack_count": int(count),
        "mean_spacing": float(np.mean(spacing)) if len(spacing) else float("nan"),
        "max_phi": float(problem.fields["phi"].values.max()),
    }
    return result("quenching", problem, series, res, metrics)
