"""Fluid-driven fracture: a pressurised line crack and injection between two cracks."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .. import kernels as kn
from .. import mechanics as mech
from ..mesh import Mesh, generate_structured
from ..solver import DirichletBC, Field, Problem, VolumeSource
from ..solver.physics import FluidPhysics, FracturePhysics, MechanicsPhysics
from .common import axis, blocks_for, result, run_scenario, schedule_from
from .oracles import critical_pressure_oracle
from .postprocess import element_edges, nearest_node
from .spec import ScenarioResult, ScenarioSpec

__all__ = [
    "fluid_params",
    "pressurized_crack_problem",
    "pressurized_crack_case",
    "injection_problem",
    "injection_case",
    "crack_tip",
    "connected",
    "central_extent",
]


def fluid_params(spec: ScenarioSpec) -> kn.FluidParams:
    f, el = spec.section("fluid"), spec.section("elastic")
    K_bulk = el["E"] / (3.0 * (1.0 - 2.0 * el["nu"]))
    keys = ("rho_fl", "mu_fl", "C_fl", "alpha_r", "n_pr", "K_r", "K_f", "c1", "c2", "b_exp")
    return kn.FluidParams(**{k: float(f[k]) for k in keys if k in f}, K_bulk=K_bulk)


def _tolerances():
    # pressure residuals are tiny in SI units, so only the relative test applies to them
    return {"u": 1e-6, "phi": 1e-12, "p": 0.0}


def _physics(spec: ScenarioSpec, fluid: kn.FluidParams, dim: int):
    el, fr = spec.section("elastic"), spec.section("fracture")
    elastic = mech.ElasticProps(E=el["E"], nu=el["nu"])
    return [
        MechanicsPhysics(elastic, "u", split="no_tension", phase="phi", k_res=float(spec.schedule.get("k_res", 1e-6)),
                         pressure="p", fluid=fluid),
        FracturePhysics(kn.FractureParams(G_c=fr["G_c"], ell=fr["ell"]), "phi"),
        FluidPhysics(fluid, "p", phase="phi"),
    ]


def pressurized_crack_problem(spec: ScenarioSpec) -> Problem:
    """Quarter of a square with a centred crack of half-length ``a0`` along ``y = 0``."""
    g, ld = spec.geometry, spec.section("loading")
    S, a0 = float(g["size"]), float(g["a0"])
    growth = float(g.get("growth", 1.2))
    xs = axis(0.0, S, g["fine_length"], g["h_fine"], g["h_coarse"], growth)
    ys = axis(0.0, S, g["fine_height"], g["h_fine"], g["h_coarse"], growth)
    mesh = generate_structured([(0.0, S), (0.0, S)], [xs, ys], "quad4")
    x, y = mesh.nodes.T
    crack = np.nonzero((np.abs(y) < 1e-12) & (x <= a0 * (1 + 1e-9)))[0]
    mesh = mesh.with_sets(node_sets={"crack": crack})
    n = mesh.n_nodes
    p_max, t_ramp = float(ld["p_max"]), float(ld["t_ramp"])
    phi0 = np.zeros(n)
    phi0[crack] = 1.0
    fields = [
        Field("u", "displacement", n, n_comp=2, dirichlet=[
            DirichletBC(mesh.nodes_in("left"), 0, 0.0), DirichletBC(mesh.nodes_in("bottom"), 1, 0.0)]),
        Field("phi", "phase", n, values=phi0, dirichlet=[DirichletBC(crack, 0, 1.0)]),
        Field("p", "scalar", n, dirichlet=[DirichletBC(crack, 0, lambda t: p_max * min(t / t_ramp, 1.0))]),
    ]
    return Problem(mesh, fields, _physics(spec, fluid_params(spec), 2))


def crack_tip(problem: Problem, threshold: float = 0.95, y_line: float = 0.0) -> float:
    """Largest ``x`` on the line ``y = y_line`` with ``phi >= threshold``."""
    mesh = problem.mesh
    on = np.abs(mesh.nodes[:, 1] - y_line) < 1e-12
    broken = on & (problem.fields["phi"].values >= threshold)
    return float(mesh.nodes[broken, 0].max()) if broken.any() else 0.0


def pressurized_crack_case(spec: ScenarioSpec, hooks: Sequence = (), run_past: int = 2) -> ScenarioResult:
    """Ramp the crack pressure and report ``p_c``, the pressure when the tip first advances one element.

    The run stops ``run_past`` increments after initiation.
    """
    problem = pressurized_crack_problem(spec)
    g, el, fr = spec.geometry, spec.section("elastic"), spec.section("fracture")
    a0, h = float(g["a0"]), float(g["h_fine"])
    centre = nearest_node(problem.mesh, (0.0, 0.0))
    scheme = spec.schedule.get("scheme", "staggered-multi")
    sched = schedule_from(spec, blocks_for(scheme, ["u", "phi"], ["p"], pair_first=False), tol_abs=_tolerances())
    tip0 = crack_tip(problem)
    state = {"p_c": None, "t_c": None, "after": 0}

    def stop(p, t):
        if state["p_c"] is None and crack_tip(p) >= tip0 + h * (1 - 1e-6):
            state["p_c"] = float(p.fields["p"].values[centre])
            state["t_c"] = float(t)
        if state["p_c"] is not None:
            state["after"] += 1
            return state["after"] > run_past
        return False

    probes = {
        "p_center": lambda p: float(p.fields["p"].values[centre]),
        "tip": lambda p: crack_tip(p),
    }
    series, res = run_scenario("pressurized_crack", problem, sched, probes, hooks, stop=stop)
    oracle = critical_pressure_oracle(el["E"], el["nu"], fr["G_c"], a0)
    metrics = {
        "p_c": state["p_c"],
        "t_c": state["t_c"],
        "initiated": state["p_c"] is not None,
        "p_c_oracle": oracle,
        "ratio": (state["p_c"] / oracle) if state["p_c"] is not None else None,
    }
    return result("pressurized_crack", problem, series, res, metrics)


def _segment_distance(pts, a, b):
    ab = b - a
    t = np.clip(((pts - a) @ ab) / (ab @ ab), 0.0, 1.0)
    return np.linalg.norm(pts - (a + t[:, None] * ab), axis=1)


def injection_problem(spec: ScenarioSpec) -> Problem:
    """Square (or cube) with a horizontal central crack and an inclined neighbour.

    Both cracks are straight through the thickness in 3D. The fluid source
    acts on the elements touching the central crack.
    """
    g, ld = spec.geometry, spec.section("loading")
    S, lc, h = float(g["size"]), float(g["crack_length"]), float(g["h_fine"])
    dim = int(g.get("dim", 2))
    half = 0.5 * float(g["fine_size"])
    c = 0.5 * S
    ax = np.concatenate([(c - axis(0.0, c, half, h, g["h_coarse"]))[::-1][:-1], c + axis(0.0, c, half, h, g["h_coarse"])])
    if dim == 2:
        mesh = generate_structured([(0.0, S), (0.0, S)], [ax, ax], "quad4")
    else:
        nz = max(1, int(round(float(g["thickness"]) / float(g.get("h_z", 4 * h)))))
        mesh = generate_structured([(0.0, S), (0.0, S), (0.0, float(g["thickness"]))], [ax, ax, nz], "hex8")
    xy = mesh.nodes[:, :2]
    tol = 0.5 * h * np.sqrt(2.0) * (1 + 1e-6)
    central = np.nonzero(_segment_distance(xy, np.array([c - lc / 2, c]), np.array([c + lc / 2, c])) <= 0.5 * h * (1 + 1e-6))[0]
    ang = np.radians(float(g["inclined_angle"]))
    mid = np.array([c, c]) + np.asarray(g["inclined_centre"], dtype=float)
    d = 0.5 * lc * np.array([np.cos(ang), np.sin(ang)])
    inclined = np.nonzero(_segment_distance(xy, mid - d, mid + d) <= tol)[0]
    in_central = np.isin(mesh.elements, central).any(axis=1)
    mesh = mesh.with_sets(node_sets={"central": central, "inclined": inclined},
                          element_sets={"central_crack": np.nonzero(in_central)[0]})
    n = mesh.n_nodes
    seeds = np.union1d(central, inclined)
    phi0 = np.zeros(n)
    phi0[seeds] = 1.0
    outer = np.unique(np.concatenate([mesh.nodes_in(k) for k in ("left", "right", "bottom", "top")]))
    u_bc = [
        DirichletBC(mesh.nodes_in("left"), 0, 0.0), DirichletBC(mesh.nodes_in("right"), 0, 0.0),
        DirichletBC(mesh.nodes_in("bottom"), 1, 0.0), DirichletBC(mesh.nodes_in("top"), 1, 0.0),
    ]
    if dim == 3:
        u_bc += [DirichletBC(mesh.nodes_in("front"), 2, 0.0), DirichletBC(mesh.nodes_in("back"), 2, 0.0)]
    q_m = float(ld["q_m"])
    fields = [
        Field("u", "displacement", n, n_comp=dim, dirichlet=u_bc),
        Field("phi", "phase", n, values=phi0, dirichlet=[DirichletBC(seeds, 0, 1.0)]),
        Field("p", "scalar", n, dirichlet=[DirichletBC(outer, 0, 0.0)],
              sources=[VolumeSource("central_crack", q_m)] if q_m != 0 else []),
    ]
    return Problem(mesh, fields, _physics(spec, fluid_params(spec), dim))


def central_extent(problem: Problem, centre: float, threshold: float = 0.95) -> float:
    """Half-width of the broken band along the central crack line ``y = centre``."""
    x, y = problem.mesh.nodes[:, 0], problem.mesh.nodes[:, 1]
    on = np.abs(y - centre) < 1e-9 * max(1.0, centre)
    broken = on & (problem.fields["phi"].values >= threshold)
    return float(np.abs(x[broken] - centre).max()) if broken.any() else 0.0


def connected(mesh: Mesh, values, set_a, set_b, threshold: float = 0.95) -> bool:
    """Whether a path of element edges with both ends ``>= threshold`` joins two node sets."""
    v = np.asarray(values)
    e = element_edges(mesh)
    keep = (v[e[:, 0]] >= threshold) & (v[e[:, 1]] >= threshold)
    e = e[keep]
    n = mesh.n_nodes
    graph = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    a = [i for i in np.asarray(set_a) if v[i] >= threshold]
    b = [i for i in np.asarray(set_b) if v[i] >= threshold]
    return bool(set(labels[a]) & set(labels[b]))


def injection_case(spec: ScenarioSpec, hooks: Sequence = ()) -> ScenarioResult:
    """Constant fluid source on the central crack; reports the centre pressure history."""
    problem = injection_problem(spec)
    S = float(spec.geometry["size"])
    dim = problem.mesh.dim
    centre = nearest_node(problem.mesh, [0.5 * S] * 2 + ([0.0] if dim == 3 else []))
    scheme = spec.schedule.get("scheme", "staggered")
    sched = schedule_from(spec, blocks_for(scheme, ["u", "phi"], ["p"], pair_first=False), tol_abs=_tolerances())
    probes = {
        "p_center": lambda p: float(p.fields["p"].values[centre]),
        "central_extent": lambda p: central_extent(p, 0.5 * S),
    }
    series, res = run_scenario("injection", problem, sched, probes, hooks)
    pc = np.asarray(series["p_center"].values)
    mesh = problem.mesh
    metrics = {
        "p_peak": float(pc.max()),
        "t_peak": float(series["p_center"].times[int(np.argmax(pc))]),
        "p_final": float(pc[-1]),
        "coalesced": connected(mesh, problem.fields["phi"].values, mesh.nodes_in("central"), mesh.nodes_in("inclined")),
    }
    return result("injection", problem, series, res, metrics)
