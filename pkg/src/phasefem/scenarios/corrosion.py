"""Pit growth: stress-free diffusion-controlled pits and stress-assisted pits."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .. import kernels as kn
from .. import mechanics as mech
from ..mesh import generate_structured
from ..recovery import recover_nodal_field
from ..solver import DirichletBC, Field, Problem
from ..solver.physics import CorrosionPhasePhysics, IonTransportPhysics, MechanicsPhysics
from .common import axis, result, reversed_axis, run_scenario, schedule_from
from .postprocess import nearest_node, nodes_along, pit_depth, shape_deviation
from .spec import ScenarioResult, ScenarioSpec

__all__ = [
    "corrosion_params",
    "pit_problem",
    "pit_free_case",
    "pit_scc_case",
    "metal_inventory",
    "nodal_stress",
]


def corrosion_params(spec: ScenarioSpec, L0: Optional[float] = None) -> kn.CorrosionParams:
    c = spec.section("corrosion")
    return kn.CorrosionParams(
        A_curv=c["A_curv"],
        omega=c["omega"],
        kappa=c["kappa"],
        D_m=c["D_m"],
        L0=c["L0"] if L0 is None else L0,
        c_Le=c["c_sat"] / c["c_solid"],
        V_m=c.get("V_m", 7100.0),
        k_film=c.get("k_film", 0.0),
        t0_film=c.get("t0_film", 0.0),
        eps_f=c.get("eps_f", np.inf),
        R_gas=c.get("R_gas", 8314.462618),
        T_k=c.get("T_k", 300.0),
    )


def _pit_mesh(g):
    W, H, ext = float(g["width"]), float(g["depth"]), float(g["fine_extent"])
    xs = axis(0.0, W, ext, g["h_fine"], g["h_coarse"])
    ys = reversed_axis(-H, 0.0, -ext, g["h_fine"], g["h_coarse"])
    return generate_structured([(0.0, W), (-H, 0.0)], [xs, ys], "quad4")


def pit_problem(spec: ScenarioSpec, mechanics: bool = False) -> Problem:
    """Half-plate with a semi-elliptical pit centred on the free surface ``y = 0``.

    ``x = 0`` is a symmetry line. With ``sink = "mouth"`` the concentration is
    held at zero on nodes within ``r_sink`` of the pit centre; with
    ``sink = "pit"`` both fields are held at zero over the initial pit.
    """
    g = spec.geometry
    mesh = _pit_mesh(g)
    x, y = mesh.nodes.T
    inside = (x / g["pit_a"]) ** 2 + (y / g["pit_b"]) ** 2 < 1.0
    phi0 = np.where(inside, 0.0, 1.0)
    params = corrosion_params(spec)
    if g.get("sink", "mouth") == "mouth":
        sink = np.nonzero(np.hypot(x, y) <= g["r_sink"] * (1 + 1e-9))[0]
        phi_bc = []
    elif g["sink"] == "pit":
        sink = np.nonzero(inside)[0]
        phi_bc = [DirichletBC(sink, 0, 0.0)]
    else:
        raise ValueError(f"unknown sink {g['sink']!r}")
    c0 = phi0.copy()
    c0[sink] = 0.0
    n = mesh.n_nodes
    fields = [
        Field("phi", "phase", n, values=phi0, dirichlet=phi_bc),
        Field("c", "scalar", n, values=c0, dirichlet=[DirichletBC(sink, 0, 0.0)]),
    ]
    physics = []
    mobility = None
    film = False
    if mechanics:
        el, pl, ld = spec.section("elastic"), spec.section("plastic"), spec.section("loading")
        elastic = mech.ElasticProps(E=el["E"], nu=el["nu"])
        plastic = mech.PlasticProps(sigma_y=pl["sigma_y"], N_hard=pl["N_hard"])
        u_max, t_ramp = float(ld["u_applied"]), float(ld["t_ramp"])
        corner = np.array([nearest_node(mesh, (0.0, -g["depth"]))])
        fields.append(Field("u", "displacement", n, n_comp=2, dirichlet=[
            DirichletBC(mesh.nodes_in("left"), 0, 0.0),
            DirichletBC(mesh.nodes_in("right"), 0, lambda t: u_max * min(t / t_ramp, 1.0)),
            DirichletBC(mesh.nodes_in("bottom"), 1, 0.0),
            DirichletBC(corner, 1, 0.0),
        ]))
        physics.append(MechanicsPhysics(elastic, "u", plastic=plastic, phase="phi", degradation="corrosion",
                                        k_res=float(spec.schedule.get("k_res", 1e-4))))

        def mechanochemical(problem, dt):
            return kn.mobility(problem.trial["eqps"], problem.trial["sigma_h"], problem.state["t_cycle"] + dt,
                               params, elastic, plastic)

        mobility = mechanochemical
        film = True
    physics += [
        CorrosionPhasePhysics(params, "phi", "c", mobility=mobility, film=film),
        IonTransportPhysics(params, "c", "phi"),
    ]
    return Problem(mesh, fields, physics)


def metal_inventory(problem: Problem, params: kn.CorrosionParams):
    """``(total concentration, dissolved metal)`` as ``(int c dV, (1 - c_Le) int (1 - h) dV)``."""
    geom = problem.geom
    h = mech.degradation_corrosion(problem.ip("phi"))[0]
    c = problem.ip("c")
    dV = geom.dV.reshape(-1)
    return float(c @ dV), float((params.c_Se - params.c_Le) * ((1.0 - h) @ dV))


def _front_probes(problem_getter):
    def depth(p):
        return pit_depth(p.mesh, p.fields["phi"].values)

    def shape(p):
        return shape_deviation(p.mesh, p.fields["phi"].values, centre=(0.0, 0.0))[0]

    return depth, shape


def pit_free_case(spec: ScenarioSpec, hooks: Sequence = ()) -> ScenarioResult:
    """Stress-free pit growth with uniform mobility ``L0``."""
    problem = pit_problem(spec, mechanics=False)
    params = corrosion_params(spec)
    sched = schedule_from(spec, [["phi"], ["c"]] if spec.schedule.get("scheme") != "monolithic-pair"
                          else [["phi", "c"]], tol_abs={"phi": 1e-14, "c": 1e-14})
    depth, shape = _front_probes(None)
    probes = {
        "depth": depth,
        "shape": shape,
        "c_total": lambda p: metal_inventory(p, params)[0],
        "dissolved": lambda p: metal_inventory(p, params)[1],
    }
    series, res = run_scenario("pit_free", problem, sched, probes, hooks)
    metrics = {
        "final_depth": series["depth"].values[-1],
        "max_shape_deviation": max(series["shape"].values),
    }
    return result("pit_free", problem, series, res, metrics)


def nodal_stress(problem: Problem, comp=(0, 0)) -> np.ndarray:
    """Nodal recovery of one Cauchy stress component from the mechanics physics."""
    mp = problem.physics["u"]
    sig = mp.stress(problem)
    return recover_nodal_field(problem.geom, sig[:, comp[0], comp[1]])


def pit_scc_case(spec: ScenarioSpec, hooks: Sequence = ()) -> ScenarioResult:
    """Pit under a remote displacement with film rupture and mechanochemical mobility.

    Probes ``sigma_h`` and ``phi`` at ``probe_offset`` below the initial pit tip.
    With ``schedule.mechanics = false`` the displacement field is dropped and
    the mobility is ``L0`` everywhere.
    """
    g = spec.geometry
    with_mech = bool(spec.schedule.get("mechanics", True))
    problem = pit_problem(spec, mechanics=with_mech)
    probe_node = nearest_node(problem.mesh, (0.0, -g["pit_b"] - g["probe_offset"]))
    blocks = ([["u"]] if with_mech else []) + [["phi"], ["c"]]
    if spec.schedule.get("scheme") == "monolithic-pair":
        blocks = ([["u", "phi"]] if with_mech else [["phi"]]) + [["c"]]
    sched = schedule_from(spec, blocks, tol_abs={"u": 1e-12, "phi": 1e-14, "c": 1e-14})
    depth, _ = _front_probes(None)
    probes = {"depth": depth, "phi_probe": lambda p: float(p.fields["phi"].values[probe_node])}
    if with_mech:
        probes["sigma_h_probe"] = lambda p: float(
            recover_nodal_field(p.geom, p.trial["sigma_h"])[probe_node])
    series, res = run_scenario("pit_scc", problem, sched, probes, hooks)
    metrics = {"final_depth": series["depth"].values[-1], "probe_node": int(probe_node)}
    if with_mech:
        line = nodes_along(problem.mesh, 0, 0.0)
        sxx = nodal_stress(problem, (0, 0))[line]
        phi_line = problem.fields["phi"].values[line]
        metrics["line_y"] = problem.mesh.nodes[line, 1].tolist()
        metrics["line_sigma_xx"] = sxx.tolist()
        metrics["line_phi"] = phi_line.tolist()
    return result("pit_scc", problem, series, res, metrics)
