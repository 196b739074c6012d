"""Hydrogen-assisted fracture of an edge-cracked square plate."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .. import kernels as kn
from .. import mechanics as mech
from ..mesh import generate_structured
from ..solver import DirichletBC, Field, Problem
from ..solver.physics import FracturePhysics, HydrogenPhysics, MechanicsPhysics
from .common import axis, result, reversed_axis, run_scenario, schedule_from
from .hydraulic import crack_tip
from .spec import ScenarioResult, ScenarioSpec

__all__ = ["hydrogen_params", "SteadyHydrogenPhysics", "hydrogen_plate_problem", "hydrogen_plate_case", "TRANSPORT_MODES"]

TRANSPORT_MODES = ("frozen", "steady", "transient")

# time step used to drop the storage term when transport is treated as instantaneous
_STEADY_DT = 1e30


def hydrogen_params(spec: ScenarioSpec) -> kn.HydrogenParams:
    h = spec.section("hydrogen")
    keys = ("D_H", "V_H", "T_k", "delta_g_b0", "chi_H", "R_gas")
    return kn.HydrogenParams(**{k: float(h[k]) for k in keys if k in h})


class SteadyHydrogenPhysics(HydrogenPhysics):
    """Hydrogen transport equilibrated within every increment (storage dropped)."""

    def assemble(self, problem: Problem, t: float, dt: float):
        return super().assemble(problem, t, _STEADY_DT)


def hydrogen_plate_problem(spec: ScenarioSpec) -> Problem:
    """Upper half of a unit square with an edge crack along ``y = 0`` up to the centre.

    ``y = 0`` ahead of the crack is a symmetry line; the crack faces are
    traction free. The top edge is held in ``x`` and pulled in ``y`` by half
    of the full-plate opening ``u_max``, so that reported displacements refer
    to the full plate. The hydrogen concentration is held at ``c_env`` on
    the outer edges and the crack faces.
    """
    g, ld = spec.geometry, spec.section("loading")
    S, h, hc = float(g["size"]), float(g["h_fine"]), float(g["h_coarse"])
    a = 0.5 * S
    x0 = float(g["fine_start"])
    xs = np.concatenate([reversed_axis(0.0, x0, x0, h, hc)[:-1], axis(x0, S, S, h, hc)])
    ys = axis(0.0, 0.5 * S, g["fine_height"], h, hc)
    mesh = generate_structured([(0.0, S), (0.0, 0.5 * S)], [xs, ys], "quad4")
    x, y = mesh.nodes.T
    bottom = mesh.nodes_in("bottom")
    ligament = bottom[x[bottom] >= a - 1e-9 * S]
    faces = bottom[x[bottom] < a - 1e-9 * S]
    exposed = np.unique(np.concatenate([mesh.nodes_in(k) for k in spec.geometry.get("exposed", ("left", "top", "right"))]))
    mesh = mesh.with_sets(node_sets={"ligament": ligament, "crack_faces": faces, "exposed": exposed})
    n = mesh.n_nodes
    u_max, t_load = float(ld["u_max"]), float(ld["t_load"])
    c_env = float(ld["c_env"])
    mode = spec.schedule.get("transport", "transient")
    if mode not in TRANSPORT_MODES:
        raise ValueError(f"schedule.transport must be one of {TRANSPORT_MODES}, got {mode!r}")
    fields = [
        Field("u", "displacement", n, n_comp=2, dirichlet=[
            DirichletBC(ligament, 1, 0.0),
            DirichletBC(mesh.nodes_in("top"), 0, 0.0),
            DirichletBC(mesh.nodes_in("top"), 1, lambda t: 0.5 * u_max * min(t / t_load, 1.0)),
        ]),
        Field("phi", "phase", n),
        Field("c", "scalar", n, values=np.full(n, c_env),
              dirichlet=[DirichletBC(exposed, 0, c_env)] if mode != "frozen" else []),
    ]
    el, fr = spec.section("elastic"), spec.section("fracture")
    hp = hydrogen_params(spec)
    G_c0 = float(fr["G_c"])

    def toughness(problem):
        c_ip = np.maximum(problem.ip("c"), 0.0)
        return kn.hydrogen_toughness(kn.wppm_to_mole_fraction(c_ip), hp, G_c0)

    physics = [
        MechanicsPhysics(mech.ElasticProps(E=el["E"], nu=el["nu"]), "u", split=spec.schedule.get("split", "none"),
                         phase="phi", k_res=float(spec.schedule.get("k_res", 1e-6))),
        FracturePhysics(kn.FractureParams(G_c=G_c0, ell=fr["ell"]), "phi", toughness=toughness),
    ]
    if mode == "transient":
        physics.append(HydrogenPhysics(hp, "c"))
    elif mode == "steady":
        physics.append(SteadyHydrogenPhysics(hp, "c"))
    return Problem(mesh, fields, physics)


def hydrogen_plate_case(spec: ScenarioSpec, hooks: Sequence = (), stop_fraction: float = 0.5) -> ScenarioResult:
    """Load-displacement response; stops once the load falls below ``stop_fraction`` of its peak.

    At the peak load the crack tip (``phi >= 0.95`` on the crack line, and
    ``phi >= 0.5`` for reference) and the location of the largest hydrogen
    concentration are recorded.
    """
    problem = hydrogen_plate_problem(spec)
    mode = spec.schedule.get("transport", "transient")
    ld = spec.section("loading")
    u_max, t_load = float(ld["u_max"]), float(ld["t_load"])
    top = problem.mesh.nodes_in("top")
    a = 0.5 * float(spec.geometry["size"])
    mp = problem.physics["u"]
    blocks = [["u"], ["phi"]] + ([["c"]] if mode != "frozen" else [])
    sched = schedule_from(spec, blocks, tol_abs={"u": 1e-9, "phi": 1e-12, "c": 1e-14})
    peak = {"load": -np.inf}

    def load(p):
        return mp.reaction(p, top, 1)

    def watch(p, t):
        F = load(p)
        if F > peak["load"]:
            c = p.fields["c"].values
            i = int(np.argmax(c))
            peak.update(load=F, t=float(t), disp=u_max * min(t / t_load, 1.0), tip=max(a, crack_tip(p)),
                        tip_half=max(a, crack_tip(p, threshold=0.5)), c_max=float(c[i]),
                        c_max_xy=p.mesh.nodes[i].tolist())

    def stop(p, t):
        return peak["load"] > 0 and load(p) < stop_fraction * peak["load"]

    probes = {
        "displacement": lambda p: u_max * min(p.t / t_load, 1.0),
        "reaction": load,
        "tip": lambda p: max(a, crack_tip(p)),
        "c_max": lambda p: float(p.fields["c"].values.max()),
    }
    series, res = run_scenario("hydrogen_plate", problem, sched, probes, list(hooks) + [watch], stop=stop)
    metrics = {
        "peak_load": peak["load"],
        "peak_displacement": peak.get("disp"),
        "tip_at_peak": peak.get("tip"),
        "tip_half_at_peak": peak.get("tip_half"),
        "c_max_at_peak": peak.get("c_max"),
        "c_max_xy_at_peak": peak.get("c_max_xy"),
    }
    if peak.get("c_max_xy") is not None:
        metrics["c_max_distance_to_tip"] = float(np.hypot(peak["c_max_xy"][0] - peak["tip"], peak["c_max_xy"][1]))
        metrics["c_min_final"] = float(problem.fields["c"].values.min())
    return result("hydrogen_plate", problem, series, res, metrics)
