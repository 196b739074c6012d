"""Scenario drivers, oracles and post-processing."""

from .diffusion import heat_case
from .corrosion import metal_inventory, pit_free_case, pit_problem, pit_scc_case
from .hydraulic import connected, crack_tip, injection_case, pressurized_crack_case
from .hydrogen import hydrogen_plate_case
from .oracles import at2_profile, critical_pressure_oracle, radial_pit_oracle, sneddon_opening
from .postprocess import (
    ProbeSeries,
    crack_count,
    fit_circle,
    ip_gradient,
    level_set_points,
    nodes_along,
    pit_depth,
    recover_nodal_field,
    shape_deviation,
)
from .quenching import quenching_case
from .spec import DEFAULTS, KINDS, ScenarioResult, ScenarioSpec, SpecError

CASES = {
    "heat": heat_case,
    "quenching": quenching_case,
    "pressurized_crack": pressurized_crack_case,
    "injection": injection_case,
    "hydrogen_plate": hydrogen_plate_case,
    "pit_free": pit_free_case,
    "pit_scc": pit_scc_case,
}


def run_case(spec: ScenarioSpec, hooks=()) -> ScenarioResult:
    """Dispatch ``spec`` to the driver for its kind."""
    return CASES[spec.kind](spec, hooks=hooks)
