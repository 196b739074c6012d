"""Scenario descriptions, reference parameter sets and run results."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping

import numpy as np

from ..mesh import Mesh
from .postprocess import ProbeSeries

__all__ = ["KINDS", "UNIT_SYSTEMS", "DEFAULTS", "REQUIRED", "SpecError", "ScenarioSpec", "ScenarioResult", "deep_merge"]

KINDS = ("heat", "quenching", "pressurized_crack", "injection", "hydrogen_plate", "pit_free", "pit_scc")

# Unit of each material symbol, per unit system, for diagnostics.
UNIT_SYSTEMS: Dict[str, Dict[str, str]] = {
    "SI": {
        "E": "Pa", "nu": "-", "alpha_T": "1/K", "G_c": "J/m^2", "ell": "m", "rho": "kg/m^3", "c_T": "J/(kg K)",
        "k0": "W/(m K)", "rho_fl": "kg/m^3", "mu_fl": "Pa s", "C_fl": "1/Pa", "alpha_r": "-", "n_pr": "-",
        "K_r": "m^2", "K_f": "m^2", "c1": "-", "c2": "-", "b_exp": "-", "T0": "degC", "T_a": "degC",
        "T_init": "degC", "p_max": "Pa", "t_ramp": "s", "q_m": "kg/(m^3 s)",
    },
    "mm-N-s": {
        "E": "MPa", "nu": "-", "G_c": "N/mm", "ell": "mm", "D_H": "mm^2/s", "V_H": "mm^3/mol", "T_k": "K",
        "delta_g_b0": "N mm/mol", "chi_H": "-", "R_gas": "N mm/(mol K)", "kappa": "N", "omega": "N/mm^2",
        "A_curv": "N/mm^2", "D_m": "mm^2/s", "L0": "mm^2/(N s)", "c_solid": "mol/L", "c_sat": "mol/L",
        "sigma_y": "MPa", "N_hard": "-", "V_m": "mm^3/mol", "k_film": "1/s", "t0_film": "s", "eps_f": "-",
        "c_env": "wppm", "u_max": "mm", "t_load": "s", "u_applied": "mm", "t_ramp": "s",
    },
}

_R_MM = 8314.462618  # N mm / (mol K)

# Reference parameter sets; every value can be overridden through a config.
DEFAULTS: Dict[str, Dict[str, Any]] = {
    "heat": {
        "units": "SI",
        "geometry": {"bounds": [[0.0, 1.0], [0.0, 0.1]], "divisions": [20, 2], "element": "quad4", "mesh_file": "",
                     "dirichlet": {}},
        "materials": {"heat": {"rho": 1.0, "c_T": 1.0, "k0": 1.0}, "loading": {"T_init": 0.0}},
        "schedule": {"dt": 0.01, "t_end": 0.1, "scheme": "staggered"},
        "probes": ["T_max", "T_mean"],
    },
    "quenching": {
        "units": "SI",
        "geometry": {
            "length": 12.5e-3, "width": 2.5e-3, "h_fine": 2.5e-5, "band": 1.0e-3, "h_coarse": 1.0e-4,
            "count_inset": 2.5e-4,
        },
        "materials": {
            "elastic": {"E": 370e9, "nu": 0.3, "alpha_T": 7.5e-6},
            "fracture": {"G_c": 42.47, "ell": 1.0e-4},
            "heat": {"rho": 3980.0, "c_T": 880.0, "k0": 31.0, "degrade_conductivity": False},
            "loading": {"T0": 600.0, "T_a": 20.0},
        },
        "schedule": {"dt": 1.0e-4, "t_end": 0.02, "scheme": "staggered", "passes": 1, "k_res": 1e-6},
        "probes": ["max_phi", "crack_count"],
    },
    "pressurized_crack": {
        "units": "SI",
        "geometry": {
            "size": 1.0, "a0": 0.1, "h_fine": 1.0e-3, "fine_length": 0.12, "fine_height": 0.008,
            "h_coarse": 0.1, "growth": 1.3,
        },
        "materials": {
            "elastic": {"E": 210e9, "nu": 0.3},
            "fracture": {"G_c": 2700.0, "ell": 4.0e-3},
            "fluid": {
                "rho_fl": 1000.0, "mu_fl": 1e-3, "C_fl": 1e-8, "alpha_r": 2e-3, "n_pr": 2e-3,
                "K_r": 1e-15, "K_f": 1.333e-6, "c1": 0.4, "c2": 1.0, "b_exp": 1.0,
            },
            "loading": {"p_max": 150e6, "t_ramp": 3000.0},
        },
        "schedule": {"dt": 20.0, "t_end": 3000.0, "scheme": "staggered-multi", "passes": 20, "pass_tol": 1e-4,
                     "k_res": 1e-6},
        "probes": ["p_center", "tip"],
    },
    "injection": {
        "units": "SI",
        "geometry": {
            "size": 0.5, "crack_length": 0.05, "h_fine": 4.0e-3, "fine_size": 0.2, "h_coarse": 0.025,
            "inclined_centre": [0.07, 0.05], "inclined_angle": 45.0, "dim": 2, "thickness": 0.1,
        },
        "materials": {
            "elastic": {"E": 210e9, "nu": 0.3},
            "fracture": {"G_c": 2700.0, "ell": 8.0e-3},
            "fluid": {
                "rho_fl": 1000.0, "mu_fl": 1e-3, "C_fl": 1e-8, "alpha_r": 2e-3, "n_pr": 2e-3,
                "K_r": 1e-15, "K_f": 1.333e-6, "c1": 0.4, "c2": 1.0, "b_exp": 1.0,
            },
            "loading": {"q_m": 4000.0},
        },
        "schedule": {"dt": 1.0, "t_end": 300.0, "scheme": "staggered", "passes": 10, "pass_tol": 1e-4,
                     "k_res": 1e-6},
        "probes": ["p_center", "central_extent"],
    },
    "hydrogen_plate": {
        "units": "mm-N-s",
        "geometry": {"size": 1.0, "h_fine": 1.5e-3, "fine_height": 0.015, "fine_start": 0.45, "h_coarse": 0.05},
        "materials": {
            "elastic": {"E": 210000.0, "nu": 0.3},
            "fracture": {"G_c": 2.7, "ell": 0.0075},
            "hydrogen": {
                "D_H": 0.0127, "V_H": 2000.0, "T_k": 300.0, "delta_g_b0": 30.0e6, "chi_H": 0.89, "R_gas": _R_MM,
            },
            "loading": {"c_env": 0.5, "u_max": 0.007, "t_load": 1.0e7},
        },
        "schedule": {"dt": 1.0e7 / 140, "t_end": 1.0e7, "scheme": "staggered-multi", "passes": 10,
                     "pass_tol": 1e-3, "k_res": 1e-6, "transport": "transient"},
        "probes": ["displacement", "reaction", "tip", "c_max"],
    },
    "pit_free": {
        "units": "mm-N-s",
        "geometry": {
            "width": 0.04, "depth": 0.04, "pit_a": 0.01, "pit_b": 0.01, "sink": "mouth", "r_sink": 0.003,
            "h_fine": 0.75e-3, "fine_extent": 0.03, "h_coarse": 2.5e-3,
        },
        "materials": {
            "corrosion": {
                "kappa": 5.1e-5, "omega": 35.3, "A_curv": 53.5, "D_m": 8.5e-4, "L0": 2.0e6, "c_solid": 143.0,
                "c_sat": 5.1, "T_k": 300.0, "R_gas": _R_MM, "V_m": 7100.0, "k_film": 0.0, "t0_film": 0.0,
            },
        },
        "schedule": {"dt": 0.1, "t_end": 10.0, "scheme": "staggered-multi", "passes": 30, "pass_tol": 1e-6},
        "probes": ["depth", "shape", "c_total", "dissolved"],
    },
    "pit_scc": {
        "units": "mm-N-s",
        "geometry": {
            "width": 0.1, "depth": 0.1, "pit_a": 0.015, "pit_b": 0.0075, "sink": "pit", "r_sink": 0.003,
            "h_fine": 1.25e-3, "fine_extent": 0.04, "h_coarse": 0.01, "probe_offset": 0.02,
        },
        "materials": {
            "elastic": {"E": 190000.0, "nu": 0.3},
            "plastic": {"sigma_y": 520.0, "N_hard": 0.067},
            "corrosion": {
                "kappa": 5.1e-5, "omega": 35.3, "A_curv": 53.5, "D_m": 8.5e-4, "L0": 1.0e-3, "c_solid": 143.0,
                "c_sat": 5.1, "T_k": 300.0, "R_gas": _R_MM, "V_m": 7100.0, "k_film": 5e-4, "t0_film": 10.0,
                "eps_f": 3e-3,
            },
            "loading": {"u_applied": 2.0e-4, "t_ramp": 1.0},
        },
        "schedule": {"dt": 1.0, "t_end": 400.0, "scheme": "staggered-multi", "passes": 15, "pass_tol": 1e-5,
                     "k_res": 1e-4, "mechanics": True},
        "probes": ["depth", "phi_probe", "sigma_h_probe"],
    },
}

# Symbols a config must end up providing for each scenario (after defaults).
REQUIRED: Dict[str, Dict[str, List[str]]] = {
    "quenching": {"elastic": ["E", "nu", "alpha_T"], "fracture": ["G_c", "ell"], "heat": ["rho", "c_T", "k0"],
                  "loading": ["T0", "T_a"]},
    "heat": {"heat": ["rho", "c_T", "k0"]},
    "pressurized_crack": {"elastic": ["E", "nu"], "fracture": ["G_c", "ell"],
                          "fluid": ["rho_fl", "mu_fl", "C_fl", "alpha_r", "n_pr", "K_r", "K_f"],
                          "loading": ["p_max", "t_ramp"]},
    "injection": {"elastic": ["E", "nu"], "fracture": ["G_c", "ell"],
                  "fluid": ["rho_fl", "mu_fl", "C_fl", "alpha_r", "n_pr", "K_r", "K_f"], "loading": ["q_m"]},
    "hydrogen_plate": {"elastic": ["E", "nu"], "fracture": ["G_c", "ell"],
                       "hydrogen": ["D_H", "V_H", "T_k", "delta_g_b0", "chi_H"], "loading": ["c_env", "u_max"]},
    "pit_free": {"corrosion": ["kappa", "omega", "A_curv", "D_m", "L0", "c_solid", "c_sat"]},
    "pit_scc": {"elastic": ["E", "nu"], "plastic": ["sigma_y", "N_hard"],
                "corrosion": ["kappa", "omega", "A_curv", "D_m", "L0", "c_solid", "c_sat", "k_film", "t0_film",
                              "eps_f"],
                "loading": ["u_applied", "t_ramp"]},
}

_POSITIVE = {"E", "G_c", "ell", "rho", "c_T", "k0", "rho_fl", "mu_fl", "C_fl", "K_r", "K_f", "D_H", "V_H", "T_k",
             "kappa", "omega", "A_curv", "D_m", "L0", "c_solid", "c_sat", "sigma_y", "dt"}


class SpecError(ValueError):
    """Invalid scenario description; ``path`` names the offending key."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def deep_merge(base: Mapping, override: Mapping) -> Dict:
    out = copy.deepcopy(dict(base))
    for k, v in override.items():
        if isinstance(v, Mapping) and isinstance(out.get(k), Mapping):
            out[k] = deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


@dataclass
class ScenarioSpec:
    kind: str
    geometry: Dict[str, Any] = field(default_factory=dict)
    materials: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    schedule: Dict[str, Any] = field(default_factory=dict)
    probes: List[str] = field(default_factory=list)
    units: str = ""

    @classmethod
    def default(cls, kind: str, **overrides) -> "ScenarioSpec":
        """Reference spec for ``kind`` with section-wise ``overrides`` merged in."""
        if kind not in DEFAULTS:
            raise SpecError("scenario.kind", f"unknown scenario {kind!r}; expected one of {', '.join(KINDS)}")
        merged = deep_merge(DEFAULTS[kind], overrides)
        spec = cls(kind=kind, **{k: merged[k] for k in ("geometry", "materials", "schedule", "probes", "units")})
        spec.validate()
        return spec

    def section(self, name: str) -> Dict[str, Any]:
        return self.materials.get(name, {})

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise SpecError("scenario.kind", f"unknown scenario {self.kind!r}")
        expected = DEFAULTS[self.kind]["units"]
        if self.units != expected:
            raise SpecError("units", f"scenario {self.kind} is defined in {expected!r} units, got {self.units!r}")
        units = UNIT_SYSTEMS[self.units]
        for sec, names in REQUIRED[self.kind].items():
            for name in names:
                if name not in self.materials.get(sec, {}):
                    unit = units.get(name, "-")
                    raise SpecError(f"materials.{sec}.{name}", f"missing required parameter {name} [{unit}]")
        for sec, values in self.materials.items():
            for name, v in values.items():
                if name in _POSITIVE and not (isinstance(v, (int, float)) and v > 0):
                    raise SpecError(f"materials.{sec}.{name}", f"must be positive [{units.get(name, '-')}], got {v!r}")
        for name in ("dt", "t_end"):
            v = self.schedule.get(name)
            if not isinstance(v, (int, float)) or v <= 0:
                raise SpecError(f"schedule.{name}", f"must be a positive number of seconds, got {v!r}")
        scheme = self.schedule.get("scheme", "staggered")
        if scheme not in ("staggered", "staggered-multi", "monolithic-pair"):
            raise SpecError("schedule.scheme", f"unknown scheme {scheme!r}")


@dataclass
class ScenarioResult:
    kind: str
    mesh: Mesh
    series: Dict[str, ProbeSeries]
    metrics: Dict[str, Any]
    fields: Dict[str, np.ndarray]
    completed: bool = True
    message: str = ""

    def table(self):
        """Column names and rows ``(t, probe_1, probe_2, ...)`` over the shared times."""
        names = list(self.series)
        if not names:
            return ["t"], []
        times = self.series[names[0]].times
        for n in names:
            if self.series[n].times != times:
                raise ValueError(f"probe {n!r} is sampled at different times")
        rows = [[t] + [self.series[n].values[i] for n in names] for i, t in enumerate(times)]
        return ["t"] + names, rows
