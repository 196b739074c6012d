"""Shared plumbing for the scenario drivers."""

from __future__ import annotations

from typing import Callable, Dict, Mapping, Optional, Sequence

import numpy as np

from ..mesh import graded_axis
from ..solver import CouplingSchedule, Problem, TransientResult, run_transient
from .postprocess import ProbeSeries
from .spec import ScenarioResult, ScenarioSpec

Hook = Callable[[Problem, float], None]
Probe = Callable[[Problem], float]


def axis(lo: float, hi: float, fine_until: float, h_fine: float, h_coarse: float, growth: float = 1.2) -> np.ndarray:
    """Uniform ``h_fine`` up to ``fine_until``, then sizes growing geometrically to ``h_coarse``."""
    pts = list(graded_axis([lo, min(fine_until, hi)], [h_fine])) if fine_until > lo else [lo]
    h = h_fine
    x = pts[-1]
    while x < hi - 1e-9 * (hi - lo):
        h = min(h * growth, h_coarse)
        if x + 1.5 * h >= hi:
            x = hi
        else:
            x += h
        pts.append(x)
    return np.array(pts)


def reversed_axis(lo: float, hi: float, fine_from: float, h_fine: float, h_coarse: float, growth: float = 1.2) -> np.ndarray:
    """Mirror of :func:`axis`: fine near ``hi``, coarsening towards ``lo``."""
    a = axis(0.0, hi - lo, hi - fine_from, h_fine, h_coarse, growth)
    out = (hi - a)[::-1]
    out[0] = lo
    return out


def blocks_for(scheme: str, pair: Sequence[str], rest: Sequence[str], pair_first: bool = True):
    """Solve blocks for a scheme name: the pair solved jointly or one after the other."""
    if scheme == "monolithic-pair":
        pb = [list(pair)]
    else:
        pb = [[f] for f in pair]
    rb = [[f] for f in rest]
    return pb + rb if pair_first else rb + pb


def schedule_from(spec: ScenarioSpec, blocks, tol_abs=1e-10, dt=None, **extra) -> CouplingSchedule:
    s = spec.schedule
    scheme = s.get("scheme", "staggered")
    passes = int(s.get("passes", 1)) if scheme != "staggered" else 1
    return CouplingSchedule(
        blocks=blocks,
        dt=s["dt"] if dt is None else dt,
        t_end=float(s["t_end"]),
        passes=passes,
        pass_tol=float(s.get("pass_tol", 1e-4)),
        tol_rel=float(s.get("tol_rel", 1e-6)),
        tol_abs=tol_abs,
        max_iter=int(s.get("max_iter", 25)),
        max_increments=s.get("max_increments"),
        **extra,
    )


def run_scenario(
    kind: str,
    problem: Problem,
    schedule: CouplingSchedule,
    probes: Mapping[str, Probe],
    hooks: Sequence[Hook] = (),
    stop: Optional[Callable[[Problem, float], bool]] = None,
    record_initial: bool = True,
) -> tuple:
    """Run the transient, sampling ``probes`` after each accepted increment."""
    series = {name: ProbeSeries(name) for name in probes}
    if record_initial:
        for name, fn in probes.items():
            series[name].append(problem.t, fn(problem))
    for h in hooks:
        h(problem, problem.t)

    def observer(p, t):
        return {name: fn(p) for name, fn in probes.items()}

    def on_increment(p, t):
        for h in hooks:
            h(p, t)

    res: TransientResult = run_transient(problem, schedule, [observer], stop=stop, on_increment=on_increment)
    for name in probes:
        for t, v in zip(res.times, res.records.get(name, [])):
            series[name].append(t, v)
    return series, res


def result(kind: str, problem: Problem, series: Dict[str, ProbeSeries], res: TransientResult, metrics) -> ScenarioResult:
    fields = {name: f.values.copy() for name, f in problem.fields.items()}
    return ScenarioResult(kind, problem.mesh, series, dict(metrics), fields, res.completed, res.message)
