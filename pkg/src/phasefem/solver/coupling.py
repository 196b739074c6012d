"""Fields, coupling schedules and the transient driver.

A :class:`Problem` owns the nodal fields and a set of physics objects, one per
field. Each physics object assembles the (block-diagonal) tangent and residual
of its own field while reading the current values of the others, so coupling
comes only from the order in which blocks are solved:

* a block with one field is a plain Newton solve;
* a block with several fields is solved simultaneously ("monolithic pair")
  with the off-diagonal coupling blocks omitted;
* ``passes > 1`` repeats the whole block sequence until every field changes
  by less than ``pass_tol`` (relative, L2) between passes.

History variables live in ``problem.state`` (committed) and
``problem.trial`` (current increment). They are committed only when an
increment is accepted, so a failed or repeated increment never leaks
irreversibility.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from ..mesh import ElementGeometry, Mesh
from .assembly import SparsityPattern, facet_load
from .linear import Constraints
from .newton import ConvergenceReport, newton_solve

__all__ = [
    "Schedule",
    "DirichletBC",
    "NeumannBC",
    "VolumeSource",
    "Field",
    "Physics",
    "Problem",
    "CouplingSchedule",
    "IncrementError",
    "step_increment",
    "run_transient",
    "TransientResult",
    "INCREMENT_LIMIT",
]

log = logging.getLogger(__name__)

Schedule = Union[float, Callable[[float], float]]


def _at(value: Schedule, t: float):
    return value(t) if callable(value) else value


@dataclass
class DirichletBC:
    nodes: np.ndarray
    component: int
    value: Schedule


@dataclass
class NeumannBC:
    """Outward flux (scalar fields) or traction component (vector fields) on a facet set."""

    facet_set: str
    value: Schedule
    component: Optional[int] = None


@dataclass
class VolumeSource:
    element_set: str
    value: Schedule


@dataclass
class Field:
    """Nodal unknowns of one field with their boundary data."""

    name: str
    kind: str
    n_nodes: int
    n_comp: int = 1
    values: Optional[np.ndarray] = None
    old: Optional[np.ndarray] = None
    dirichlet: List[DirichletBC] = field(default_factory=list)
    neumann: List[NeumannBC] = field(default_factory=list)
    sources: List[VolumeSource] = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in ("displacement", "phase", "scalar"):
            raise ValueError(f"unknown field kind {self.kind!r}")
        n = self.n_nodes * self.n_comp
        if self.values is None:
            self.values = np.zeros(n)
        self.values = np.asarray(self.values, dtype=float).reshape(n).copy()
        self.old = self.values.copy() if self.old is None else np.asarray(self.old, dtype=float).copy()

    def constraints(self, t: float) -> Constraints:
        dofs, vals = [], []
        for bc in self.dirichlet:
            nodes = np.asarray(bc.nodes, dtype=np.int64)
            dofs.append(nodes * self.n_comp + bc.component)
            vals.append(np.broadcast_to(np.asarray(_at(bc.value, t), dtype=float), nodes.shape))
        return Constraints.build(dofs, vals)

    def nodal(self) -> np.ndarray:
        return self.values.reshape(self.n_nodes, self.n_comp) if self.n_comp > 1 else self.values


class Physics:
    """Interface for the physics attached to one field."""

    field: str

    def setup(self, problem: "Problem") -> None:
        pass

    def assemble(self, problem: "Problem", t: float, dt: float) -> Tuple[sp.csr_matrix, np.ndarray]:
        raise NotImplementedError

    def update(self, problem: "Problem", t: float, dt: float) -> None:
        """Refresh trial state after this field has been solved."""

    def commit(self, problem: "Problem", t: float, dt: float) -> None:
        """Accept the increment (copy trial state into committed state)."""


class Problem:
    """Mesh, fields, physics and integration-point state."""

    def __init__(self, mesh: Mesh, fields: Sequence[Field], physics: Sequence[Physics], geometry=None):
        self.mesh = mesh
        self.geom = geometry if geometry is not None else ElementGeometry(mesh)
        self.fields: Dict[str, Field] = {f.name: f for f in fields}
        self.physics: Dict[str, Physics] = {}
        for p in physics:
            if p.field not in self.fields:
                raise KeyError(f"physics for unknown field {p.field!r}")
            self.physics[p.field] = p
        self.state: Dict[str, np.ndarray] = {}
        self.trial: Dict[str, np.ndarray] = {}
        self.patterns: Dict[int, SparsityPattern] = {}
        self.t = 0.0
        self.increment = 0
        for p in self.physics.values():
            p.setup(self)

    @property
    def n_ip(self) -> int:
        return self.geom.dV.size

    def pattern(self, n_comp: int) -> SparsityPattern:
        if n_comp not in self.patterns:
            self.patterns[n_comp] = SparsityPattern(self.mesh, n_comp)
        return self.patterns[n_comp]

    def add_state(self, name: str, initial) -> None:
        """Register a committed/trial integration-point variable."""
        arr = np.array(initial, dtype=float)
        self.state[name] = arr
        self.trial[name] = arr.copy()

    def neumann_vector(self, f: Field, t: float) -> Optional[np.ndarray]:
        if not f.neumann:
            return None
        out = np.zeros(f.values.shape)
        for bc in f.neumann:
            out += facet_load(self.mesh, self.mesh.facet_sets[bc.facet_set], _at(bc.value, t), f.n_comp, bc.component)
        return out

    def source_at_ip(self, f: Field, t: float) -> np.ndarray:
        """Volumetric source of a scalar field at integration points."""
        ne, nq = self.geom.dV.shape
        out = np.zeros((ne, nq))
        for src in f.sources:
            out[self.mesh.element_sets[src.element_set]] += _at(src.value, t)
        return out.reshape(-1)

    def ip(self, name: str) -> np.ndarray:
        """Field ``name`` interpolated to integration points (flattened)."""
        f = self.fields[name]
        v = self.geom.interpolate(f.nodal())
        return v.reshape(self.n_ip) if f.n_comp == 1 else v.reshape(self.n_ip, f.n_comp)

    def ip_old(self, name: str) -> np.ndarray:
        f = self.fields[name]
        return self.geom.interpolate(f.old).reshape(-1)

    def grad_ip(self, name: str) -> np.ndarray:
        return self.geom.gradient(self.fields[name].values).reshape(self.n_ip, self.mesh.dim)

    def snapshot(self):
        return (
            {k: f.values.copy() for k, f in self.fields.items()},
            {k: v.copy() for k, v in self.trial.items()},
        )

    def restore(self, snap) -> None:
        values, trial = snap
        for k, v in values.items():
            self.fields[k].values[:] = v
        for k, v in trial.items():
            self.trial[k] = v.copy()

    def reset_trial(self) -> None:
        for k, v in self.state.items():
            self.trial[k] = v.copy()
        for f in self.fields.values():
            f.values[:] = f.old

    def commit(self, t: float, dt: float) -> None:
        for p in self.physics.values():
            p.commit(self, t, dt)
        for k, v in self.trial.items():
            self.state[k] = v.copy()
        for f in self.fields.values():
            f.old[:] = f.values
        self.t = t
        self.increment += 1


@dataclass
class CouplingSchedule:
    """Ordering of solve blocks plus time stepping.

    ``blocks`` lists the field names solved together, in order, for example
    ``[["u", "phi"], ["p"]]``. ``tol_abs`` may map field names to absolute
    residual floors when the fields carry very different units; a block uses
    the smallest floor of its fields.
    """

    blocks: List[List[str]]
    dt: Union[float, Sequence[float]]
    t_end: float
    passes: int = 1
    pass_tol: float = 1e-4
    tol_rel: float = 1e-6
    tol_abs: Union[float, Mapping[str, float]] = 1e-10
    max_iter: int = 25
    min_dt_factor: float = 1.0 / 64.0
    max_increments: Optional[int] = None

    def __post_init__(self):
        if self.passes < 1:
            raise ValueError("passes must be at least 1")
        seen = [f for b in self.blocks for f in b]
        if len(seen) != len(set(seen)):
            raise ValueError("each field must appear in exactly one block")
        if not self.t_end >= 0:
            raise ValueError("t_end must be non-negative")

    def abs_tol(self, block: Sequence[str]) -> float:
        if isinstance(self.tol_abs, Mapping):
            return min(float(self.tol_abs.get(name, 1e-10)) for name in block)
        return float(self.tol_abs)

    def validate(self, problem: Problem) -> None:
        names = {f for b in self.blocks for f in b}
        missing = names - set(problem.physics)
        if missing:
            raise KeyError(f"schedule references fields without physics: {sorted(missing)}")

    def time_steps(self) -> List[float]:
        if np.isscalar(self.dt):
            dt = float(self.dt)
            if not dt > 0:
                raise ValueError("time step must be positive")
            n = int(np.ceil(self.t_end / dt - 1e-9))
            return [dt] * n
        steps = [float(x) for x in self.dt]
        if any(not x > 0 for x in steps):
            raise ValueError("time steps must be positive")
        return steps


class IncrementError(RuntimeError):
    def __init__(self, message: str, t: float, report: Optional[ConvergenceReport] = None):
        super().__init__(f"t={t:.6g}: {message}")
        self.t = t
        self.report = report


def _solve_block(problem: Problem, block: Sequence[str], t: float, dt: float, sched: CouplingSchedule):
    fields = [problem.fields[n] for n in block]
    sizes = [len(f.values) for f in fields]
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    cons = [f.constraints(t) for f in fields]
    constraints = Constraints.build(
        [c.dofs + offsets[i] for i, c in enumerate(cons)], [c.values for c in cons]
    )

    def scatter(x):
        for i, f in enumerate(fields):
            f.values[:] = x[offsets[i]:offsets[i + 1]]

    def assemble(x):
        scatter(x)
        Ks, Rs = [], []
        for name in block:
            K, R = problem.physics[name].assemble(problem, t, dt)
            Ks.append(K)
            Rs.append(R)
        if len(Ks) == 1:
            return Ks[0], Rs[0]
        return sp.block_diag(Ks, format="csr"), np.concatenate(Rs)

    x0 = np.concatenate([f.values for f in fields])
    x, report = newton_solve(
        assemble, x0, constraints, sched.tol_rel, sched.abs_tol(block), sched.max_iter
    )
    scatter(x)
    for name in block:
        problem.physics[name].update(problem, t, dt)
    return report


def step_increment(problem: Problem, schedule: CouplingSchedule, t: float, dt: float) -> Dict[str, ConvergenceReport]:
    """Advance all fields from ``problem.t`` to ``t`` (``= problem.t + dt``).

    On failure the fields and trial state are restored and
    :class:`IncrementError` is raised. On success the increment is committed.
    """
    snap = problem.snapshot()
    reports: Dict[str, ConvergenceReport] = {}
    prev = None
    for n_pass in range(schedule.passes):
        for block in schedule.blocks:
            try:
                rep = _solve_block(problem, block, t, dt, schedule)
            except (ArithmeticError, FloatingPointError, ValueError) as err:
                problem.restore(snap)
                raise IncrementError(f"block {block} failed: {err}", t) from err
            reports["+".join(block)] = rep
            if not rep.converged:
                problem.restore(snap)
                raise IncrementError(f"block {block} did not converge", t, rep)
        if schedule.passes == 1:
            break
        current = {k: f.values.copy() for k, f in problem.fields.items()}
        if prev is not None and all(
            np.linalg.norm(current[k] - prev[k]) <= schedule.pass_tol * max(np.linalg.norm(current[k]), 1e-300)
            for k in current
        ):
            break
        prev = current
        if n_pass == schedule.passes - 1:
            log.warning("t=%g: %d staggered passes without reaching pass_tol; committing last pass", t,
                        schedule.passes)
    problem.commit(t, dt)
    return reports


@dataclass
class TransientResult:
    times: List[float]
    records: Dict[str, List[float]]
    completed: bool
    message: str = ""


Observer = Callable[[Problem, float], Mapping[str, float]]

INCREMENT_LIMIT = "increment limit reached"


def run_transient(
    problem: Problem,
    schedule: CouplingSchedule,
    observers: Sequence[Observer] = (),
    stop: Optional[Callable[[Problem, float], bool]] = None,
    on_increment: Optional[Callable[[Problem, float], None]] = None,
) -> TransientResult:
    """Step through the schedule with bisection of failed increments.

    Observers return ``{name: value}`` after every accepted increment.
    ``stop`` may end the run early.
    """
    schedule.validate(problem)
    steps = schedule.time_steps()
    times: List[float] = []
    records: Dict[str, List[float]] = {}
    t_end = problem.t + sum(steps)
    count = 0

    def record(t):
        times.append(t)
        for obs in observers:
            for k, v in obs(problem, t).items():
                records.setdefault(k, []).append(float(v))

    queue = list(reversed(steps))
    while queue:
        if schedule.max_increments is not None and count >= schedule.max_increments:
            return TransientResult(times, records, False, INCREMENT_LIMIT)
        dt0 = queue.pop()
        dt = dt0
        remaining = dt0
        while remaining > 1e-12 * dt0:
            dt = min(dt, remaining)
            t_new = problem.t + dt
            if not queue and remaining - dt <= 1e-12 * dt0:
                t_new = t_end
            try:
                step_increment(problem, schedule, t_new, dt)
            except IncrementError as err:
                if dt * 0.5 < dt0 * schedule.min_dt_factor * (1 - 1e-9):
                    log.warning("increment failed at minimum step: %s", err)
                    return TransientResult(times, records, False, str(err))
                log.info("bisecting step at t=%.6g: %s", problem.t, err)
                dt *= 0.5
                continue
            remaining -= dt
            count += 1
            record(problem.t)
            if on_increment is not None:
                on_increment(problem, problem.t)
            if stop is not None and stop(problem, problem.t):
                return TransientResult(times, records, True, "stopped by criterion")
    return TransientResult(times, records, True)
