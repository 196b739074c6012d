"""Physics bindings: each attaches a constitutive law or kernel to one field."""

from __future__ import annotations

from typing import Callable, Optional, Tuple

import numpy as np

from .. import kernels as kn
from .. import mechanics as mech
from ..recovery import ip_gradient, recover_nodal_field
from .assembly import assemble_mechanics, assemble_scalar, small_strain
from .coupling import Physics, Problem

__all__ = [
    "MechanicsPhysics",
    "FracturePhysics",
    "HeatPhysics",
    "CorrosionPhasePhysics",
    "IonTransportPhysics",
    "FluidPhysics",
    "HydrogenPhysics",
    "ScalarKernelPhysics",
]

_DEGRADATION = {"at2": mech.degradation_at2, "corrosion": mech.degradation_corrosion}


class MechanicsPhysics(Physics):
    """Small-strain momentum balance with optional damage, heat, pressure and plasticity.

    Trial integration-point state written on every evaluation: ``eps``,
    ``eps_p``, ``eqps``, ``psi_p``, ``H`` (running max of ``psi1 - psi2``),
    ``sigma_h`` and ``d_eps_vol`` (volumetric strain increment).
    """

    def __init__(
        self,
        elastic: mech.ElasticProps,
        field: str = "u",
        split: str = "none",
        plastic: Optional[mech.PlasticProps] = None,
        phase: Optional[str] = None,
        degradation: str = "at2",
        k_res: float = 0.0,
        temperature: Optional[str] = None,
        pressure: Optional[str] = None,
        fluid: Optional[kn.FluidParams] = None,
    ):
        if plastic is not None and split != "none":
            raise ValueError("plasticity is only combined with the 'none' split")
        self.field = field
        self.elastic = elastic
        self.split_fn = mech.strain_split(split)
        self.plastic = plastic
        self.phase = phase
        self.degradation = _DEGRADATION[degradation]
        self.k_res = k_res
        self.temperature = temperature
        self.pressure = pressure
        self.fluid = fluid
        self.internal_force: Optional[np.ndarray] = None

    def setup(self, problem: Problem) -> None:
        n = problem.n_ip
        for name, shape in (("eps", (n, 3, 3)), ("eps_p", (n, 3, 3)), ("eqps", n), ("psi_p", n),
                            ("H", n), ("sigma_h", n), ("d_eps_vol", n), ("psi1", n)):
            if name not in problem.state:
                problem.add_state(name, np.zeros(shape))

    def _g(self, problem: Problem) -> np.ndarray:
        if self.phase is None:
            return np.ones(problem.n_ip)
        g = self.degradation(mech.clamp_phase(problem.ip(self.phase)))[0]
        return mech.effective_degradation(g, self.k_res)

    def evaluate(self, problem: Problem, eps: np.ndarray):
        """Stress and tangent at strains ``eps``; writes the trial state."""
        st, tr = problem.state, problem.trial
        g = self._g(problem)
        eps_mech = eps
        if self.temperature is not None:
            eps_mech = eps - mech.thermal_strain(problem.ip(self.temperature), self.elastic)
        if self.plastic is not None:
            rm = mech.j2_return_map(eps_mech, st["eps_p"], st["eqps"], st["psi_p"], self.elastic, self.plastic)
            sigma = g[:, None, None] * rm.sigma
            C = g[:, None, None, None, None] * rm.C
            psi1, psi2 = rm.psi_e, np.zeros_like(rm.psi_e)
            tr["eps_p"], tr["eqps"], tr["psi_p"] = rm.eps_p, rm.eqps, rm.psi_p
        else:
            sp_ = self.split_fn(eps_mech, self.elastic)
            sigma = sp_.stress(g)
            C = sp_.tangent(g)
            psi1, psi2 = sp_.psi1, sp_.psi2
        if self.pressure is not None:
            alpha_b = kn.fluid_properties(problem.ip(self.phase) if self.phase else 0.0, self.fluid)[1]
            sigma = sigma - (alpha_b * problem.ip(self.pressure))[:, None, None] * np.eye(3)
        tr["eps"] = eps
        tr["psi1"] = psi1
        tr["H"] = mech.history_update(st["H"], psi1, psi2)
        tr["sigma_h"] = mech.hydrostatic(sigma)
        tr["d_eps_vol"] = np.trace(eps, axis1=1, axis2=2) - np.trace(st["eps"], axis1=1, axis2=2)
        return sigma, C

    def assemble(self, problem: Problem, t: float, dt: float):
        f = problem.fields[self.field]
        ext = problem.neumann_vector(f, t)
        system = assemble_mechanics(
            problem.geom, problem.pattern(f.n_comp), f.values, lambda e: self.evaluate(problem, e), None
        )
        self.internal_force = system.R
        R = system.R if ext is None else system.R - ext
        return system.K, R

    def update(self, problem: Problem, t: float, dt: float) -> None:
        f = problem.fields[self.field]
        self.evaluate(problem, small_strain(problem.geom, f.values))

    def stress(self, problem: Problem) -> np.ndarray:
        f = problem.fields[self.field]
        return self.evaluate(problem, small_strain(problem.geom, f.values))[0]

    def reaction(self, problem: Problem, nodes, component: int) -> float:
        """Sum of internal nodal forces on ``nodes`` in direction ``component``."""
        f = problem.fields[self.field]
        if self.internal_force is None:
            self.assemble(problem, problem.t, 1.0)
        return float(self.internal_force[np.asarray(nodes) * f.n_comp + component].sum())


class ScalarKernelPhysics(Physics):
    """Generic scalar field driven by ``kernel(problem, ctx) -> KernelResponse``."""

    def __init__(self, field: str, kernel: Callable):
        self.field = field
        self.kernel = kernel

    def assemble(self, problem: Problem, t: float, dt: float):
        f = problem.fields[self.field]
        system = assemble_scalar(
            problem.geom,
            problem.pattern(1),
            f.values,
            f.old,
            dt,
            lambda ctx: self.kernel(problem, ctx),
            t,
            problem.neumann_vector(f, t),
        )
        return system.K, system.R


class FracturePhysics(ScalarKernelPhysics):
    """AT2 phase field driven by the trial history field ``H``.

    ``toughness`` optionally maps the problem to a per-point ``G_c``.
    """

    def __init__(self, params: kn.FractureParams, field: str = "phi", toughness: Optional[Callable] = None):
        self.params = params
        self.toughness = toughness
        super().__init__(field, self._kernel)

    def setup(self, problem: Problem) -> None:
        if "H" not in problem.state:
            problem.add_state("H", np.zeros(problem.n_ip))

    def _kernel(self, problem: Problem, ctx):
        Gc = None if self.toughness is None else self.toughness(problem)
        return kn.fracture_kernel(ctx.kernel_input(), self.params, problem.trial["H"], Gc)


class HeatPhysics(ScalarKernelPhysics):
    def __init__(self, params: kn.HeatParams, field: str = "T", phase: Optional[str] = None):
        self.params = params
        self.phase = phase
        super().__init__(field, self._kernel)

    def _kernel(self, problem: Problem, ctx):
        phi = None if self.phase is None else problem.ip(self.phase)
        src = problem.source_at_ip(problem.fields[self.field], ctx.t)
        return kn.heat_kernel(ctx.kernel_input(), self.params, phi, src)


class CorrosionPhasePhysics(ScalarKernelPhysics):
    """Allen-Cahn corrosion front; ``mobility`` maps the problem to ``L`` per point.

    With ``film=True`` the film-rupture clock (``t_cycle``, ``eqps_cycle``)
    advances on commit from the committed plastic strain increment.
    """

    def __init__(
        self,
        params: kn.CorrosionParams,
        field: str = "phi",
        concentration: str = "c",
        mobility: Optional[Callable] = None,
        form: str = "a",
        film: bool = False,
    ):
        self.params = params
        self.concentration = concentration
        self.mobility = mobility
        self.form = form
        self.film = film
        super().__init__(field, self._kernel)

    def setup(self, problem: Problem) -> None:
        for name in ("t_cycle", "eqps_cycle"):
            if name not in problem.state:
                problem.add_state(name, np.zeros(problem.n_ip))

    def _kernel(self, problem: Problem, ctx):
        L = self.params.L0 if self.mobility is None else self.mobility(problem, ctx.dt)
        c = problem.ip(self.concentration)
        return kn.corrosion_phase_kernel(ctx.kernel_input(), self.params, L, c, self.form)

    def commit(self, problem: Problem, t: float, dt: float) -> None:
        if not self.film:
            return
        d_eqps = problem.trial.get("eqps", 0.0) - problem.state.get("eqps", 0.0)
        ec, tc = kn.advance_film_clock(problem.state["eqps_cycle"], problem.state["t_cycle"], d_eqps, dt, self.params)
        problem.trial["eqps_cycle"], problem.trial["t_cycle"] = ec, tc


class IonTransportPhysics(ScalarKernelPhysics):
    def __init__(self, params: kn.CorrosionParams, field: str = "c", phase: str = "phi"):
        self.params = params
        self.phase = phase
        super().__init__(field, self._kernel)

    def _kernel(self, problem: Problem, ctx):
        return kn.ion_transport_kernel(
            ctx.kernel_input(), self.params, problem.ip(self.phase), problem.grad_ip(self.phase)
        )


class FluidPhysics(ScalarKernelPhysics):
    """Pore pressure in a fractured porous medium; sources are ``q_m`` (mass rate)."""

    def __init__(self, params: kn.FluidParams, field: str = "p", phase: str = "phi", coupled_strain: bool = True):
        self.params = params
        self.phase = phase
        self.coupled_strain = coupled_strain
        super().__init__(field, self._kernel)

    def _kernel(self, problem: Problem, ctx):
        d_eps = problem.trial["d_eps_vol"] if self.coupled_strain and "d_eps_vol" in problem.trial else 0.0
        q = problem.source_at_ip(problem.fields[self.field], ctx.t)
        return kn.fluid_kernel(ctx.kernel_input(), self.params, problem.ip(self.phase), d_eps, q)


class HydrogenPhysics(ScalarKernelPhysics):
    """Lattice hydrogen with drift down the hydrostatic stress gradient.

    ``sigma_h`` at integration points comes from the trial state by default
    and its gradient from the nodal recovery of that field. ``frozen``
    replaces both with a fixed ``(sigma_h, grad_sigma_h)`` pair.
    """

    def __init__(self, params: kn.HydrogenParams, field: str = "c", frozen: Optional[Tuple[np.ndarray, np.ndarray]] = None):
        self.params = params
        self.frozen = frozen
        self._cache = None
        super().__init__(field, self._kernel)

    def stress_field(self, problem: Problem):
        if self.frozen is not None:
            return self.frozen
        sh = problem.trial["sigma_h"]
        key = sh.tobytes()
        if self._cache is None or self._cache[0] != key:
            nodal = recover_nodal_field(problem.geom, sh)
            self._cache = (key, problem.geom.interpolate(nodal).reshape(-1), ip_gradient(problem.geom, nodal))
        return self._cache[1], self._cache[2]

    def _kernel(self, problem: Problem, ctx):
        sh, gsh = self.stress_field(problem)
        return kn.hydrogen_kernel(ctx.kernel_input(), self.params, sh, gsh)
