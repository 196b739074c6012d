"""Finite-difference checks of kernel derivatives and assembled tangents.

Both checks use central differences and report, per block, the largest
absolute discrepancy divided by the largest entry of that block.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List

import numpy as np

from . import kernels as kn
from . import mechanics as mech
from .mesh import Mesh, generate_structured
from .scenarios.oracles import at2_profile, critical_pressure_oracle
from .solver import CouplingSchedule, DirichletBC, Field, Problem, ScalarKernelPhysics, run_transient
from .solver.physics import (
    CorrosionPhasePhysics,
    FluidPhysics,
    FracturePhysics,
    HeatPhysics,
    HydrogenPhysics,
    IonTransportPhysics,
    MechanicsPhysics,
)

__all__ = [
    "BlockError",
    "kernel_suite",
    "jacobian_suite",
    "KERNEL_CASES",
    "JACOBIAN_CASES",
    "block_error",
    "OracleCheck",
    "at2_bar",
    "allen_cahn_interface",
    "hydrogen_equilibrium",
    "oracle_suite",
    "weak_form_pair",
    "ion_mass_drift",
]

# reference parameter sets (SI for fracture/heat/fluid, mm-N-s for corrosion/hydrogen)
_CORR = kn.CorrosionParams(A_curv=53.5, omega=35.3, kappa=5.1e-5, D_m=8.5e-4, L0=2e6, c_Le=5.1 / 143.0, V_m=7100.0,
                           k_film=5e-4, t0_film=10.0, eps_f=3e-3)
_FLUID = kn.FluidParams(rho_fl=1000.0, mu_fl=1e-3, C_fl=1e-8, alpha_r=2e-3, n_pr=2e-3, K_r=1e-15, K_f=1.333e-6,
                        K_bulk=210e9 / (3 * 0.4))
_H2 = kn.HydrogenParams(D_H=0.0127, V_H=2000.0, T_k=300.0, delta_g_b0=30e6, chi_H=0.89, R_gas=8314.462618)
_HEAT = kn.HeatParams(rho=3980.0, c_T=880.0, k0=31.0, degrade_conductivity=True)
_FRAC = kn.FractureParams(G_c=2700.0, ell=4e-3)


@dataclass
class BlockError:
    case: str
    block: str
    error: float


def block_error(analytic, numeric) -> float:
    """``max |numeric - analytic| / max(|analytic|, |numeric|)``; zero when both blocks vanish."""
    a, n = np.asarray(analytic, dtype=float), np.asarray(numeric, dtype=float)
    scale = max(np.abs(a).max(initial=0.0), np.abs(n).max(initial=0.0))
    return 0.0 if scale == 0.0 else float(np.abs(n - a).max() / scale)


def _kernel_cases() -> Dict[str, Callable]:
    """Each case maps ``(rng, n)`` to ``(s, grad, scale, evaluate)``; ``evaluate(s, grad)`` returns a response."""

    def heat(rng, n):
        phi = rng.uniform(0, 1, n)
        src = rng.normal(0, 1e6, n)
        s = rng.uniform(20, 600, n)
        old = s - rng.normal(0, 5, n)
        return s, rng.normal(0, 1e4, (n, 2)), 1.0, lambda s_, g_: kn.heat_kernel(
            kn.KernelInput(s_, old, g_, 1e-4), _HEAT, phi, src)

    def fracture(rng, n):
        H = rng.uniform(0, 1e5, n)
        Gc = rng.uniform(1000, 3000, n)
        old = rng.uniform(0, 1, n)
        return rng.uniform(0, 1, n), rng.normal(0, 100, (n, 2)), 0.01, lambda s_, g_: kn.fracture_kernel(
            kn.KernelInput(s_, old, g_, 20.0), _FRAC, H, Gc)

    def allen_cahn(rng, n):
        f1, f2 = rng.normal(0, 10, n), rng.normal(0, 10, n)
        old = rng.uniform(0, 1, n)
        w = kn.double_well(35.3)
        return rng.uniform(0, 1, n), rng.normal(0, 10, (n, 3)), 0.01, lambda s_, g_: kn.allen_cahn_kernel(
            kn.KernelInput(s_, old, g_, 0.1), w, mech.degradation_corrosion, f1, f2, 5.1e-5, 0.5)

    def corrosion_phase(rng, n):
        c = rng.uniform(0, 1, n)
        L = rng.uniform(1e-3, 2e6, n)
        old = rng.uniform(0, 1, n)
        form = "a" if rng.uniform() < 0.5 else "c"
        return rng.uniform(0, 1, n), rng.normal(0, 100, (n, 2)), 0.01, lambda s_, g_: kn.corrosion_phase_kernel(
            kn.KernelInput(s_, old, g_, 0.1), _CORR, L, c, form)

    def ion_transport(rng, n):
        phi, gphi = rng.uniform(0, 1, n), rng.normal(0, 100, (n, 2))
        old = rng.uniform(0, 1, n)
        return rng.uniform(0, 1, n), rng.normal(0, 100, (n, 2)), 0.01, lambda s_, g_: kn.ion_transport_kernel(
            kn.KernelInput(s_, old, g_, 0.1), _CORR, phi, gphi)

    def fluid(rng, n):
        phi = rng.uniform(0, 1, n)
        de = rng.normal(0, 1e-5, n)
        old = rng.uniform(0, 1e7, n)
        return rng.uniform(0, 1e8, n), rng.normal(0, 1e9, (n, 2)), 1e3, lambda s_, g_: kn.fluid_kernel(
            kn.KernelInput(s_, old, g_, 1.0), _FLUID, phi, de, 4000.0)

    def hydrogen(rng, n):
        sh, gsh = rng.normal(0, 500, n), rng.normal(0, 1e4, (n, 2))
        old = rng.uniform(0, 1, n)
        return rng.uniform(0, 2, n), rng.normal(0, 10, (n, 2)), 0.01, lambda s_, g_: kn.hydrogen_kernel(
            kn.KernelInput(s_, old, g_, 1e4), _H2, sh, gsh)

    return {"heat": heat, "fracture": fracture, "allen_cahn": allen_cahn, "corrosion_phase": corrosion_phase,
            "ion_transport": ion_transport, "fluid": fluid, "hydrogen": hydrogen}


KERNEL_CASES = _kernel_cases()


def kernel_suite(n_states: int = 200, seed: int = 0, rel_step: float = 1e-6) -> List[BlockError]:
    """Central differences of ``U`` and ``f`` against the four analytic derivative blocks, plus ``dr/ds``."""
    rng = np.random.default_rng(seed)
    out = []
    for name, make in KERNEL_CASES.items():
        s, grad, scale, ev = make(rng, n_states)
        base = ev(s, grad)
        hs = rel_step * np.maximum(np.abs(s), scale)
        plus, minus = ev(s + hs, grad), ev(s - hs, grad)
        fd = {
            "dU_ds": (plus.U_new - minus.U_new) / (2 * hs),
            "dflux_ds": (plus.flux - minus.flux) / (2 * hs[:, None]),
            "dr_ds": (plus.r - minus.r) / (2 * hs),
        }
        dim = grad.shape[1]
        dU_dg = np.zeros((n_states, dim))
        dF_dg = np.zeros((n_states, dim, dim))
        gscale = np.maximum(np.abs(grad).max(axis=1), scale)
        for j in range(dim):
            hg = rel_step * gscale
            gp, gm = grad.copy(), grad.copy()
            gp[:, j] += hg
            gm[:, j] -= hg
            rp, rm = ev(s, gp), ev(s, gm)
            dU_dg[:, j] = (rp.U_new - rm.U_new) / (2 * hg)
            dF_dg[:, :, j] = (rp.flux - rm.flux) / (2 * hg[:, None])
        fd["dU_dgrad"], fd["dflux_dgrad"] = dU_dg, dF_dg
        for block, numeric in fd.items():
            out.append(BlockError(name, block, block_error(getattr(base, block), numeric)))
    return out


def _two_elements(kind: str = "quad4", rng=None):
    mesh = generate_structured([(0.0, 2.0), (0.0, 1.0)], [2, 1], kind)
    if rng is not None:
        # mildly distorted interior so that gradients are not axis aligned
        nodes = mesh.nodes.copy()
        nodes += rng.uniform(-0.1, 0.1, nodes.shape)
        mesh = type(mesh)(nodes, mesh.elements, mesh.kind, mesh.node_sets, mesh.element_sets, mesh.facet_sets)
    return mesh


def _scalar_problem(rng, mesh, name, physics, aux: Dict[str, np.ndarray], value_scale: float, old_scale=None):
    n = mesh.n_nodes
    fields = [Field(name, "scalar", n, values=rng.uniform(0, 1, n) * value_scale,
                    old=rng.uniform(0, 1, n) * (old_scale if old_scale is not None else value_scale))]
    for k, v in aux.items():
        fields.append(Field(k, "scalar", n, values=v))
    return Problem(mesh, fields, [physics])


def _mech_problem(rng, mesh, physics: MechanicsPhysics, strain: float, phi=True):
    n = mesh.n_nodes
    fields = [Field("u", "displacement", n, n_comp=2, values=rng.normal(0, strain, 2 * n))]
    if phi:
        fields.append(Field("phi", "phase", n, values=rng.uniform(0, 0.9, n)))
    return Problem(mesh, fields, [physics])


def _jacobian_cases() -> Dict[str, Callable]:
    def heat(rng, mesh):
        return _scalar_problem(rng, mesh, "T", HeatPhysics(_HEAT, "T", phase="phi"),
                               {"phi": rng.uniform(0, 1, mesh.n_nodes)}, 600.0), "T", 1e-4

    def fracture(rng, mesh):
        p = _scalar_problem(rng, mesh, "phi", FracturePhysics(_FRAC, "phi"), {}, 1.0)
        p.trial["H"] = rng.uniform(0, 1e5, p.n_ip)
        return p, "phi", 20.0

    def corrosion_phase(rng, mesh):
        n = mesh.n_nodes
        L = rng.uniform(1.0, 2e6, None)
        return _scalar_problem(rng, mesh, "phi", CorrosionPhasePhysics(_CORR, "phi", "c", mobility=lambda p, dt: L),
                               {"c": rng.uniform(0, 1, n)}, 1.0), "phi", 0.1

    def ion_transport(rng, mesh):
        return _scalar_problem(rng, mesh, "c", IonTransportPhysics(_CORR, "c", "phi"),
                               {"phi": rng.uniform(0, 1, mesh.n_nodes)}, 1.0), "c", 0.1

    def fluid(rng, mesh):
        p = _scalar_problem(rng, mesh, "p", FluidPhysics(_FLUID, "p", "phi"),
                            {"phi": rng.uniform(0, 1, mesh.n_nodes)}, 1e7)
        p.trial["d_eps_vol"] = rng.normal(0, 1e-5, p.n_ip)
        return p, "p", 1.0

    def hydrogen(rng, mesh):
        sh = rng.normal(0, 500, None)
        frozen = None
        p = _scalar_problem(rng, mesh, "c", HydrogenPhysics(_H2, "c", frozen=frozen), {}, 1.0)
        n_ip = p.n_ip
        p.physics["c"].frozen = (rng.normal(sh, 200, n_ip), rng.normal(0, 1e4, (n_ip, mesh.dim)))
        return p, "c", 1e4

    return {"heat": heat, "fracture": fracture, "corrosion_phase": corrosion_phase,
            "ion_transport": ion_transport, "fluid": fluid, "hydrogen": hydrogen}


def _mechanics_cases() -> Dict[str, Callable]:
    el = mech.ElasticProps(E=190e3, nu=0.3)
    pl = mech.PlasticProps(sigma_y=520.0, N_hard=0.067)

    def split_none(rng, mesh):
        return _mech_problem(rng, mesh, MechanicsPhysics(el, "u", split="none", phase="phi", k_res=1e-6), 1e-3)

    def no_tension(rng, mesh):
        return _mech_problem(rng, mesh, MechanicsPhysics(el, "u", split="no_tension", phase="phi", k_res=1e-6), 1e-3)

    def plastic_elastic_branch(rng, mesh):
        return _mech_problem(rng, mesh, MechanicsPhysics(el, "u", plastic=pl, phase="phi", k_res=1e-4), 1e-4)

    def plastic_branch(rng, mesh):
        return _mech_problem(rng, mesh, MechanicsPhysics(el, "u", plastic=pl, phase="phi", k_res=1e-4), 2e-2)

    return {"mechanics_none": split_none, "mechanics_no_tension": no_tension,
            "mechanics_plastic_elastic": plastic_elastic_branch, "mechanics_plastic": plastic_branch}


JACOBIAN_CASES = {**_jacobian_cases(), **_mechanics_cases()}


def _fd_matrix(residual, x, rel_step):
    n = len(x)
    K = np.zeros((n, n))
    scale = max(np.abs(x).max(), 1e-300)
    for j in range(n):
        h = rel_step * max(abs(x[j]), 1e-3 * scale)
        xp, xm = x.copy(), x.copy()
        xp[j] += h
        xm[j] -= h
        K[:, j] = (residual(xp) - residual(xm)) / (2 * h)
    return K


def jacobian_suite(seed: int = 0, rel_step: float = 1e-7, repeats: int = 3) -> List[BlockError]:
    """Assembled tangent against central differences of the residual on distorted two-element meshes."""
    rng = np.random.default_rng(seed)
    out = []
    for name, make in JACOBIAN_CASES.items():
        worst = 0.0
        for _ in range(repeats):
            mesh = _two_elements(rng=rng)
            made = make(rng, mesh)
            if isinstance(made, tuple):
                problem, field, dt = made
            else:
                problem, field, dt = made, "u", 1.0
            phys = problem.physics[field]
            f = problem.fields[field]
            x0 = f.values.copy()

            def residual(x):
                f.values[:] = x
                return phys.assemble(problem, 0.0, dt)[1]

            f.values[:] = x0
            K = phys.assemble(problem, 0.0, dt)[0].toarray()
            fd = _fd_matrix(residual, x0, rel_step)
            f.values[:] = x0
            worst = max(worst, block_error(K, fd))
        out.append(BlockError(name, "K", worst))
    return out


@dataclass
class OracleCheck:
    name: str
    value: float
    reference: float
    error: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.error < self.tol)


def _strip(length: float, h: float, lo: float = 0.0) -> Mesh:
    n = int(round(length / h))
    return generate_structured([(lo, lo + length), (0.0, h)], [n, 1], "quad4")


def _solve(problem: Problem, field: str, dt: float, t_end: float, tol_abs: float) -> None:
    sched = CouplingSchedule(blocks=[[field]], dt=dt, t_end=t_end, tol_abs=tol_abs, tol_rel=1e-12, max_iter=50)
    res = run_transient(problem, sched)
    if not res.completed:
        raise RuntimeError(f"{field} solve failed: {res.message}")


def at2_bar(ell: float = 1.0, h_per_ell: float = 5.0, length_per_ell: float = 10.0):
    """Stationary AT2 profile on a bar with ``phi(0) = 1`` and no driving force.

    Returns ``(relative L2 error against exp(-x/ell), problem)``. The far end
    is traction free; at ten lengths its effect on the profile is below 1e-8.
    """
    mesh = _strip(length_per_ell * ell, ell / h_per_ell)
    n = mesh.n_nodes
    left = mesh.nodes_in("left")
    problem = Problem(mesh, [Field("phi", "phase", n, dirichlet=[DirichletBC(left, 0, 1.0)])],
                      [FracturePhysics(kn.FractureParams(G_c=1.0, ell=ell), "phi")])
    _solve(problem, "phi", 1.0, 1.0, 1e-12)
    x = problem.geom.interpolate(mesh.nodes[:, 0]).reshape(-1)
    dV = problem.geom.dV.reshape(-1)
    exact = at2_profile(x, ell)
    err = np.sqrt(((problem.ip("phi") - exact) ** 2) @ dV / (exact**2 @ dV))
    return float(err), problem


def allen_cahn_interface(kappa: float = 5.1e-5, omega: float = 35.3, L: float = 2.0e6, h_per_width: float = 20.0):
    """Relaxed flat interface of the double-well Allen-Cahn equation with equal bulk energies.

    A tanh profile twice as wide as the equilibrium one is relaxed on a bar of
    eighteen interface widths with ``phi = 0`` and ``1`` held at the ends. The
    width is measured as ``1 / max|dphi/dx|`` and the interface energy as
    ``int (omega phi^2 (1 - phi)^2 + kappa/2 |grad phi|^2) dx``.
    Returns ``(width, energy, problem)``; units follow the inputs (mm-N-s by default).
    """
    width0 = kn.interface_thickness(kappa, omega)
    half = 9.0 * width0
    h = width0 / h_per_width
    mesh = _strip(2 * half, h, lo=-half)
    x = mesh.nodes[:, 0]
    phi0 = 0.5 * (1.0 + np.tanh(x / width0))
    w = kn.double_well(omega)

    def flat(phi):
        z = np.zeros_like(phi)
        return z, z, z

    def kernel(problem, ctx):
        return kn.allen_cahn_kernel(ctx.kernel_input(), w, flat, 0.0, 0.0, kappa, 1.0 / L)

    bcs = [DirichletBC(mesh.nodes_in("left"), 0, 0.0), DirichletBC(mesh.nodes_in("right"), 0, 1.0)]
    problem = Problem(mesh, [Field("phi", "phase", mesh.n_nodes, values=phi0, dirichlet=bcs)],
                      [ScalarKernelPhysics("phi", kernel)])
    tau = 1.0 / (L * omega)
    _solve(problem, "phi", 5 * tau, 200 * tau, 1e-14)
    g = problem.grad_ip("phi")[:, 0]
    width = 1.0 / float(np.abs(g).max())
    phi = problem.ip("phi")
    dV = problem.geom.dV.reshape(-1)
    thickness = float(mesh.nodes[:, 1].max())
    energy = float((w(phi)[0] + 0.5 * kappa * g**2) @ dV) / thickness
    return width, energy, problem


def hydrogen_equilibrium(sigma_max: float = 1000.0, length: float = 1.0, h: float = 0.01, c_env: float = 1.0):
    """Long-time hydrogen transport in a frozen linear ``sigma_h`` field (mm-N-s).

    ``c`` is held at ``c_env`` where ``sigma_h = 0`` (``x = 0``); the other
    edges are insulated. Returns ``(max relative nodal error against
    c_env exp(V_H sigma_h / (R T)), problem)``.
    """
    p = _H2
    mesh = _strip(length, h)
    geom_problem = Problem(mesh, [Field("c", "scalar", mesh.n_nodes, values=np.full(mesh.n_nodes, c_env),
                                        dirichlet=[DirichletBC(mesh.nodes_in("left"), 0, c_env)])], [])
    slope = sigma_max / length
    x_ip = geom_problem.geom.interpolate(mesh.nodes[:, 0]).reshape(-1)
    sh = slope * x_ip
    gsh = np.zeros((sh.size, 2))
    gsh[:, 0] = slope
    physics = HydrogenPhysics(p, "c", frozen=(sh, gsh))
    problem = Problem(mesh, list(geom_problem.fields.values()), [physics])
    tau = length**2 / p.D_H
    _solve(problem, "c", tau / 2, 30 * tau, 1e-14)
    exact = c_env * np.exp(p.V_H * slope * mesh.nodes[:, 0] / (p.R_gas * p.T_k))
    err = np.abs(problem.fields["c"].values - exact) / exact
    return float(err.max()), problem


def weak_form_pair(L_contrast: float = 10.0, steps: int = 20, h: float = 2.5e-4):
    """Relax a corrosion front with weak-form arrangements ``a`` and ``c`` under the same mobility.

    The mobility varies smoothly along the bar from ``L0`` to ``L_contrast * L0``
    (``L_contrast = 1`` gives a uniform mobility). The ion concentration is
    frozen at its equilibrium profile. Returns ``(phi_a, phi_c)`` nodal values.
    """
    params = _CORR
    length = 0.02
    mesh = _strip(length, h)
    x = mesh.nodes[:, 0]
    width = kn.interface_thickness(params.kappa, params.omega)
    phi0 = 0.5 * (1.0 + np.tanh((x - 0.4 * length) / width))
    h0 = mech.degradation_corrosion(phi0)[0]
    c0 = params.c_Le + (params.c_Se - params.c_Le) * h0
    probe = Problem(mesh, [Field("phi", "phase", mesh.n_nodes)], [])
    x_ip = probe.geom.interpolate(x).reshape(-1)
    L = params.L0 * (1.0 + (L_contrast - 1.0) * 0.5 * (1.0 - np.cos(np.pi * x_ip / length)))
    tau = 1.0 / (params.L0 * params.omega)
    out = []
    for form in ("a", "c"):
        fields = [Field("phi", "phase", mesh.n_nodes, values=phi0.copy()),
                  Field("c", "scalar", mesh.n_nodes, values=c0.copy())]
        problem = Problem(mesh, fields, [CorrosionPhasePhysics(params, "phi", "c", mobility=lambda p, dt: L, form=form)])
        sched = CouplingSchedule(blocks=[["phi"]], dt=tau, t_end=steps * tau, tol_abs=0.0, tol_rel=1e-13, max_iter=50)
        res = run_transient(problem, sched)
        if not res.completed:
            raise RuntimeError(f"form {form} failed: {res.message}")
        out.append(problem.fields["phi"].values.copy())
    return out[0], out[1]


def ion_mass_drift(steps: int = 100, dt: float = 0.1):
    """Relative change of ``int c dV`` over insulated transport steps with ``phi`` frozen.

    A quarter-circle pit of radius 10 um in a 40 um square starts with ``c``
    at its solid value everywhere, so the phase jump drives ions outwards.
    Returns ``(max relative drift, problem)``.
    """
    params = _CORR
    mesh = generate_structured([(0.0, 0.04), (-0.04, 0.0)], [40, 40], "quad4")
    x, y = mesh.nodes.T
    r = np.hypot(x, y)
    width = kn.interface_thickness(params.kappa, params.omega)
    phi = 0.5 * (1.0 + np.tanh((r - 0.01) / width))
    fields = [Field("phi", "phase", mesh.n_nodes, values=phi), Field("c", "scalar", mesh.n_nodes, values=np.ones(mesh.n_nodes))]
    problem = Problem(mesh, fields, [IonTransportPhysics(params, "c", "phi")])
    dV = problem.geom.dV.reshape(-1)
    m0 = float(problem.ip("c") @ dV)
    drift = [0.0]

    def watch(p, t):
        drift.append(abs(float(p.ip("c") @ dV) - m0) / m0)

    sched = CouplingSchedule(blocks=[["c"]], dt=dt, t_end=steps * dt, tol_abs=1e-16, tol_rel=1e-12, max_iter=20)
    res = run_transient(problem, sched, on_increment=watch)
    if not res.completed:
        raise RuntimeError(f"transport failed: {res.message}")
    return max(drift), problem


def oracle_suite() -> List[OracleCheck]:
    """Closed-form and stationary-profile checks, each within its acceptance tolerance."""
    out = []
    pc = critical_pressure_oracle(210e9, 0.3, 2700.0, 0.1)
    ref = 8.91e7
    out.append(OracleCheck("critical_pressure", pc, ref, abs(pc - ref) / ref, 1e-3))
    err, _ = at2_bar()
    out.append(OracleCheck("at2_profile_l2", err, 0.0, err, 0.02))
    kappa, omega = 5.1e-5, 35.3
    width, energy, _ = allen_cahn_interface(kappa, omega)
    lm, gam = kn.interface_thickness(kappa, omega), kn.interface_energy(kappa, omega)
    out.append(OracleCheck("allen_cahn_width", width, lm, abs(width - lm) / lm, 0.05))
    out.append(OracleCheck("allen_cahn_energy", energy, gam, abs(energy - gam) / gam, 0.05))
    err, _ = hydrogen_equilibrium()
    out.append(OracleCheck("hydrogen_equilibrium", err, 0.0, err, 0.02))
    return out
