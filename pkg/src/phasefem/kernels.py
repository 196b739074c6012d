"""Scalar transient-diffusion kernels.

Every scalar field is solved as the heat-like balance

    rho dU/dt + div(f) - r = 0

and each kernel supplies, at a batch of integration points, the internal
energy ``U_new``, its derivatives with respect to the field value and its
gradient, the flux ``f`` with both derivatives, and the volumetric source
``r``. The assembler in :mod:`phasefem.solver.assembly` only ever sees this
contract.

``U`` is carried as an increment: callers pass ``U_old`` (zero by default)
and the residual uses ``U_new - U_old``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Tuple

import numpy as np

from .mechanics import ElasticProps, PlasticProps, clamp_phase, degradation_at2, degradation_corrosion

__all__ = [
    "KernelInput",
    "KernelResponse",
    "FractureParams",
    "CorrosionParams",
    "FluidParams",
    "HydrogenParams",
    "HeatParams",
    "heat_kernel",
    "fracture_kernel",
    "allen_cahn_kernel",
    "double_well",
    "chemical_free_energy",
    "corrosion_phase_kernel",
    "ion_transport_kernel",
    "domain_indicators",
    "fluid_properties",
    "fluid_kernel",
    "hydrogen_kernel",
    "hydrogen_toughness",
    "wppm_to_mole_fraction",
    "mechanochemical_factor",
    "mobility",
    "advance_film_clock",
    "interface_energy",
    "interface_thickness",
]

R_GAS = 8.314462618  # J/(mol K)


@dataclass
class KernelInput:
    """Field values at a batch of ``n`` points.

    ``aux`` holds coupled quantities (``phi``, ``grad_phi``, ``c``,
    ``sigma_h``, ``grad_sigma_h``, ``d_eps_vol``, ``H`` ...) as arrays.
    """

    s: np.ndarray
    s_old: np.ndarray
    grad_s: np.ndarray
    dt: float
    aux: Mapping[str, np.ndarray] = field(default_factory=dict)
    t_total: float = 0.0
    U_old: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"time step must be positive, got {self.dt}")
        self.s = np.atleast_1d(np.asarray(self.s, dtype=float))
        self.s_old = np.broadcast_to(np.asarray(self.s_old, dtype=float), self.s.shape)
        g = np.asarray(self.grad_s, dtype=float)
        self.grad_s = g.reshape(len(self.s), -1)

    @property
    def n(self) -> int:
        return len(self.s)

    @property
    def dim(self) -> int:
        return self.grad_s.shape[1]

    @property
    def ds(self) -> np.ndarray:
        return self.s - self.s_old

    def u_old(self) -> np.ndarray:
        return np.zeros(self.n) if self.U_old is None else np.asarray(self.U_old, dtype=float)


@dataclass
class KernelResponse:
    U_new: np.ndarray
    dU_ds: np.ndarray
    dU_dgrad: np.ndarray
    flux: np.ndarray
    dflux_ds: np.ndarray
    dflux_dgrad: np.ndarray
    r: np.ndarray
    dr_ds: np.ndarray
    rho: np.ndarray
    U_old: np.ndarray

    def check_finite(self) -> None:
        for name in ("U_new", "dU_ds", "dU_dgrad", "flux", "dflux_ds", "dflux_dgrad", "r"):
            v = getattr(self, name)
            if not np.all(np.isfinite(v)):
                bad = int(np.nonzero(~np.isfinite(np.reshape(v, (len(self.U_new), -1))).any(axis=1))[0][0])
                raise FloatingPointError(f"kernel produced non-finite {name} at point {bad}")


def _response(inp: KernelInput, U_inc, dU_ds, flux, dflux_dgrad, dflux_ds=None, r=None, dr_ds=None, rho=1.0):
    n, dim = inp.n, inp.dim
    U_old = inp.u_old()
    return KernelResponse(
        U_new=U_old + U_inc,
        dU_ds=np.broadcast_to(np.asarray(dU_ds, dtype=float), (n,)).copy(),
        dU_dgrad=np.zeros((n, dim)),
        flux=flux,
        dflux_ds=np.zeros((n, dim)) if dflux_ds is None else dflux_ds,
        dflux_dgrad=dflux_dgrad,
        r=np.zeros(n) if r is None else np.broadcast_to(np.asarray(r, dtype=float), (n,)).copy(),
        dr_ds=np.zeros(n) if dr_ds is None else dr_ds,
        rho=np.broadcast_to(np.asarray(rho, dtype=float), (n,)).copy(),
        U_old=U_old,
    )


def _iso(coef, n: int, dim: int) -> np.ndarray:
    return np.asarray(coef, dtype=float).reshape(-1, 1, 1) * np.broadcast_to(np.eye(dim), (n, dim, dim))


def _positive(name: str, value) -> None:
    if not np.all(np.asarray(value) > 0):
        raise ValueError(f"{name} must be positive, got {value}")


# ---------------------------------------------------------------- parameters


@dataclass(frozen=True)
class FractureParams:
    G_c: float
    ell: float

    def __post_init__(self):
        _positive("G_c", self.G_c)
        _positive("ell", self.ell)


@dataclass(frozen=True)
class CorrosionParams:
    A_curv: float
    omega: float
    kappa: float
    D_m: float
    L0: float
    c_Le: float
    c_Se: float = 1.0
    V_m: float = 7.1e-6
    k_film: float = 0.0
    t0_film: float = 0.0
    eps_f: float = np.inf
    R_gas: float = R_GAS
    T_k: float = 300.0

    def __post_init__(self):
        for name in ("A_curv", "omega", "kappa", "D_m", "L0", "R_gas", "T_k"):
            _positive(name, getattr(self, name))
        if not 0.0 < self.c_Le < 1.0:
            raise ValueError(f"c_Le must lie in (0, 1), got {self.c_Le}")
        if self.k_film < 0 or self.t0_film < 0 or not self.eps_f > 0:
            raise ValueError("film parameters must be non-negative with eps_f > 0")


@dataclass(frozen=True)
class FluidParams:
    rho_fl: float
    mu_fl: float
    C_fl: float
    alpha_r: float
    n_pr: float
    K_r: float
    K_f: float
    c1: float = 0.4
    c2: float = 1.0
    b_exp: float = 1.0
    K_bulk: float = 1.0

    def __post_init__(self):
        for name in ("rho_fl", "mu_fl", "C_fl", "alpha_r", "n_pr", "K_r", "K_f", "b_exp", "K_bulk"):
            _positive(name, getattr(self, name))
        if not 0.0 <= self.c1 < self.c2 <= 1.0:
            raise ValueError(f"indicator constants need 0 <= c1 < c2 <= 1, got {self.c1}, {self.c2}")


@dataclass(frozen=True)
class HydrogenParams:
    D_H: float
    V_H: float
    T_k: float
    delta_g_b0: float
    chi_H: float
    R_gas: float = R_GAS

    def __post_init__(self):
        for name in ("D_H", "V_H", "T_k", "delta_g_b0", "R_gas"):
            _positive(name, getattr(self, name))
        if not 0.0 <= self.chi_H <= 1.0:
            raise ValueError(f"chi_H must lie in [0, 1], got {self.chi_H}")

    @property
    def trap_constant(self) -> float:
        """Concentration at which the Langmuir-McLean coverage is one half."""
        return float(np.exp(-self.delta_g_b0 / (self.R_gas * self.T_k)))


@dataclass(frozen=True)
class HeatParams:
    rho: float
    c_T: float
    k0: float
    degrade_conductivity: bool = False

    def __post_init__(self):
        for name in ("rho", "c_T", "k0"):
            _positive(name, getattr(self, name))


# ------------------------------------------------------------------- kernels


def heat_kernel(inp: KernelInput, params: HeatParams, phi=None, source=0.0) -> KernelResponse:
    """Heat conduction with optional phase-field-degraded conductivity."""
    k = np.full(inp.n, params.k0)
    if params.degrade_conductivity and phi is not None:
        k = k * degradation_at2(clamp_phase(phi))[0]
    return _response(
        inp,
        U_inc=params.c_T * inp.ds,
        dU_ds=params.c_T,
        flux=-k[:, None] * inp.grad_s,
        dflux_dgrad=_iso(-k, inp.n, inp.dim),
        r=source,
        rho=params.rho,
    )


def fracture_kernel(inp: KernelInput, params: FractureParams, H, G_c=None) -> KernelResponse:
    """AT2 phase field recast as a diffusion equation.

    The rate term is ``phi / ell^2 + g'(phi) H / (G_c ell)`` with the
    quadratic degradation. ``G_c`` overrides the toughness per point.
    """
    phi = inp.s
    _, g1, g2 = degradation_at2(phi)
    H = np.broadcast_to(np.asarray(H, dtype=float), (inp.n,))
    Gc = np.broadcast_to(np.asarray(params.G_c if G_c is None else G_c, dtype=float), (inp.n,))
    ell = params.ell
    rate = phi / ell**2 + g1 * H / (Gc * ell)
    drate = 1.0 / ell**2 + g2 * H / (Gc * ell)
    return _response(
        inp,
        U_inc=rate * inp.dt,
        dU_ds=drate * inp.dt,
        flux=-inp.grad_s.copy(),
        dflux_dgrad=_iso(-np.ones(inp.n), inp.n, inp.dim),
    )


DerivFn = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray, np.ndarray]]


def double_well(omega: float) -> DerivFn:
    """``w = omega phi^2 (1 - phi)^2`` with derivatives."""

    def w(phi):
        phi = np.asarray(phi, dtype=float)
        return (
            omega * phi**2 * (1.0 - phi) ** 2,
            2.0 * omega * phi * (1.0 - phi) * (1.0 - 2.0 * phi),
            2.0 * omega * (1.0 - 6.0 * phi + 6.0 * phi**2),
        )

    return w


def allen_cahn_kernel(inp: KernelInput, w: DerivFn, g: DerivFn, f_b1, f_b2, kappa, eta) -> KernelResponse:
    """General non-conserved phase field with bulk energies ``f_b1``, ``f_b2``."""
    phi = inp.s
    _, w1, w2 = w(phi)
    _, g1, g2 = g(phi)
    df = np.asarray(f_b1, dtype=float) - np.asarray(f_b2, dtype=float)
    kappa = np.broadcast_to(np.asarray(kappa, dtype=float), (inp.n,))
    return _response(
        inp,
        U_inc=-eta * inp.ds - (w1 + g1 * df) * inp.dt,
        dU_ds=-eta - (w2 + g2 * df) * inp.dt,
        flux=kappa[:, None] * inp.grad_s,
        dflux_dgrad=_iso(kappa, inp.n, inp.dim),
    )


def chemical_free_energy(c, phi, params: CorrosionParams):
    """Chemical free energy density and the derivatives the kernels need.

    Returns ``(psi, dpsi_dphi, d2psi_dphi2, dpsi_dc)``.
    """
    c = np.asarray(c, dtype=float)
    g, g1, g2 = degradation_corrosion(phi)
    phi = np.asarray(phi, dtype=float)
    jump = params.c_Se - params.c_Le
    u = c - g * jump - params.c_Le
    A, om = params.A_curv, params.omega
    psi = A * u**2 + om * phi**2 * (1.0 - phi) ** 2
    d1 = -2.0 * A * jump * g1 * u + 2.0 * om * phi * (1.0 - phi) * (1.0 - 2.0 * phi)
    d2 = 2.0 * A * jump**2 * g1**2 - 2.0 * A * jump * g2 * u + 2.0 * om * (1.0 - 6.0 * phi + 6.0 * phi**2)
    return psi, d1, d2, 2.0 * A * u


def corrosion_phase_kernel(inp: KernelInput, params: CorrosionParams, L, c, form: str = "a") -> KernelResponse:
    """Allen-Cahn corrosion front.

    ``form="a"`` divides the rate by the mobility (the usual arrangement);
    ``form="c"`` multiplies the driving force and the flux by it instead. The
    two agree only when ``L`` is uniform.
    """
    L = np.broadcast_to(np.asarray(L, dtype=float), (inp.n,))
    if np.any(L <= 0):
        raise ValueError("mobility must be positive")
    _, d1, d2, _ = chemical_free_energy(c, inp.s, params)
    if form == "a":
        return _response(
            inp,
            U_inc=-inp.ds / L - d1 * inp.dt,
            dU_ds=-1.0 / L - d2 * inp.dt,
            flux=params.kappa * inp.grad_s,
            dflux_dgrad=_iso(np.full(inp.n, params.kappa), inp.n, inp.dim),
        )
    if form == "c":
        return _response(
            inp,
            U_inc=-inp.ds - L * d1 * inp.dt,
            dU_ds=-1.0 - L * d2 * inp.dt,
            flux=(L * params.kappa)[:, None] * inp.grad_s,
            dflux_dgrad=_iso(L * params.kappa, inp.n, inp.dim),
        )
    raise ValueError(f"unknown weak-form arrangement {form!r}")


def ion_transport_kernel(inp: KernelInput, params: CorrosionParams, phi, grad_phi) -> KernelResponse:
    """Metal-ion mass balance; the flux relaxes ``c`` towards its phase equilibrium."""
    _, g1, _ = degradation_corrosion(phi)
    grad_phi = np.asarray(grad_phi, dtype=float).reshape(inp.n, inp.dim)
    D = params.D_m
    flux = -D * inp.grad_s + (D * (params.c_Se - params.c_Le) * g1)[:, None] * grad_phi
    return _response(
        inp,
        U_inc=inp.ds.copy(),
        dU_ds=1.0,
        flux=flux,
        dflux_dgrad=_iso(np.full(inp.n, -D), inp.n, inp.dim),
    )


def domain_indicators(phi, c1: float, c2: float):
    """Reservoir and fracture indicators, piecewise linear in ``phi``."""
    phi = np.asarray(phi, dtype=float)
    chi_r = np.clip((c2 - phi) / (c2 - c1), 0.0, 1.0)
    return chi_r, 1.0 - chi_r


def fluid_properties(phi, params: FluidParams):
    """Biot coefficient, porosity, permeability and storage for given ``phi``.

    Returns ``(chi_r, alpha_b, n_p, K_fl, S)``.
    """
    chi_r, chi_f = domain_indicators(phi, params.c1, params.c2)
    alpha_b = chi_r * params.alpha_r + chi_f
    n_p = chi_r * params.n_pr + chi_f
    K_fl = chi_r * params.K_r + clamp_phase(phi) ** params.b_exp * chi_f * params.K_f
    S = (1.0 - alpha_b) * (alpha_b - n_p) / params.K_bulk + n_p * params.C_fl
    return chi_r, alpha_b, n_p, K_fl, S


def fluid_kernel(inp: KernelInput, params: FluidParams, phi, d_eps_vol=0.0, q_m=0.0) -> KernelResponse:
    """Darcy flow in a fractured porous medium.

    The balance is divided through by the (constant) fluid density, so the
    kernel density is one and the source is ``q_m / rho_fl``.
    """
    chi_r, alpha_b, _, K_fl, S = fluid_properties(phi, params)
    mob = K_fl / params.mu_fl
    d_eps_vol = np.broadcast_to(np.asarray(d_eps_vol, dtype=float), (inp.n,))
    return _response(
        inp,
        U_inc=S * inp.ds + alpha_b * chi_r * d_eps_vol,
        dU_ds=S,
        flux=-mob[:, None] * inp.grad_s,
        dflux_dgrad=_iso(-mob, inp.n, inp.dim),
        r=np.asarray(q_m, dtype=float) / params.rho_fl,
    )


def hydrogen_kernel(inp: KernelInput, params: HydrogenParams, sigma_h, grad_sigma_h) -> KernelResponse:
    """Stress-assisted lattice hydrogen diffusion."""
    grad_sh = np.asarray(grad_sigma_h, dtype=float).reshape(inp.n, inp.dim)
    D = params.D_H
    drift = D * params.V_H / (params.R_gas * params.T_k) * grad_sh
    return _response(
        inp,
        U_inc=inp.ds.copy(),
        dU_ds=1.0,
        flux=-D * inp.grad_s + inp.s[:, None] * drift,
        dflux_ds=drift,
        dflux_dgrad=_iso(np.full(inp.n, -D), inp.n, inp.dim),
    )


def wppm_to_mole_fraction(c_wppm, host_molar_mass: float = 55.845, solute_molar_mass: float = 1.008):
    """Weight parts per million of hydrogen to impurity mole fraction (iron host)."""
    return np.asarray(c_wppm, dtype=float) * 1e-6 * host_molar_mass / solute_molar_mass


def hydrogen_toughness(c_H, params: HydrogenParams, G_c0):
    """Toughness degraded by surface hydrogen coverage.

    ``c_H`` is an impurity mole fraction; the coverage follows the
    Langmuir-McLean isotherm and toughness drops linearly with it.
    """
    c = np.asarray(c_H, dtype=float)
    if np.any(c < 0):
        raise ValueError("hydrogen concentration must be non-negative")
    theta = c / (c + params.trap_constant)
    return (1.0 - params.chi_H * theta) * G_c0


def mechanochemical_factor(eqps, sigma_h, params: CorrosionParams, elastic: ElasticProps, plastic: PlasticProps):
    """``(eqps / eps_y + 1) exp(sigma_h V_m / (R T))`` with ``eps_y = sigma_y / E``."""
    eps_y = plastic.sigma_y / elastic.E
    expo = np.asarray(sigma_h, dtype=float) * params.V_m / (params.R_gas * params.T_k)
    return (np.asarray(eqps, dtype=float) / eps_y + 1.0) * np.exp(expo)


def mobility(
    eqps,
    sigma_h,
    t_cycle,
    params: CorrosionParams,
    elastic: Optional[ElasticProps] = None,
    plastic: Optional[PlasticProps] = None,
):
    """Interface mobility with mechanochemical enhancement and film decay.

    Without ``elastic``/``plastic`` the mechanochemical factor is one.
    """
    t_cycle = np.asarray(t_cycle, dtype=float)
    if elastic is None or plastic is None:
        km = np.ones_like(t_cycle)
    else:
        km = mechanochemical_factor(eqps, sigma_h, params, elastic, plastic)
    decay = np.where(
        t_cycle <= params.t0_film, 1.0, np.exp(-params.k_film * (t_cycle - params.t0_film))
    )
    return km * params.L0 * decay


def advance_film_clock(eqps_cycle, t_cycle, d_eqps, dt: float, params: CorrosionParams):
    """Advance the per-point film rupture cycle; resets where the strain reaches ``eps_f``."""
    ec = np.asarray(eqps_cycle, dtype=float) + np.asarray(d_eqps, dtype=float)
    tc = np.asarray(t_cycle, dtype=float) + dt
    rupture = ec >= params.eps_f
    return np.where(rupture, 0.0, ec), np.where(rupture, 0.0, tc)


def interface_energy(kappa: float, omega: float) -> float:
    return float(np.sqrt(kappa * omega / 18.0))


def interface_thickness(kappa: float, omega: float) -> float:
    return float(np.sqrt(8.0 * kappa / omega))
