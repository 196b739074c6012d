"""Closed-form and fine-grid reference solutions used to check the drivers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp

from ..kernels import CorrosionParams

__all__ = ["critical_pressure_oracle", "RadialPitSolution", "radial_pit_oracle", "at2_profile", "sneddon_opening"]


def critical_pressure_oracle(E: float, nu: float, G_c: float, a0: float) -> float:
    """Critical pressure of a pressurised line crack of half-length ``a0`` (plane strain)."""
    for name, v in (("E", E), ("G_c", G_c), ("a0", a0)):
        if not v > 0:
            raise ValueError(f"{name} must be positive, got {v}")
    if not -1.0 < nu < 0.5:
        raise ValueError(f"nu must lie in (-1, 0.5), got {nu}")
    E_ps = E / (1.0 - nu * nu)
    return float(np.sqrt(4.0 * E_ps * G_c / (np.pi * a0)))


def at2_profile(x, ell: float):
    """Stationary AT2 profile for a fully broken point at the origin."""
    return np.exp(-np.abs(np.asarray(x, dtype=float)) / ell)


def sneddon_opening(x, p: float, a0: float, E: float, nu: float):
    """Opening displacement of a pressurised line crack, ``|x| < a0``."""
    E_ps = E / (1.0 - nu * nu)
    x = np.asarray(x, dtype=float)
    return 4.0 * p / E_ps * np.sqrt(np.clip(a0 * a0 - x * x, 0.0, None))


@dataclass
class RadialPitSolution:
    times: np.ndarray
    radius: np.ndarray  # phi = 0.5 front position
    r: np.ndarray
    phi: np.ndarray  # (n_times, n_r)
    c: np.ndarray


def _interp_front(r, phi, level=0.5):
    above = np.nonzero(phi >= level)[0]
    if len(above) == 0:
        return r[-1]
    i = above[0]
    if i == 0:
        return r[0]
    return r[i - 1] + (level - phi[i - 1]) / (phi[i] - phi[i - 1]) * (r[i] - r[i - 1])


def radial_pit_oracle(
    params: CorrosionParams,
    r_sink: float,
    r_pit: float,
    r_out: float,
    t_end: float,
    n_cells: int = 1500,
    n_out: int = 101,
    geometry: str = "cylindrical",
    rtol: float = 1e-7,
) -> RadialPitSolution:
    """Fine-grid method-of-lines solve of the pit equations in one radial coordinate.

    Vertex-centred finite volumes on ``[r_sink, r_out]``. The concentration is
    held at zero on the sink node, every other boundary is zero-flux, and the
    initial state is the sharp pit (``phi = c = 0`` inside ``r_pit``, one
    outside). Uses constant mobility ``params.L0``. ``geometry`` is
    ``"cylindrical"`` (a 2D pit) or ``"planar"``.
    """
    if not 0 <= r_sink < r_pit < r_out or (geometry == "cylindrical" and r_sink == 0):
        raise ValueError("need 0 < r_sink < r_pit < r_out (r_sink may be 0 when planar)")
    r = np.linspace(r_sink, r_out, n_cells + 1)
    dr = r[1] - r[0]
    rf = 0.5 * (r[1:] + r[:-1])
    if geometry == "cylindrical":
        vol = r * dr
        area = rf
    elif geometry == "planar":
        vol = np.full_like(r, dr)
        area = np.ones_like(rf)
    else:
        raise ValueError(f"unknown geometry {geometry!r}")
    vol = vol.copy()
    vol[0] *= 0.5
    vol[-1] *= 0.5
    n = len(r)
    jump = params.c_Se - params.c_Le
    L, kap, D, A, om = params.L0, params.kappa, params.D_m, params.A_curv, params.omega

    def div(q):
        # net inflow of face fluxes q (area-weighted, positive towards +r)
        out = np.zeros(n)
        out[:-1] += q
        out[1:] -= q
        return out

    def rhs(_t, y):
        phi, c = y[0::2], y[1::2]
        h = -2 * phi**3 + 3 * phi**2
        h1 = 6 * phi * (1 - phi)
        u = c - h * jump - params.c_Le
        dpsi = -2 * A * jump * h1 * u + 2 * om * phi * (1 - phi) * (1 - 2 * phi)
        lap_phi = div(area * np.diff(phi) / dr)
        mu = c - h * jump
        dc = div(area * D * np.diff(mu) / dr) / vol
        dphi = -L * (dpsi - kap * lap_phi / vol)
        dc[0] = 0.0
        out = np.empty_like(y)
        out[0::2], out[1::2] = dphi, dc
        return out

    phi0 = np.where(r < r_pit, 0.0, 1.0)
    c0 = phi0.copy()
    c0[0] = 0.0
    y0 = np.empty(2 * n)
    y0[0::2], y0[1::2] = phi0, c0
    bw = 3
    pattern = sp.diags([np.ones(2 * n - abs(k)) for k in range(-bw, bw + 1)], list(range(-bw, bw + 1)))
    t_eval = np.linspace(0.0, t_end, n_out)
    sol = solve_ivp(rhs, (0.0, t_end), y0, method="BDF", t_eval=t_eval, jac_sparsity=pattern, rtol=rtol, atol=1e-10)
    if not sol.success:
        raise RuntimeError(f"radial oracle failed: {sol.message}")
    phi = sol.y[0::2].T
    c = sol.y[1::2].T
    radius = np.array([_interp_front(r, p) for p in phi])
    return RadialPitSolution(sol.t, radius, r, phi, c)
