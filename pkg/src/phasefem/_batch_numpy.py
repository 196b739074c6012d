"""Numpy implementations of the per-integration-point hot loops.

These are the reference versions of the routines in ``_core.pyx`` and share
their signatures exactly. All tensors are full 3x3 (plane strain embeds with a
zero out-of-plane strain).
"""

from __future__ import annotations

import numpy as np

_I3 = np.eye(3)
# closer eigenvalues than this use the limit form of the spin term
_EIG_TOL = 1e-12


def no_tension_split(eps, E, nu):
    """No-tension energy split for a batch of strains.

    Parameters
    ----------
    eps : (n, 3, 3) symmetric strains

    Returns
    -------
    psi1, psi2 : (n,)
    sig1, sig2 : (n, 3, 3)
    C2 : (n, 3, 3, 3, 3) consistent tangent of ``sig2``
    """
    eps = np.ascontiguousarray(eps, dtype=float)
    n = eps.shape[0]
    lam = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    mu = E / (2.0 * (1.0 + nu))
    tr = np.trace(eps, axis1=1, axis2=2)
    psi1 = 0.5 * lam * tr**2 + mu * np.einsum("nij,nij->n", eps, eps)
    sig1 = lam * tr[:, None, None] * _I3 + 2.0 * mu * eps

    w, V = np.linalg.eigh(eps)
    e1, e2, e3 = w[:, 0], w[:, 1], w[:, 2]
    b1 = e1 > 0.0
    b2 = ~b1 & (e2 + nu * e1 > 0.0)
    b3 = ~b1 & ~b2 & ((1.0 - nu) * e3 + nu * (e1 + e2) > 0.0)
    b4 = ~(b1 | b2 | b3)

    s = np.zeros((n, 3))
    D = np.zeros((n, 3, 3))
    psi2 = np.zeros(n)

    psi2[b2] = 0.5 * E * e1[b2] ** 2
    s[b2, 0] = E * e1[b2]
    D[b2, 0, 0] = E

    k = E / (1.0 - nu * nu)
    psi2[b3] = 0.5 * k * (e1[b3] ** 2 + e2[b3] ** 2 + 2.0 * nu * e1[b3] * e2[b3])
    s[b3, 0] = k * (e1[b3] + nu * e2[b3])
    s[b3, 1] = k * (e2[b3] + nu * e1[b3])
    D[b3, 0, 0] = D[b3, 1, 1] = k
    D[b3, 0, 1] = D[b3, 1, 0] = k * nu

    psi2[b4] = psi1[b4]
    trw = w[b4].sum(axis=1)
    s[b4] = lam * trw[:, None] + 2.0 * mu * w[b4]
    D[b4] = lam + 2.0 * mu * _I3

    sig2 = np.einsum("nai,ni,nbi->nab", V, s, V)

    # principal-frame tangent including the eigenvector spin terms
    Cp = np.zeros((n, 3, 3, 3, 3))
    for i in range(3):
        for j in range(3):
            Cp[:, i, i, j, j] = D[:, i, j]
    for i, j in ((0, 1), (0, 2), (1, 2)):
        de = w[:, i] - w[:, j]
        close = np.abs(de) <= _EIG_TOL * np.maximum(1.0, np.abs(w).max(axis=1))
        safe = np.where(close, 1.0, de)
        theta = np.where(close, 0.5 * (D[:, i, i] - D[:, i, j]), 0.5 * (s[:, i] - s[:, j]) / safe)
        Cp[:, i, j, i, j] = Cp[:, i, j, j, i] = theta
        Cp[:, j, i, j, i] = Cp[:, j, i, i, j] = theta
    C2 = np.einsum("nai,nbj,nck,ndl,nijkl->nabcd", V, V, V, V, Cp, optimize=True)
    return psi1, psi2, sig1, sig2, C2


def j2_return_map(eps_e_trial, eqps_old, E, nu, sigma_y, n_hard, tol=1e-12, max_iter=50):
    """Radial return with power-law isotropic hardening.

    Parameters
    ----------
    eps_e_trial : (n, 3, 3) trial elastic strain (total minus old plastic minus thermal)
    eqps_old : (n,) equivalent plastic strain at the start of the step

    Returns
    -------
    sigma : (n, 3, 3)
    dgamma : (n,) equivalent plastic strain increment
    flow : (n, 3, 3) flow direction 3/2 s/q (zero where elastic)
    C : (n, 3, 3, 3, 3) consistent tangent
    iters : int, maximum Newton iterations used
    """
    eps_e_trial = np.ascontiguousarray(eps_e_trial, dtype=float)
    n = eps_e_trial.shape[0]
    K = E / (3.0 * (1.0 - 2.0 * nu))
    G = E / (2.0 * (1.0 + nu))
    tr = np.trace(eps_e_trial, axis1=1, axis2=2)
    dev = eps_e_trial - tr[:, None, None] / 3.0 * _I3
    s_tr = 2.0 * G * dev
    q_tr = np.sqrt(1.5 * np.einsum("nij,nij->n", s_tr, s_tr))
    f_tr = q_tr - flow_stress(eqps_old, E, sigma_y, n_hard)[0]
    active = f_tr > tol * sigma_y

    dgamma = np.zeros(n)
    iters = 0
    if np.any(active):
        q_a = q_tr[active]
        p0 = eqps_old[active]
        dg = np.zeros_like(q_a)
        for it in range(max_iter):
            sf, h = flow_stress(p0 + dg, E, sigma_y, n_hard)
            r = q_a - 3.0 * G * dg - sf
            iters = it + 1
            if np.all(np.abs(r) <= tol * sigma_y):
                break
            dg = dg + r / (3.0 * G + h)
        else:
            raise ArithmeticError(
                f"return map did not converge, residual {np.max(np.abs(r)):.3e}"
            )
        dgamma[active] = dg

    safe_q = np.where(active, q_tr, 1.0)
    flow = np.where(active[:, None, None], 1.5 * s_tr / safe_q[:, None, None], 0.0)
    sigma = K * tr[:, None, None] * _I3 + s_tr - 2.0 * G * dgamma[:, None, None] * flow

    Id = 0.5 * (np.einsum("ik,jl->ijkl", _I3, _I3) + np.einsum("il,jk->ijkl", _I3, _I3))
    II = np.einsum("ij,kl->ijkl", _I3, _I3)
    Idev = Id - II / 3.0
    C = np.broadcast_to(K * II + 2.0 * G * Idev, (n, 3, 3, 3, 3)).copy()
    if np.any(active):
        _, h = flow_stress(eqps_old[active] + dgamma[active], E, sigma_y, n_hard)
        ratio = dgamma[active] / q_tr[active]
        nbar = flow[active] / 1.5 * q_tr[active, None, None]
        nbar = nbar / np.sqrt(np.einsum("nij,nij->n", nbar, nbar))[:, None, None]
        C[active] = (
            K * II
            + 2.0 * G * (1.0 - 3.0 * G * ratio)[:, None, None, None, None] * Idev
            + (6.0 * G * G * (ratio - 1.0 / (3.0 * G + h)))[:, None, None, None, None]
            * np.einsum("nij,nkl->nijkl", nbar, nbar)
        )
    return sigma, dgamma, flow, C, iters


def flow_stress(eqps, E, sigma_y, n_hard):
    """Power-law flow stress and its slope."""
    base = 1.0 + E * np.asarray(eqps, dtype=float) / sigma_y
    sf = sigma_y * base**n_hard
    h = n_hard * E * base ** (n_hard - 1.0)
    return sf, h


def scalar_element_matrices(N, dNdx, dV, m, a, b, D, res, flux):
    """Element stiffness and residual of a scalar diffusion-type equation.

    ``K_ab = sum_q dV [m N_a N_b + N_a a.grad N_b - (grad N_a.b) N_b
    - grad N_a.D.grad N_b]`` and ``R_a = sum_q dV [res N_a - grad N_a.flux]``.
    """
    Ke = np.einsum("eq,qa,qb->eab", m * dV, N, N)
    Ke += np.einsum("eq,qa,eqi,eqbi->eab", dV, N, a, dNdx, optimize=True)
    Ke -= np.einsum("eq,eqai,eqi,qb->eab", dV, dNdx, b, N, optimize=True)
    Ke -= np.einsum("eq,eqai,eqij,eqbj->eab", dV, dNdx, D, dNdx, optimize=True)
    Re = np.einsum("eq,qa->ea", res * dV, N) - np.einsum("eq,eqai,eqi->ea", dV, dNdx, flux)
    return Ke, Re


def strain_displacement(dNdx):
    """Voigt B matrices, (ne, nq, nv, nen*dim) with engineering shears.

    2D rows are (xx, yy, xy); 3D rows are (xx, yy, zz, yz, xz, xy).
    """
    ne, nq, nen, dim = dNdx.shape
    if dim == 2:
        B = np.zeros((ne, nq, 3, nen * 2))
        B[:, :, 0, 0::2] = dNdx[..., 0]
        B[:, :, 1, 1::2] = dNdx[..., 1]
        B[:, :, 2, 0::2] = dNdx[..., 1]
        B[:, :, 2, 1::2] = dNdx[..., 0]
        return B
    B = np.zeros((ne, nq, 6, nen * 3))
    for k in range(3):
        B[:, :, k, k::3] = dNdx[..., k]
    B[:, :, 3, 1::3] = dNdx[..., 2]
    B[:, :, 3, 2::3] = dNdx[..., 1]
    B[:, :, 4, 0::3] = dNdx[..., 2]
    B[:, :, 4, 2::3] = dNdx[..., 0]
    B[:, :, 5, 0::3] = dNdx[..., 1]
    B[:, :, 5, 1::3] = dNdx[..., 0]
    return B


def vector_element_matrices(dNdx, dV, Dv, sv):
    """Element stiffness ``sum B^T D B dV`` and internal force ``sum B^T s dV``."""
    B = strain_displacement(dNdx)
    BD = np.einsum("eqvi,eqvw->eqiw", B, Dv * dV[..., None, None])
    Ke = np.einsum("eqiw,eqwj->eij", BD, B)
    Re = np.einsum("eqvi,eqv->ei", B, sv * dV[..., None])
    return Ke, Re
