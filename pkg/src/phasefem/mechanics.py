"""Small-strain constitutive laws at integration points.

Strain and stress tensors are full 3x3 arrays; plane strain is represented by
a zero out-of-plane strain. Every routine accepts a single tensor ``(3, 3)``
or a batch ``(n, 3, 3)`` and answers in the same shape.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Callable, Tuple

import numpy as np

from . import backend

__all__ = [
    "ElasticProps",
    "PlasticProps",
    "MaterialPointState",
    "SplitResult",
    "ReturnMapResult",
    "degradation_at2",
    "degradation_corrosion",
    "clamp_phase",
    "elastic_tangent",
    "thermal_strain",
    "isotropic_split_none",
    "no_tension_split",
    "strain_split",
    "j2_return_map",
    "flow_stress",
    "total_stress",
    "total_tangent",
    "history_update",
    "voigt_tangent",
    "voigt_stress",
    "strain_from_voigt",
    "hydrostatic",
]

_I3 = np.eye(3)


@dataclass(frozen=True)
class ElasticProps:
    E: float
    nu: float
    alpha_T: float = 0.0
    T0: float = 0.0

    def __post_init__(self):
        if not self.E > 0:
            raise ValueError(f"E must be positive, got {self.E}")
        if not -1.0 < self.nu < 0.5:
            raise ValueError(f"nu must lie in (-1, 0.5), got {self.nu}")

    @property
    def lame(self) -> Tuple[float, float]:
        lam = self.E * self.nu / ((1.0 + self.nu) * (1.0 - 2.0 * self.nu))
        return lam, self.E / (2.0 * (1.0 + self.nu))

    @property
    def bulk(self) -> float:
        return self.E / (3.0 * (1.0 - 2.0 * self.nu))

    @property
    def shear(self) -> float:
        return self.E / (2.0 * (1.0 + self.nu))


@dataclass(frozen=True)
class PlasticProps:
    sigma_y: float
    N_hard: float

    def __post_init__(self):
        if not self.sigma_y > 0:
            raise ValueError(f"sigma_y must be positive, got {self.sigma_y}")
        if not 0.0 <= self.N_hard <= 1.0:
            raise ValueError(f"N_hard must lie in [0, 1], got {self.N_hard}")


@dataclass
class MaterialPointState:
    """Per-integration-point memory, stored as arrays over all points."""

    eps: np.ndarray
    eps_p: np.ndarray
    eqps: np.ndarray
    psi_p: np.ndarray
    H: np.ndarray
    eqps_cycle: np.ndarray
    t_cycle: np.ndarray
    eps_vol_rate: np.ndarray
    sigma_h: np.ndarray

    @classmethod
    def zeros(cls, n: int) -> "MaterialPointState":
        return cls(
            eps=np.zeros((n, 3, 3)),
            eps_p=np.zeros((n, 3, 3)),
            eqps=np.zeros(n),
            psi_p=np.zeros(n),
            H=np.zeros(n),
            eqps_cycle=np.zeros(n),
            t_cycle=np.zeros(n),
            eps_vol_rate=np.zeros(n),
            sigma_h=np.zeros(n),
        )

    @property
    def n(self) -> int:
        return len(self.H)

    def copy(self) -> "MaterialPointState":
        return MaterialPointState(**{f.name: getattr(self, f.name).copy() for f in fields(self)})

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _batch(eps) -> Tuple[np.ndarray, bool]:
    a = np.asarray(eps, dtype=float)
    if a.shape == (3, 3):
        return a[None], True
    if a.ndim != 3 or a.shape[1:] != (3, 3):
        raise ValueError(f"expected (3,3) or (n,3,3) tensors, got {a.shape}")
    return a, False


def _unbatch(single: bool, *arrays):
    if single:
        return tuple(x[0] for x in arrays)
    return arrays


def clamp_phase(phi):
    return np.clip(phi, 0.0, 1.0)


def degradation_at2(phi):
    """``g = (1 - phi)^2`` with first and second derivatives."""
    phi = np.asarray(phi, dtype=float)
    return (1.0 - phi) ** 2, -2.0 * (1.0 - phi), np.full_like(phi, 2.0)


def degradation_corrosion(phi):
    """``g = -2 phi^3 + 3 phi^2`` with first and second derivatives."""
    phi = np.asarray(phi, dtype=float)
    return -2.0 * phi**3 + 3.0 * phi**2, 6.0 * phi * (1.0 - phi), 6.0 - 12.0 * phi


def elastic_tangent(props: ElasticProps) -> np.ndarray:
    """Isotropic Hooke tensor ``C0`` as a (3, 3, 3, 3) array."""
    lam, mu = props.lame
    return (
        lam * np.einsum("ij,kl->ijkl", _I3, _I3)
        + mu * (np.einsum("ik,jl->ijkl", _I3, _I3) + np.einsum("il,jk->ijkl", _I3, _I3))
    )


def thermal_strain(T, props: ElasticProps):
    """``alpha_T (T - T0) I`` for a scalar or an array of temperatures."""
    dT = np.asarray(T, dtype=float) - props.T0
    return props.alpha_T * dT[..., None, None] * _I3


def hydrostatic(sig):
    return np.trace(np.asarray(sig), axis1=-2, axis2=-1) / 3.0


@dataclass
class SplitResult:
    """Energy split of a strain state.

    ``psi1``/``sigma1``/``C1`` belong to the undamaged phase and
    ``psi2``/``sigma2``/``C2`` to the part that survives full damage.
    """

    psi1: np.ndarray
    psi2: np.ndarray
    sigma1: np.ndarray
    sigma2: np.ndarray
    C1: np.ndarray
    C2: np.ndarray

    @property
    def sigma0(self):
        return self.sigma1

    @property
    def C_tan(self):
        return self.C1

    def stress(self, g):
        g = np.asarray(g, dtype=float)[..., None, None]
        return g * self.sigma1 + (1.0 - g) * self.sigma2

    def tangent(self, g):
        g = np.asarray(g, dtype=float)[..., None, None, None, None]
        return g * self.C1 + (1.0 - g) * self.C2

    def energy(self, g):
        return g * self.psi1 + (1.0 - g) * self.psi2


def isotropic_split_none(eps, props: ElasticProps) -> SplitResult:
    """No decomposition: the full energy degrades, nothing survives damage."""
    e, single = _batch(eps)
    lam, mu = props.lame
    tr = np.trace(e, axis1=1, axis2=2)
    psi1 = 0.5 * lam * tr**2 + mu * np.einsum("nij,nij->n", e, e)
    sig1 = lam * tr[:, None, None] * _I3 + 2.0 * mu * e
    C0 = np.broadcast_to(elastic_tangent(props), (len(e), 3, 3, 3, 3))
    zero = np.zeros_like(sig1)
    out = _unbatch(single, psi1, np.zeros_like(psi1), sig1, zero, C0, np.zeros_like(C0))
    return SplitResult(*out)


def no_tension_split(eps, props: ElasticProps) -> SplitResult:
    """Spectral no-tension split with its consistent tangent.

    Principal strains are sorted ascending. The surviving energy ``psi2``
    follows a four-branch rule; ties go to the first branch that holds. The
    tangent of ``sigma2`` includes the eigenvector rotation terms so that it
    is the exact derivative away from repeated principal strains.
    """
    e, single = _batch(eps)
    psi1, psi2, sig1, sig2, C2 = backend.no_tension_split(e, props.E, props.nu)
    C0 = np.broadcast_to(elastic_tangent(props), (len(e), 3, 3, 3, 3))
    return SplitResult(*_unbatch(single, psi1, psi2, sig1, sig2, C0, C2))


def strain_split(kind: str) -> Callable[[np.ndarray, ElasticProps], SplitResult]:
    try:
        return {"none": isotropic_split_none, "no_tension": no_tension_split}[kind]
    except KeyError:
        raise ValueError(f"unknown strain energy split {kind!r}") from None


def flow_stress(eqps, plastic: PlasticProps, elastic: ElasticProps):
    """``sigma_f = sigma_y (1 + E p / sigma_y)^N`` and its slope."""
    return backend.flow_stress(eqps, elastic.E, plastic.sigma_y, plastic.N_hard)


@dataclass
class ReturnMapResult:
    sigma: np.ndarray
    eps_p: np.ndarray
    eqps: np.ndarray
    psi_e: np.ndarray
    psi_p: np.ndarray
    C: np.ndarray
    dgamma: np.ndarray


def j2_return_map(
    eps_new,
    eps_p_old,
    eqps_old,
    psi_p_old,
    elastic: ElasticProps,
    plastic: PlasticProps,
    eps_thermal=None,
) -> ReturnMapResult:
    """Implicit radial return for J2 plasticity with power-law hardening.

    Plastic work accumulates as ``sigma : d eps_p`` using the end-of-step
    stress.
    """
    e, single = _batch(eps_new)
    ep_old = np.asarray(eps_p_old, dtype=float).reshape(e.shape)
    p_old = np.atleast_1d(np.asarray(eqps_old, dtype=float))
    wp_old = np.atleast_1d(np.asarray(psi_p_old, dtype=float))
    ee_trial = e - ep_old
    if eps_thermal is not None:
        ee_trial = ee_trial - np.asarray(eps_thermal).reshape(e.shape)
    sigma, dgamma, flow, C, _ = backend.j2_return_map(
        ee_trial, p_old, elastic.E, elastic.nu, plastic.sigma_y, plastic.N_hard
    )
    d_eps_p = dgamma[:, None, None] * flow
    eps_p = ep_old + d_eps_p
    ee = ee_trial - d_eps_p
    psi_e = 0.5 * np.einsum("nij,nij->n", sigma, ee)
    psi_p = wp_old + np.einsum("nij,nij->n", sigma, d_eps_p)
    out = _unbatch(single, sigma, eps_p, p_old + dgamma, psi_e, psi_p, C, dgamma)
    return ReturnMapResult(*out)


def effective_degradation(g, k_res: float = 0.0):
    return (1.0 - k_res) * np.asarray(g, dtype=float) + k_res


def total_stress(
    split: SplitResult,
    phi,
    degradation=degradation_at2,
    alpha_b=0.0,
    p=0.0,
    k_res: float = 0.0,
):
    """``g sigma1 + (1 - g) sigma2 - alpha_b p I`` with ``phi`` clamped to [0, 1]."""
    g = effective_degradation(degradation(clamp_phase(phi))[0], k_res)
    pb = np.asarray(alpha_b, dtype=float) * np.asarray(p, dtype=float)
    return split.stress(g) - pb[..., None, None] * _I3


def total_tangent(split: SplitResult, phi, degradation=degradation_at2, k_res: float = 0.0):
    g = effective_degradation(degradation(clamp_phase(phi))[0], k_res)
    return split.tangent(g)


def history_update(H_old, psi1, psi2):
    """Running maximum of the fracture driving force ``psi1 - psi2``."""
    return np.maximum(H_old, np.asarray(psi1) - np.asarray(psi2))


_VOIGT = {2: ((0, 0), (1, 1), (0, 1)), 3: ((0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1))}


def voigt_tangent(C, dim: int):
    """Voigt matrix of a 4th-order tangent for engineering shear strains."""
    idx = _VOIGT[dim]
    C = np.asarray(C)
    rows = [np.stack([C[..., i, j, k, l] for (k, l) in idx], axis=-1) for (i, j) in idx]
    return np.stack(rows, axis=-2)


def voigt_stress(sig, dim: int):
    sig = np.asarray(sig)
    return np.stack([sig[..., i, j] for (i, j) in _VOIGT[dim]], axis=-1)


def strain_from_voigt(ev, dim: int):
    """Full 3x3 strain from Voigt components with engineering shears."""
    ev = np.asarray(ev, dtype=float)
    out = np.zeros(ev.shape[:-1] + (3, 3))
    for a, (i, j) in enumerate(_VOIGT[dim]):
        v = ev[..., a] if i == j else 0.5 * ev[..., a]
        out[..., i, j] = v
        out[..., j, i] = v
    return out
