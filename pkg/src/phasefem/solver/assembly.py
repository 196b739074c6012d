"""Global residual and stiffness assembly.

The sparsity pattern and the element-to-CSR scatter map are built once per
mesh and component count. Scatter-add uses ``np.bincount`` over entries in
element order, so assembled values are identical from run to run.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from .. import backend
from ..kernels import KernelInput, KernelResponse
from ..mechanics import voigt_stress, voigt_tangent
from ..mesh import ElementGeometry, FacetGeometry, Mesh

__all__ = [
    "DofMap",
    "SparsityPattern",
    "AssembledSystem",
    "ScalarContext",
    "assemble_scalar",
    "assemble_mechanics",
    "small_strain",
    "facet_load",
]


@dataclass(frozen=True)
class DofMap:
    """Interleaved numbering: dof ``node * n_comp + component``."""

    n_nodes: int
    n_comp: int

    @property
    def n_dofs(self) -> int:
        return self.n_nodes * self.n_comp

    def dofs(self, nodes, component: int = 0) -> np.ndarray:
        return np.asarray(nodes, dtype=np.int64) * self.n_comp + component

    def element_dofs(self, connectivity: np.ndarray) -> np.ndarray:
        c = np.asarray(connectivity, dtype=np.int64)
        return (c[:, :, None] * self.n_comp + np.arange(self.n_comp)).reshape(len(c), -1)


class SparsityPattern:
    """CSR structure of a field on a mesh, with a precomputed scatter map."""

    def __init__(self, mesh: Mesh, n_comp: int = 1):
        self.dofmap = DofMap(mesh.n_nodes, n_comp)
        edofs = self.dofmap.element_dofs(mesh.elements)
        self.edofs = edofs
        nd = edofs.shape[1]
        n = self.dofmap.n_dofs
        rows = np.repeat(edofs, nd, axis=1).ravel()
        cols = np.tile(edofs, (1, nd)).ravel()
        keys = rows * n + cols
        uniq, inverse = np.unique(keys, return_inverse=True)
        self.scatter = inverse.astype(np.int64)
        self.indices = (uniq % n).astype(np.int32)
        row_of = uniq // n
        self.row_of_entry = row_of.astype(np.int64)
        self.indptr = np.concatenate([[0], np.cumsum(np.bincount(row_of, minlength=n))]).astype(np.int32)
        self.nnz = len(uniq)
        diag = np.nonzero(row_of == self.indices)[0]
        full_diag = np.full(n, -1, dtype=np.int64)
        full_diag[row_of[diag]] = diag
        self.diag_pos = full_diag
        self.n_dofs = n

    def matrix(self, Ke: np.ndarray) -> sp.csr_matrix:
        data = np.bincount(self.scatter, weights=np.ravel(Ke), minlength=self.nnz)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n_dofs, self.n_dofs))

    def vector(self, Re: np.ndarray) -> np.ndarray:
        return np.bincount(self.edofs.ravel(), weights=np.ravel(Re), minlength=self.n_dofs)


@dataclass
class AssembledSystem:
    K: sp.csr_matrix
    R: np.ndarray
    dofmap: DofMap


@dataclass
class ScalarContext:
    """Field data at all integration points, flattened to ``ne * nq`` rows."""

    geom: ElementGeometry
    s: np.ndarray
    s_old: np.ndarray
    grad_s: np.ndarray
    dt: float
    t: float

    def kernel_input(self, aux=None, U_old=None) -> KernelInput:
        return KernelInput(self.s, self.s_old, self.grad_s, self.dt, aux or {}, self.t, U_old)

    def at_ip(self, nodal: np.ndarray) -> np.ndarray:
        return self.geom.interpolate(nodal).reshape(-1)

    def grad_at_ip(self, nodal: np.ndarray) -> np.ndarray:
        return self.geom.gradient(nodal).reshape(-1, self.geom.mesh.dim)


def facet_load(mesh: Mesh, facets: np.ndarray, value, n_comp: int, component: Optional[int] = None) -> np.ndarray:
    """Consistent nodal load ``int N_a q dA`` over facets.

    ``value`` is a scalar (applied to ``component``, or to a scalar field) or a
    vector with one entry per component.
    """
    fg = FacetGeometry(mesh, facets)
    w = np.einsum("qa,fq->fa", fg.N, fg.dA)  # (nf, nfn)
    out = np.zeros(mesh.n_nodes * n_comp)
    val = np.atleast_1d(np.asarray(value, dtype=float))
    comps = range(n_comp) if component is None and len(val) == n_comp else [component or 0]
    for k, c in enumerate(comps):
        v = val[k] if len(val) > 1 else val[0]
        np.add.at(out, fg.facets.ravel() * n_comp + c, (w * v).ravel())
    return out


def assemble_scalar(
    geom: ElementGeometry,
    pattern: SparsityPattern,
    values: np.ndarray,
    values_old: np.ndarray,
    dt: float,
    kernel: Callable[[ScalarContext], KernelResponse],
    t: float = 0.0,
    boundary_flux: Optional[np.ndarray] = None,
) -> AssembledSystem:
    """Residual and tangent of ``rho dU/dt + div f - r = 0``.

    ``kernel`` maps a :class:`ScalarContext` to a :class:`KernelResponse`.
    ``boundary_flux`` is a precomputed nodal vector of outward fluxes
    ``int N_i q_out dS`` added to the residual.
    """
    ne, nq = geom.dV.shape
    dim = geom.mesh.dim
    ctx = ScalarContext(
        geom=geom,
        s=geom.interpolate(values).reshape(-1),
        s_old=geom.interpolate(values_old).reshape(-1),
        grad_s=geom.gradient(values).reshape(-1, dim),
        dt=dt,
        t=t,
    )
    resp = kernel(ctx)
    resp.check_finite()
    rho_dt = resp.rho / dt
    m = (rho_dt * resp.dU_ds - resp.dr_ds).reshape(ne, nq)
    a = (rho_dt[:, None] * resp.dU_dgrad).reshape(ne, nq, dim)
    b = resp.dflux_ds.reshape(ne, nq, dim)
    D = resp.dflux_dgrad.reshape(ne, nq, dim, dim)
    res = (rho_dt * (resp.U_new - resp.U_old) - resp.r).reshape(ne, nq)
    flux = resp.flux.reshape(ne, nq, dim)
    Ke, Re = backend.scalar_element_matrices(
        np.ascontiguousarray(geom.N),
        np.ascontiguousarray(geom.dNdx),
        np.ascontiguousarray(geom.dV),
        np.ascontiguousarray(m),
        np.ascontiguousarray(a),
        np.ascontiguousarray(b),
        np.ascontiguousarray(D),
        np.ascontiguousarray(res),
        np.ascontiguousarray(flux),
    )
    R = pattern.vector(Re)
    if boundary_flux is not None:
        R = R + boundary_flux
    return AssembledSystem(pattern.matrix(Ke), R, pattern.dofmap)


def small_strain(geom: ElementGeometry, u: np.ndarray) -> np.ndarray:
    """Full 3x3 small strain at all integration points, ``(ne*nq, 3, 3)``."""
    mesh = geom.mesh
    dim = mesh.dim
    ue = np.asarray(u).reshape(mesh.n_nodes, dim)[mesh.elements]  # (ne, nen, dim)
    grad = np.einsum("eqaj,eai->eqij", geom.dNdx, ue).reshape(-1, dim, dim)
    eps = np.zeros((grad.shape[0], 3, 3))
    eps[:, :dim, :dim] = 0.5 * (grad + np.swapaxes(grad, 1, 2))
    return eps


def assemble_mechanics(
    geom: ElementGeometry,
    pattern: SparsityPattern,
    u: np.ndarray,
    material: Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]],
    external: Optional[np.ndarray] = None,
) -> AssembledSystem:
    """Internal-force residual ``int B^T sigma dV - f_ext`` and tangent ``int B^T C B dV``.

    ``material`` maps strains ``(n, 3, 3)`` to ``(sigma (n,3,3), C (n,3,3,3,3))``.
    """
    mesh = geom.mesh
    dim = mesh.dim
    ne, nq = geom.dV.shape
    eps = small_strain(geom, u)
    sigma, C = material(eps)
    Dv = voigt_tangent(C, dim).reshape(ne, nq, *(2 * [3 if dim == 2 else 6]))
    sv = voigt_stress(sigma, dim).reshape(ne, nq, -1)
    Ke, Re = backend.vector_element_matrices(
        np.ascontiguousarray(geom.dNdx),
        np.ascontiguousarray(geom.dV),
        np.ascontiguousarray(Dv),
        np.ascontiguousarray(sv),
    )
    R = pattern.vector(Re)
    if external is not None:
        R = R - external
    return AssembledSystem(pattern.matrix(Ke), R, pattern.dofmap)
