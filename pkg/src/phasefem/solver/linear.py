"""Dirichlet elimination and sparse direct solves."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = ["SingularMatrixError", "Constraints", "apply_dirichlet", "linear_solve"]


class SingularMatrixError(ArithmeticError):
    def __init__(self, message: str, dof: Optional[int] = None):
        super().__init__(message if dof is None else f"{message} (zero pivot at dof {dof})")
        self.dof = dof


@dataclass(frozen=True)
class Constraints:
    """Constrained dofs with target values, validated for duplicates."""

    dofs: np.ndarray
    values: np.ndarray

    @classmethod
    def build(cls, dofs: Sequence[np.ndarray], values: Sequence[np.ndarray]) -> "Constraints":
        if not dofs:
            return cls(np.zeros(0, dtype=np.int64), np.zeros(0))
        d = np.concatenate([np.asarray(x, dtype=np.int64).ravel() for x in dofs])
        v = np.concatenate(
            [np.broadcast_to(np.asarray(y, dtype=float), np.shape(np.ravel(x))) for x, y in zip(dofs, values)]
        )
        order = np.argsort(d, kind="stable")
        d, v = d[order], v[order]
        uniq, first = np.unique(d, return_index=True)
        if len(uniq) != len(d):
            # duplicates are allowed only when they agree
            same = np.ones(len(d), dtype=bool)
            same[1:] = d[1:] != d[:-1]
            group = np.cumsum(same) - 1
            ref = v[first][group]
            bad = np.nonzero(~np.isclose(v, ref, rtol=1e-12, atol=1e-300))[0]
            if len(bad):
                raise ValueError(f"conflicting Dirichlet values for dof {int(d[bad[0]])}")
        return cls(uniq, v[first])


def apply_dirichlet(
    K: sp.csr_matrix, rhs: np.ndarray, dofs: np.ndarray, increments: np.ndarray
) -> Tuple[sp.csr_matrix, np.ndarray]:
    """Eliminate constrained rows and columns, keeping a unit diagonal.

    Solves ``K dx = rhs`` with ``dx[dofs] = increments`` prescribed. Returns
    the modified matrix and right-hand side; the inputs are not changed, so
    reactions can still be read from the unmodified residual.
    """
    dofs = np.asarray(dofs, dtype=np.int64)
    if dofs.size == 0:
        return K, rhs
    K = K.tocsr()
    n = K.shape[0]
    fixed = np.zeros(n, dtype=bool)
    fixed[dofs] = True
    dx = np.zeros(n)
    dx[dofs] = increments
    b = rhs - K @ dx
    b[dofs] = increments
    rows = np.repeat(np.arange(n), np.diff(K.indptr))
    keep = ~(fixed[rows] | fixed[K.indices])
    data = np.where(keep, K.data, 0.0)
    Kc = sp.csr_matrix((data, K.indices.copy(), K.indptr.copy()), shape=K.shape)
    Kc = Kc + sp.csr_matrix((np.ones(len(dofs)), (dofs, dofs)), shape=K.shape)
    return Kc.tocsr(), b


def linear_solve(K, rhs, check: bool = True) -> np.ndarray:
    """Sparse LU solve with one step of iterative refinement when needed."""
    K = sp.csc_matrix(K)
    rhs = np.asarray(rhs, dtype=float)
    if K.shape[0] != K.shape[1]:
        raise ValueError(f"matrix must be square, got {K.shape}")
    if K.shape[0] == 0:
        return np.zeros(0)
    try:
        lu = spla.splu(K, permc_spec="MMD_AT_PLUS_A", options={"SymmetricMode": True})
    except RuntimeError as err:
        raise SingularMatrixError(str(err), _zero_pivot_hint(K)) from None
    x = lu.solve(rhs)
    if not np.all(np.isfinite(x)):
        raise SingularMatrixError("solution is not finite", _zero_pivot_hint(K))
    if check:
        nb = np.linalg.norm(rhs)
        r = rhs - K @ x
        if np.linalg.norm(r) > 1e-10 * nb:
            x = x + lu.solve(r)
    return x


def _zero_pivot_hint(K: sp.csc_matrix) -> Optional[int]:
    empty_cols = np.nonzero(np.diff(K.indptr) == 0)[0]
    if len(empty_cols):
        return int(empty_cols[0])
    Kr = K.tocsr()
    empty_rows = np.nonzero(np.abs(Kr).sum(axis=1).A.ravel() == 0)[0]
    if len(empty_rows):
        return int(empty_rows[0])
    return None
