"""Newton iteration on one field or on a block of fields."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Tuple

import numpy as np
import scipy.sparse as sp

from .linear import Constraints, apply_dirichlet, linear_solve

__all__ = ["ConvergenceReport", "NewtonError", "newton_solve"]


@dataclass
class ConvergenceReport:
    iterations: int = 0
    residual_norms: List[float] = field(default_factory=list)
    converged: bool = False

    def rates(self) -> np.ndarray:
        """Successive ratios ``log r_{k+1} / log r_k`` of the residual norms."""
        r = np.asarray(self.residual_norms)
        r = r[r > 0]
        if len(r) < 3:
            return np.zeros(0)
        lr = np.log(r)
        return (lr[2:] - lr[1:-1]) / (lr[1:-1] - lr[:-2])


class NewtonError(RuntimeError):
    def __init__(self, message: str, report: ConvergenceReport):
        super().__init__(message)
        self.report = report


ROUNDOFF = 8.0 * np.finfo(float).eps

Assembler = Callable[[np.ndarray], Tuple[sp.spmatrix, np.ndarray]]


def newton_solve(
    assemble: Assembler,
    x0: np.ndarray,
    constraints: Constraints = None,
    tol_rel: float = 1e-6,
    tol_abs: float = 1e-10,
    max_iter: int = 25,
    raise_on_failure: bool = False,
) -> Tuple[np.ndarray, ConvergenceReport]:
    """Solve ``R(x) = 0`` given ``assemble(x) -> (K, R)`` with ``K = dR/dx``.

    Convergence is ``||R_free|| <= max(tol_abs, tol_rel * ||R_0||)`` where
    ``R_0`` is the larger of the free residual at the start and the full
    residual (reactions included) after the first update, so that purely
    displacement-driven steps have a meaningful force scale.

    The tolerance never drops below the round-off level of the residual,
    ``ROUNDOFF * || |K| |x| ||``, so strongly contrasting coefficients (an
    open crack next to tight rock) cannot make a converged solve look stuck.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    if constraints is None:
        constraints = Constraints.build([], [])
    x = np.array(x0, dtype=float, copy=True)
    free = np.ones(len(x), dtype=bool)
    free[constraints.dofs] = False
    report = ConvergenceReport()
    ref = 0.0
    for it in range(max_iter + 1):
        K, R = assemble(x)
        rn = float(np.linalg.norm(R[free]))
        floor = ROUNDOFF * float(np.linalg.norm((abs(K) @ np.abs(x))[free]))
        report.residual_norms.append(rn)
        if not np.isfinite(rn):
            break
        jump = constraints.values - x[constraints.dofs]
        if it == 0:
            ref = rn
        elif it == 1:
            ref = max(ref, float(np.linalg.norm(R)))
        at_target = not np.any(jump)
        if at_target and rn <= max(tol_abs, tol_rel * ref, floor):
            report.converged = True
            break
        if it == max_iter:
            break
        Kc, b = apply_dirichlet(K, -R, constraints.dofs, jump)
        x = x + linear_solve(Kc, b)
        report.iterations = it + 1
    if not report.converged and raise_on_failure:
        raise NewtonError(
            f"Newton did not converge in {max_iter} iterations, residual {report.residual_norms[-1]:.3e}",
            report,
        )
    return x, report
