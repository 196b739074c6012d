"""Projection of integration-point data to nodes and back."""

from __future__ import annotations

import numpy as np

from .mesh import ElementGeometry

__all__ = ["extrapolation_matrix", "recover_nodal_field", "ip_gradient"]


def extrapolation_matrix(geom: ElementGeometry) -> np.ndarray:
    """``(nen, nq)`` map from quadrature values to element nodes.

    Uses the (pseudo-)inverse of the shape-function matrix at the quadrature
    points. With at least as many points as nodes this is exact for fields the
    element interpolates; a one-point rule spreads the point value uniformly.
    """
    return np.linalg.pinv(geom.N)


def recover_nodal_field(geom: ElementGeometry, ip_values) -> np.ndarray:
    """Volume-weighted average of element-wise extrapolated values.

    ``ip_values`` has shape ``(ne, nq)`` or ``(ne*nq,)``.
    """
    mesh = geom.mesh
    ne, nq = geom.dV.shape
    if ne == 0:
        raise ValueError("cannot recover a field on an empty mesh")
    v = np.asarray(ip_values, dtype=float).reshape(ne, nq)
    ext = v @ extrapolation_matrix(geom).T  # (ne, nen)
    vol = geom.dV.sum(axis=1)
    num = np.bincount(mesh.elements.ravel(), weights=(ext * vol[:, None]).ravel(), minlength=mesh.n_nodes)
    den = np.bincount(mesh.elements.ravel(), weights=np.repeat(vol, mesh.elements.shape[1]), minlength=mesh.n_nodes)
    return num / np.where(den > 0, den, 1.0)


def ip_gradient(geom: ElementGeometry, nodal) -> np.ndarray:
    """Gradient of a nodal field at integration points, ``(ne*nq, dim)``."""
    return geom.gradient(nodal).reshape(-1, geom.mesh.dim)
