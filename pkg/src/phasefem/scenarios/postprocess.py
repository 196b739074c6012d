"""Post-processing for scenario runs: probes, crack counting and pit fronts."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ..mesh import Mesh
from ..recovery import ip_gradient, recover_nodal_field

__all__ = [
    "ProbeSeries",
    "recover_nodal_field",
    "ip_gradient",
    "nodes_along",
    "crack_count",
    "element_edges",
    "level_set_points",
    "fit_circle",
    "pit_depth",
    "shape_deviation",
    "nearest_node",
]


@dataclass
class ProbeSeries:
    """A named time series; times must be strictly increasing."""

    name: str
    times: List[float] = field(default_factory=list)
    values: List[float] = field(default_factory=list)

    def __post_init__(self):
        self.times = [float(t) for t in self.times]
        self.values = [float(v) for v in self.values]
        if len(self.times) != len(self.values):
            raise ValueError(f"probe {self.name!r}: {len(self.times)} times but {len(self.values)} values")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError(f"probe {self.name!r}: times must be strictly increasing")

    def append(self, t: float, v: float) -> None:
        if self.times and not t > self.times[-1]:
            raise ValueError(f"probe {self.name!r}: time {t} does not follow {self.times[-1]}")
        self.times.append(float(t))
        self.values.append(float(v))

    def __len__(self) -> int:
        return len(self.times)

    def as_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.times), np.asarray(self.values)


def nearest_node(mesh: Mesh, point) -> int:
    d = np.linalg.norm(mesh.nodes - np.asarray(point, dtype=float), axis=1)
    return int(np.argmin(d))


def nodes_along(mesh: Mesh, axis: int, value: float, tol: Optional[float] = None) -> np.ndarray:
    """Nodes on the grid line ``x[axis] == value`` (nearest line if off-grid),
    ordered by the remaining coordinate."""
    coord = mesh.nodes[:, axis]
    nearest = coord[np.argmin(np.abs(coord - value))]
    if tol is None:
        span = np.ptp(mesh.nodes, axis=0).max()
        tol = 1e-9 * max(span, 1.0)
    ids = np.nonzero(np.abs(coord - nearest) <= tol)[0]
    other = mesh.nodes[ids, 1 - axis] if mesh.dim == 2 else mesh.nodes[ids][:, [i for i in range(mesh.dim) if i != axis]][:, 0]
    return ids[np.argsort(other, kind="stable")]


def crack_count(phi_path, positions=None, threshold: float = 0.95) -> Tuple[int, np.ndarray]:
    """Count connected runs of ``phi >= threshold`` along an ordered node path.

    Returns the count and the spacings between consecutive run centres
    (measured in ``positions``, or in path index when omitted).
    """
    phi = np.asarray(phi_path, dtype=float)
    pos = np.arange(len(phi), dtype=float) if positions is None else np.asarray(positions, dtype=float)
    if pos.shape != phi.shape:
        raise ValueError("positions must match the path length")
    on = phi >= threshold
    if not on.any():
        return 0, np.zeros(0)
    edges = np.diff(np.concatenate([[0], on.astype(np.int8), [0]]))
    starts = np.nonzero(edges == 1)[0]
    stops = np.nonzero(edges == -1)[0] - 1
    centres = 0.5 * (pos[starts] + pos[stops])
    return len(starts), np.diff(centres)


_EDGE_TABLE = {
    "tri3": ((0, 1), (1, 2), (2, 0)),
    "quad4": ((0, 1), (1, 2), (2, 3), (3, 0)),
    "quad8": ((0, 1), (1, 2), (2, 3), (3, 0)),
    "hex8": ((0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6), (6, 7), (7, 4), (0, 4), (1, 5), (2, 6), (3, 7)),
}


def element_edges(mesh: Mesh) -> np.ndarray:
    """Unique corner-to-corner element edges as ``(n_edges, 2)`` node pairs."""
    if mesh.kind not in _EDGE_TABLE:
        raise ValueError(f"no edge table for {mesh.kind}")
    pairs = np.concatenate([mesh.elements[:, [a, b]] for a, b in _EDGE_TABLE[mesh.kind]])
    pairs.sort(axis=1)
    return np.unique(pairs, axis=0)


def level_set_points(mesh: Mesh, nodal, level: float = 0.5) -> np.ndarray:
    """Points where the linear interpolant of ``nodal`` along element edges hits ``level``."""
    v = np.asarray(nodal, dtype=float)
    e = element_edges(mesh)
    a, b = v[e[:, 0]] - level, v[e[:, 1]] - level
    cross = (a * b < 0) | ((a == 0) & (b != 0))
    a, b, e = a[cross], b[cross], e[cross]
    w = a / (a - b)
    x = mesh.nodes
    return x[e[:, 0]] + w[:, None] * (x[e[:, 1]] - x[e[:, 0]])


def fit_circle(points) -> Tuple[np.ndarray, float]:
    """Algebraic least-squares circle through 2D points: ``(centre, radius)``."""
    p = np.asarray(points, dtype=float)
    if len(p) < 3:
        raise ValueError("at least three points are needed to fit a circle")
    A = np.column_stack([2 * p[:, 0], 2 * p[:, 1], np.ones(len(p))])
    rhs = (p**2).sum(axis=1)
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    centre = sol[:2]
    return centre, float(np.sqrt(sol[2] + centre @ centre))


def pit_depth(mesh: Mesh, phi, surface: float = 0.0, axis: int = 1, level: float = 0.5) -> float:
    """Largest distance of the ``phi = level`` front below ``x[axis] = surface``."""
    pts = level_set_points(mesh, phi, level)
    if len(pts) == 0:
        return 0.0
    return float(max(0.0, np.max(surface - pts[:, axis])))


def shape_deviation(mesh: Mesh, phi, level: float = 0.5, centre=None) -> Tuple[float, float]:
    """Largest radial deviation of the front from its best-fit circle, over the radius.

    With ``centre`` given only the radius is fitted. Returns ``(metric, radius)``.
    """
    pts = level_set_points(mesh, phi, level)
    if centre is None:
        c, R = fit_circle(pts)
    else:
        c = np.asarray(centre, dtype=float)
        R = float(np.mean(np.linalg.norm(pts - c, axis=1)))
    r = np.linalg.norm(pts - c, axis=1)
    return float(np.max(np.abs(r - R)) / R), R
