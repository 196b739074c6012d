"""Meshes, shape functions, quadrature and isoparametric mapping.

Supported element kinds are ``tri3``, ``quad4``, ``quad8`` (serendipity, no
centre node) and ``hex8``. Node numbering is counter-clockwise for the 2D
kinds; for ``quad8`` the four corners come first and the mid-side nodes follow
edge order 0-1, 1-2, 2-3, 3-0. ``hex8`` lists the bottom face (local
``zeta = -1``) counter-clockwise, then the top face in the same order.

A mesh carries one element kind. Boundary facets (lines in 2D, quadrilateral
faces in 3D) are stored in named facet sets and are used to integrate fluxes
and tractions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

__all__ = [
    "ElementKind",
    "ELEMENT_KINDS",
    "Node",
    "Element",
    "QuadratureRule",
    "Mesh",
    "MeshError",
    "InvertedElementError",
    "DanglingReferenceError",
    "gauss_rule",
    "shape_eval",
    "map_gradients",
    "ElementGeometry",
    "FacetGeometry",
    "generate_structured",
    "graded_axis",
]


class MeshError(ValueError):
    """Invalid mesh construction or input."""


class InvertedElementError(MeshError):
    """An element has a non-positive Jacobian determinant."""

    def __init__(self, element: int, detj: float):
        super().__init__(f"element {element} is inverted or degenerate (detJ={detj:.6g})")
        self.element = element
        self.detj = detj


class DanglingReferenceError(MeshError):
    """A connectivity or set entry references a missing id."""


@dataclass(frozen=True)
class ElementKind:
    name: str
    dim: int
    n_nodes: int
    facet: str
    ref_volume: float
    gmsh_type: int


ELEMENT_KINDS: Dict[str, ElementKind] = {
    "line2": ElementKind("line2", 1, 2, "point", 2.0, 1),
    "line3": ElementKind("line3", 1, 3, "point", 2.0, 8),
    "tri3": ElementKind("tri3", 2, 3, "line2", 0.5, 2),
    "quad4": ElementKind("quad4", 2, 4, "line2", 4.0, 3),
    "quad8": ElementKind("quad8", 2, 8, "line3", 4.0, 16),
    "hex8": ElementKind("hex8", 3, 8, "quad4", 8.0, 5),
}

SOLID_KINDS = ("tri3", "quad4", "quad8", "hex8")


@dataclass(frozen=True)
class Node:
    id: int
    coords: np.ndarray


@dataclass(frozen=True)
class Element:
    id: int
    kind: str
    node_ids: Tuple[int, ...]


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray

    @property
    def n_points(self) -> int:
        return len(self.weights)


def _gauss_1d(n: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def gauss_rule(kind: str, reduced: bool = False) -> QuadratureRule:
    """Default Gauss rule for an element kind.

    Full integration is 1 point (tri3), 2x2 (quad4), 3x3 (quad8) and 2x2x2
    (hex8). ``reduced`` drops one point per direction for the tensor kinds.
    """
    if kind == "tri3":
        return QuadratureRule(np.array([[1.0 / 3.0, 1.0 / 3.0]]), np.array([0.5]))
    orders = {"line2": 2, "line3": 3, "quad4": 2, "quad8": 3, "hex8": 2}
    if kind not in orders:
        raise MeshError(f"no quadrature rule for element kind {kind!r}")
    n = orders[kind] - (1 if reduced else 0)
    dim = ELEMENT_KINDS[kind].dim
    x, w = _gauss_1d(n)
    grids = np.meshgrid(*([x] * dim), indexing="ij")
    wgrids = np.meshgrid(*([w] * dim), indexing="ij")
    # first local coordinate varies fastest
    pts = np.stack([g.transpose().ravel() for g in grids], axis=1)
    wts = np.prod(np.stack([g.transpose().ravel() for g in wgrids], axis=1), axis=1)
    return QuadratureRule(pts, wts)


_QUAD4_XI = np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]], dtype=float)
_QUAD8_XI = np.array(
    [[-1, -1], [1, -1], [1, 1], [-1, 1], [0, -1], [1, 0], [0, 1], [-1, 0]], dtype=float
)
_HEX8_XI = np.array(
    [
        [-1, -1, -1], [1, -1, -1], [1, 1, -1], [-1, 1, -1],
        [-1, -1, 1], [1, -1, 1], [1, 1, 1], [-1, 1, 1],
    ],
    dtype=float,
)


def reference_nodes(kind: str) -> np.ndarray:
    """Local coordinates of the element nodes."""
    if kind == "tri3":
        return np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    if kind == "quad4":
        return _QUAD4_XI.copy()
    if kind == "quad8":
        return _QUAD8_XI.copy()
    if kind == "hex8":
        return _HEX8_XI.copy()
    if kind == "line2":
        return np.array([[-1.0], [1.0]])
    if kind == "line3":
        return np.array([[-1.0], [1.0], [0.0]])
    raise MeshError(f"unsupported element kind {kind!r}")


def shape_eval(kind: str, xi) -> Tuple[np.ndarray, np.ndarray]:
    """Shape functions and their local derivatives.

    ``xi`` is a single point of shape ``(dim,)`` or a batch ``(npts, dim)``.
    Returns ``N`` with shape ``(..., nen)`` and ``dN`` with shape
    ``(..., nen, dim)`` matching the leading shape of ``xi``.
    """
    xi = np.asarray(xi, dtype=float)
    single = xi.ndim == 1
    pts = np.atleast_2d(xi)
    if kind == "tri3":
        r, s = pts[:, 0], pts[:, 1]
        N = np.stack([1.0 - r - s, r, s], axis=1)
        dN = np.broadcast_to(
            np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]]), (len(pts), 3, 2)
        ).copy()
    elif kind == "quad4":
        a = _QUAD4_XI
        fx = 1.0 + pts[:, None, 0] * a[None, :, 0]
        fy = 1.0 + pts[:, None, 1] * a[None, :, 1]
        N = 0.25 * fx * fy
        dN = np.stack([0.25 * a[None, :, 0] * fy, 0.25 * a[None, :, 1] * fx], axis=2)
    elif kind == "quad8":
        x, y = pts[:, 0:1], pts[:, 1:2]
        a = _QUAD8_XI
        xa, ya = a[None, :4, 0], a[None, :4, 1]
        fx, fy = 1.0 + x * xa, 1.0 + y * ya
        g = x * xa + y * ya - 1.0
        Nc = 0.25 * fx * fy * g
        dNc_x = 0.25 * xa * fy * (g + fx)
        dNc_y = 0.25 * ya * fx * (g + fy)
        # mid-side nodes 4, 6 sit on eta = -1, +1; nodes 5, 7 on xi = +1, -1
        yb = a[None, [4, 6], 1]
        xb = a[None, [5, 7], 0]
        Nh = 0.5 * (1.0 - x * x) * (1.0 + y * yb)
        dNh_x = -x * (1.0 + y * yb)
        dNh_y = 0.5 * (1.0 - x * x) * yb
        Nv = 0.5 * (1.0 + x * xb) * (1.0 - y * y)
        dNv_x = 0.5 * xb * (1.0 - y * y)
        dNv_y = -(1.0 + x * xb) * y
        N = np.concatenate([Nc, Nh[:, :1], Nv[:, :1], Nh[:, 1:], Nv[:, 1:]], axis=1)
        dNx = np.concatenate([dNc_x, dNh_x[:, :1], dNv_x[:, :1], dNh_x[:, 1:], dNv_x[:, 1:]], axis=1)
        dNy = np.concatenate([dNc_y, dNh_y[:, :1], dNv_y[:, :1], dNh_y[:, 1:], dNv_y[:, 1:]], axis=1)
        dN = np.stack([dNx, dNy], axis=2)
    elif kind == "hex8":
        a = _HEX8_XI
        f = [1.0 + pts[:, None, k] * a[None, :, k] for k in range(3)]
        N = 0.125 * f[0] * f[1] * f[2]
        dN = np.stack(
            [
                0.125 * a[None, :, 0] * f[1] * f[2],
                0.125 * a[None, :, 1] * f[0] * f[2],
                0.125 * a[None, :, 2] * f[0] * f[1],
            ],
            axis=2,
        )
    elif kind == "line2":
        x = pts[:, 0:1]
        N = np.concatenate([0.5 * (1 - x), 0.5 * (1 + x)], axis=1)
        dN = np.broadcast_to(np.array([[-0.5], [0.5]]), (len(pts), 2, 1)).copy()
    elif kind == "line3":
        x = pts[:, 0:1]
        N = np.concatenate([0.5 * x * (x - 1), 0.5 * x * (x + 1), 1 - x * x], axis=1)
        dN = np.stack([x - 0.5, x + 0.5, -2 * x], axis=1)
    else:
        raise MeshError(f"unsupported element kind {kind!r}")
    if single:
        return N[0], dN[0]
    return N, dN


def map_gradients(node_coords, dN_dxi) -> Tuple[float, np.ndarray]:
    """Jacobian determinant and physical gradients at one point.

    ``node_coords`` is ``(nen, dim)`` and ``dN_dxi`` is ``(nen, dim)``.
    """
    x = np.asarray(node_coords, dtype=float)
    dN = np.asarray(dN_dxi, dtype=float)
    J = x.T @ dN
    detj = float(np.linalg.det(J))
    if not detj > 0.0:
        raise InvertedElementError(-1, detj)
    return detj, dN @ np.linalg.inv(J)


@dataclass(frozen=True)
class Mesh:
    """Single-kind finite element mesh.

    Node and element ids are implicit row indices (contiguous from 0).
    """

    nodes: np.ndarray
    elements: np.ndarray
    kind: str
    node_sets: Mapping[str, np.ndarray] = field(default_factory=dict)
    element_sets: Mapping[str, np.ndarray] = field(default_factory=dict)
    facet_sets: Mapping[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in SOLID_KINDS:
            raise MeshError(f"unsupported element kind {self.kind!r}")
        info = ELEMENT_KINDS[self.kind]
        nodes = np.ascontiguousarray(self.nodes, dtype=float)
        elements = np.ascontiguousarray(self.elements, dtype=np.int64)
        if nodes.ndim != 2 or nodes.shape[1] != info.dim:
            raise MeshError(f"{self.kind} mesh needs {info.dim}D coordinates, got shape {nodes.shape}")
        if elements.ndim != 2 or elements.shape[1] != info.n_nodes:
            raise MeshError(f"{self.kind} elements need {info.n_nodes} nodes, got shape {elements.shape}")
        nodes.setflags(write=False)
        elements.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "node_sets", {k: _frozen_ids(v) for k, v in self.node_sets.items()})
        object.__setattr__(self, "element_sets", {k: _frozen_ids(v) for k, v in self.element_sets.items()})
        object.__setattr__(self, "facet_sets", {k: _frozen_ids(v) for k, v in self.facet_sets.items()})
        self._check_references()

    def _check_references(self) -> None:
        nn, ne = self.n_nodes, self.n_elements
        if self.elements.size and (self.elements.min() < 0 or self.elements.max() >= nn):
            bad = int(np.nonzero(((self.elements < 0) | (self.elements >= nn)).any(axis=1))[0][0])
            raise DanglingReferenceError(f"element {bad} references a node outside 0..{nn - 1}")
        for name, ids in self.node_sets.items():
            if ids.size and (ids.min() < 0 or ids.max() >= nn):
                raise DanglingReferenceError(f"node set {name!r} references a missing node")
        for name, ids in self.element_sets.items():
            if ids.size and (ids.min() < 0 or ids.max() >= ne):
                raise DanglingReferenceError(f"element set {name!r} references a missing element")
        for name, ids in self.facet_sets.items():
            if ids.size and (ids.min() < 0 or ids.max() >= nn):
                raise DanglingReferenceError(f"facet set {name!r} references a missing node")

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def facet_kind(self) -> str:
        return ELEMENT_KINDS[self.kind].facet

    def node(self, i: int) -> Node:
        return Node(int(i), self.nodes[i])

    def element(self, i: int) -> Element:
        return Element(int(i), self.kind, tuple(int(n) for n in self.elements[i]))

    def nodes_in(self, name: str) -> np.ndarray:
        """Node ids of a node set, or of all nodes touched by a facet set."""
        if name in self.node_sets:
            return self.node_sets[name]
        if name in self.facet_sets:
            return np.unique(self.facet_sets[name])
        raise KeyError(f"no node or facet set named {name!r}")

    def check_jacobians(self, rule: Optional[QuadratureRule] = None) -> None:
        """Raise :class:`InvertedElementError` for any element with detJ <= 0.

        Besides the quadrature points, detJ is evaluated at the element's own
        nodes, so that collapsed elements (two coincident nodes) are caught:
        their detJ vanishes only at the collapsed corner.
        """
        geom = ElementGeometry(self, rule)
        if not self.n_elements:
            return
        _, dN = shape_eval(self.kind, reference_nodes(self.kind))
        J = np.einsum("eai,qaj->eqij", self.nodes[self.elements], dN)
        detj = np.linalg.det(J)
        scale = np.abs(geom.detJ).max(axis=1, keepdims=True)
        bad = detj <= 1e-10 * scale
        if bad.any():
            e, q = np.argwhere(bad)[0]
            raise InvertedElementError(int(e), float(detj[e, q]))

    def with_sets(self, node_sets=None, element_sets=None, facet_sets=None) -> "Mesh":
        """Copy of the mesh with extra named sets merged in."""
        return Mesh(
            self.nodes,
            self.elements,
            self.kind,
            {**self.node_sets, **(node_sets or {})},
            {**self.element_sets, **(element_sets or {})},
            {**self.facet_sets, **(facet_sets or {})},
        )


def _frozen_ids(v) -> np.ndarray:
    a = np.ascontiguousarray(v, dtype=np.int64)
    a.setflags(write=False)
    return a


class ElementGeometry:
    """Cached quadrature-point geometry for every element of a mesh.

    Attributes
    ----------
    N : (nq, nen) shape function values
    dNdx : (ne, nq, nen, dim) physical gradients
    dV : (ne, nq) integration weights times detJ
    x : (ne, nq, dim) quadrature point coordinates
    """

    def __init__(self, mesh: Mesh, rule: Optional[QuadratureRule] = None):
        self.mesh = mesh
        self.rule = rule if rule is not None else gauss_rule(mesh.kind)
        N, dN = shape_eval(mesh.kind, self.rule.points)
        xe = mesh.nodes[mesh.elements]  # (ne, nen, dim)
        J = np.einsum("eai,qaj->eqij", xe, dN)
        detj = np.linalg.det(J) if len(xe) else np.zeros((0, len(N)))
        if detj.size and not np.all(detj > 0.0):
            e, q = np.unravel_index(int(np.argmin(detj)), detj.shape)
            raise InvertedElementError(int(e), float(detj[e, q]))
        invJ = np.linalg.inv(J) if len(xe) else J
        self.N = N
        self.dNdxi = dN
        self.detJ = detj
        self.dNdx = np.einsum("qaj,eqji->eqai", dN, invJ)
        self.dV = detj * self.rule.weights[None, :]
        self.x = np.einsum("qa,eai->eqi", N, xe)

    @property
    def n_qp(self) -> int:
        return self.rule.n_points

    def volume(self) -> float:
        return float(self.dV.sum())

    def interpolate(self, nodal: np.ndarray) -> np.ndarray:
        """Values at quadrature points, shape (ne, nq[, ncomp])."""
        ve = np.asarray(nodal)[self.mesh.elements]
        if ve.ndim == 2:
            return np.einsum("qa,ea->eq", self.N, ve)
        return np.einsum("qa,eac->eqc", self.N, ve)

    def gradient(self, nodal: np.ndarray) -> np.ndarray:
        """Gradient of a scalar nodal field at quadrature points, (ne, nq, dim)."""
        ve = np.asarray(nodal)[self.mesh.elements]
        return np.einsum("eqai,ea->eqi", self.dNdx, ve)

    def integrate(self, ip_values: np.ndarray) -> float:
        return float(np.sum(ip_values * self.dV))


class FacetGeometry:
    """Quadrature on boundary facets: values ``N`` (nq, nfn) and ``dA`` (nf, nq)."""

    def __init__(self, mesh: Mesh, facets: np.ndarray):
        kind = mesh.facet_kind
        self.facets = np.asarray(facets, dtype=np.int64).reshape(-1, ELEMENT_KINDS[kind].n_nodes)
        self.rule = gauss_rule(kind)
        self.N, dN = shape_eval(kind, self.rule.points)
        xf = mesh.nodes[self.facets]
        T = np.einsum("fai,qaj->fqij", xf, dN)  # tangents, (nf, nq, dim, dim-1)
        if kind == "quad4":
            n = np.cross(T[..., 0], T[..., 1])
            jac = np.linalg.norm(n, axis=-1)
        else:
            jac = np.linalg.norm(T[..., 0], axis=-1)
        self.dA = jac * self.rule.weights[None, :]
        self.x = np.einsum("qa,fai->fqi", self.N, xf)


def graded_axis(breaks: Sequence[float], sizes: Sequence[float]) -> np.ndarray:
    """Piecewise-uniform node coordinates.

    ``breaks`` are the segment end points and ``sizes`` the target element size
    in each segment; each segment gets ``ceil(length / size)`` equal elements.
    """
    breaks = [float(b) for b in breaks]
    if len(sizes) != len(breaks) - 1:
        raise MeshError("graded_axis needs one size per segment")
    pts = [breaks[0]]
    for a, b, h in zip(breaks[:-1], breaks[1:], sizes):
        if not b > a or not h > 0:
            raise MeshError("graded_axis segments must be increasing with positive sizes")
        n = max(1, int(np.ceil((b - a) / h - 1e-9)))
        pts.extend(np.linspace(a, b, n + 1)[1:])
    return np.array(pts)


AxisSpec = Union[int, Sequence[float], np.ndarray]


def _axis(lo: float, hi: float, spec: AxisSpec) -> np.ndarray:
    if np.isscalar(spec):
        n = int(spec)
        if n < 1:
            raise MeshError("divisions must be >= 1 per axis")
        return np.linspace(lo, hi, n + 1)
    x = np.asarray(spec, dtype=float)
    if x.ndim != 1 or len(x) < 2 or np.any(np.diff(x) <= 0):
        raise MeshError("explicit axis coordinates must be strictly increasing")
    if abs(x[0] - lo) > 1e-12 * max(1.0, abs(lo)) or abs(x[-1] - hi) > 1e-12 * max(1.0, abs(hi)):
        raise MeshError("explicit axis coordinates must span the bounds")
    return x


def generate_structured(bounds, divisions: Sequence[AxisSpec], kind: str = "quad4") -> Mesh:
    """Structured grid over an axis-aligned box.

    ``bounds`` is ``[(x0, x1), (y0, y1)[, (z0, z1)]]``. Each entry of
    ``divisions`` is either an element count or explicit node coordinates
    along that axis (see :func:`graded_axis`). Node and facet sets named
    left/right/bottom/top (and front/back for z) are created.
    """
    bounds = [(float(a), float(b)) for a, b in bounds]
    dim = len(bounds)
    if dim not in (2, 3) or len(divisions) != dim:
        raise MeshError("bounds and divisions must both have 2 or 3 axes")
    for a, b in bounds:
        if not b > a:
            raise MeshError(f"degenerate bounds ({a}, {b})")
    if kind not in SOLID_KINDS or ELEMENT_KINDS[kind].dim != dim:
        raise MeshError(f"element kind {kind!r} is not supported in {dim}D")
    axes = [_axis(lo, hi, d) for (lo, hi), d in zip(bounds, divisions)]
    if dim == 2:
        return _structured_2d(axes, kind)
    return _structured_hex(axes)


def _structured_2d(axes, kind: str) -> Mesh:
    xs, ys = axes
    nx, ny = len(xs) - 1, len(ys) - 1
    X, Y = np.meshgrid(xs, ys)  # (ny+1, nx+1)
    coords = [np.stack([X.ravel(), Y.ravel()], axis=1)]
    cid = np.arange((nx + 1) * (ny + 1)).reshape(ny + 1, nx + 1)
    i, j = np.meshgrid(np.arange(nx), np.arange(ny))
    i, j = i.ravel(), j.ravel()
    c00, c10, c11, c01 = cid[j, i], cid[j, i + 1], cid[j + 1, i + 1], cid[j + 1, i]
    hid = vid = None
    if kind == "quad8":
        off = cid.size
        xm = 0.5 * (xs[:-1] + xs[1:])
        ym = 0.5 * (ys[:-1] + ys[1:])
        HX, HY = np.meshgrid(xm, ys)  # mids of horizontal edges, (ny+1, nx)
        hid = off + np.arange(HX.size).reshape(ny + 1, nx)
        off += HX.size
        VX, VY = np.meshgrid(xs, ym)  # mids of vertical edges, (ny, nx+1)
        vid = off + np.arange(VX.size).reshape(ny, nx + 1)
        coords += [np.stack([HX.ravel(), HY.ravel()], 1), np.stack([VX.ravel(), VY.ravel()], 1)]
        elements = np.stack(
            [c00, c10, c11, c01, hid[j, i], vid[j, i + 1], hid[j + 1, i], vid[j, i]], axis=1
        )
    elif kind == "quad4":
        elements = np.stack([c00, c10, c11, c01], axis=1)
    else:
        tri = np.empty((2 * len(c00), 3), dtype=np.int64)
        tri[0::2] = np.stack([c00, c10, c11], axis=1)
        tri[1::2] = np.stack([c00, c11, c01], axis=1)
        elements = tri
    nodes = np.concatenate(coords, axis=0)

    def side(ids_corner, ids_mid, reverse):
        a, b = ids_corner[:-1], ids_corner[1:]
        if reverse:
            a, b = b, a
        if ids_mid is None:
            return np.stack([a, b], axis=1)
        return np.stack([a, b, ids_mid], axis=1)

    # facets oriented counter-clockwise around the domain
    facets = {
        "bottom": side(cid[0, :], None if hid is None else hid[0, :], False),
        "right": side(cid[:, -1], None if vid is None else vid[:, -1], False),
        "top": side(cid[-1, :], None if hid is None else hid[-1, :], True),
        "left": side(cid[:, 0], None if vid is None else vid[:, 0], True),
    }
    node_sets = {k: np.unique(v) for k, v in facets.items()}
    return Mesh(nodes, elements, kind, node_sets, {"all": np.arange(len(elements))}, facets)


def _structured_hex(axes) -> Mesh:
    xs, ys, zs = axes
    nx, ny, nz = len(xs) - 1, len(ys) - 1, len(zs) - 1
    Z, Y, X = np.meshgrid(zs, ys, xs, indexing="ij")
    nodes = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
    nid = np.arange(nodes.shape[0]).reshape(nz + 1, ny + 1, nx + 1)
    k, j, i = np.meshgrid(np.arange(nz), np.arange(ny), np.arange(nx), indexing="ij")
    k, j, i = k.ravel(), j.ravel(), i.ravel()
    elements = np.stack(
        [
            nid[k, j, i], nid[k, j, i + 1], nid[k, j + 1, i + 1], nid[k, j + 1, i],
            nid[k + 1, j, i], nid[k + 1, j, i + 1], nid[k + 1, j + 1, i + 1], nid[k + 1, j + 1, i],
        ],
        axis=1,
    )

    def faces(grid):
        a, b = grid[:-1, :-1], grid[:-1, 1:]
        c, d = grid[1:, 1:], grid[1:, :-1]
        return np.stack([a.ravel(), b.ravel(), c.ravel(), d.ravel()], axis=1)

    facets = {
        "left": faces(nid[:, :, 0]),
        "right": faces(nid[:, :, -1]),
        "bottom": faces(nid[:, 0, :]),
        "top": faces(nid[:, -1, :]),
        "front": faces(nid[0, :, :]),
        "back": faces(nid[-1, :, :]),
    }
    node_sets = {k: np.unique(v) for k, v in facets.items()}
    return Mesh(nodes, elements, "hex8", node_sets, {"all": np.arange(len(elements))}, facets)
