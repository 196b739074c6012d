"""Reader and writer for the ASCII v2.2 mesh format with a ``$Sets`` block.

The grammar is documented in ``docs/mesh_format.md``. Only the element kind
with the highest dimension becomes solid elements; lower-dimensional elements
are read as boundary facets grouped by their first (physical) tag.
"""

from __future__ import annotations

import os
from typing import Dict, List, Tuple

import numpy as np

from .mesh import ELEMENT_KINDS, SOLID_KINDS, DanglingReferenceError, Mesh, MeshError

__all__ = ["MeshParseError", "read_mesh", "write_mesh"]

_BY_GMSH_TYPE = {k.gmsh_type: k.name for k in ELEMENT_KINDS.values()}


class MeshParseError(MeshError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class _Lines:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.pos = 0

    def next(self) -> Tuple[int, str]:
        while self.pos < len(self.lines):
            self.pos += 1
            s = self.lines[self.pos - 1].strip()
            if s:
                return self.pos, s
        raise MeshParseError("unexpected end of file", self.pos)

    def expect(self, token: str) -> None:
        no, s = self.next()
        if s != token:
            raise MeshParseError(f"expected {token}, found {s!r}", no)

    def count(self) -> int:
        no, s = self.next()
        try:
            n = int(s)
        except ValueError:
            raise MeshParseError(f"expected an integer count, found {s!r}", no) from None
        if n < 0:
            raise MeshParseError("negative count", no)
        return n


def _ints(s: str, no: int) -> List[int]:
    try:
        return [int(t) for t in s.split()]
    except ValueError:
        raise MeshParseError(f"expected integers, found {s!r}", no) from None


def read_mesh(path) -> Mesh:
    """Parse a mesh file; raises :class:`MeshParseError` with the line number."""
    with open(path, "r", encoding="ascii") as fh:
        return parse_mesh(fh.read())


def parse_mesh(text: str) -> Mesh:
    src = _Lines(text)
    names: Dict[int, str] = {}
    node_ids: List[int] = []
    coords: List[List[float]] = []
    raw_elements: List[Tuple[int, str, int, List[int], int]] = []
    raw_sets: List[Tuple[str, str, List[int], int]] = []
    seen_format = False
    while True:
        try:
            no, head = src.next()
        except MeshParseError:
            break
        if head == "$MeshFormat":
            no, s = src.next()
            parts = s.split()
            if len(parts) != 3 or parts[0] not in ("2.2", "2.1", "2"):
                raise MeshParseError(f"unsupported format header {s!r}", no)
            if parts[1] != "0":
                raise MeshParseError("binary files are not supported", no)
            src.expect("$EndMeshFormat")
            seen_format = True
        elif head == "$PhysicalNames":
            for _ in range(src.count()):
                no, s = src.next()
                parts = s.split(maxsplit=2)
                if len(parts) != 3:
                    raise MeshParseError(f"bad physical name entry {s!r}", no)
                names[int(parts[1])] = parts[2].strip('"')
            src.expect("$EndPhysicalNames")
        elif head == "$Nodes":
            for _ in range(src.count()):
                no, s = src.next()
                parts = s.split()
                if len(parts) != 4:
                    raise MeshParseError(f"node line needs 'id x y z', found {s!r}", no)
                try:
                    node_ids.append(int(parts[0]))
                    coords.append([float(v) for v in parts[1:]])
                except ValueError:
                    raise MeshParseError(f"bad node line {s!r}", no) from None
            src.expect("$EndNodes")
        elif head == "$Elements":
            for _ in range(src.count()):
                no, s = src.next()
                v = _ints(s, no)
                if len(v) < 3:
                    raise MeshParseError("element line too short", no)
                eid, etype, ntags = v[0], v[1], v[2]
                if etype not in _BY_GMSH_TYPE:
                    raise MeshParseError(f"unsupported element type {etype}", no)
                kind = _BY_GMSH_TYPE[etype]
                conn = v[3 + ntags:]
                if len(conn) != ELEMENT_KINDS[kind].n_nodes:
                    raise MeshParseError(
                        f"{kind} needs {ELEMENT_KINDS[kind].n_nodes} nodes, found {len(conn)}", no
                    )
                phys = v[3] if ntags > 0 else 0
                raw_elements.append((eid, kind, phys, conn, no))
            src.expect("$EndElements")
        elif head == "$Sets":
            for _ in range(src.count()):
                no, s = src.next()
                parts = s.split()
                if len(parts) < 3 or parts[0] not in ("node", "element"):
                    raise MeshParseError(f"set line needs 'node|element name count ids', found {s!r}", no)
                ids = _ints(" ".join(parts[2:]), no)
                if ids[0] != len(ids) - 1:
                    raise MeshParseError(f"set {parts[1]!r} declares {ids[0]} ids, found {len(ids) - 1}", no)
                raw_sets.append((parts[0], parts[1], ids[1:], no))
            src.expect("$EndSets")
        elif head.startswith("$"):
            end = "$End" + head[1:]
            while src.next()[1] != end:
                pass
        else:
            raise MeshParseError(f"unexpected content {head!r}", no)
    if not seen_format:
        raise MeshParseError("missing $MeshFormat block", 1)
    if not node_ids:
        raise MeshParseError("no nodes", src.pos)

    solid = [e for e in raw_elements if e[1] in SOLID_KINDS]
    if not solid:
        raise MeshParseError("no 2D/3D elements", src.pos)
    top_dim = max(ELEMENT_KINDS[e[1]].dim for e in solid)
    solid = [e for e in solid if ELEMENT_KINDS[e[1]].dim == top_dim]
    kinds = {e[1] for e in solid}
    if len(kinds) != 1:
        raise MeshParseError(f"mixed element kinds {sorted(kinds)} are not supported", solid[0][4])
    kind = kinds.pop()

    index = {nid: i for i, nid in enumerate(node_ids)}
    if len(index) != len(node_ids):
        raise MeshParseError("duplicate node ids", 1)

    def remap(conn, no, what):
        try:
            return [index[n] for n in conn]
        except KeyError as err:
            raise DanglingReferenceError(f"line {no}: {what} references missing node {err.args[0]}") from None

    elements = np.array([remap(e[3], e[4], f"element {e[0]}") for e in solid], dtype=np.int64)
    elem_index = {e[0]: i for i, e in enumerate(solid)}
    element_sets: Dict[str, list] = {}
    for i, e in enumerate(solid):
        if e[2]:
            element_sets.setdefault(names.get(e[2], f"physical_{e[2]}"), []).append(i)
    facet_kind = ELEMENT_KINDS[kind].facet
    facet_sets: Dict[str, list] = {}
    for e in raw_elements:
        if e[1] == facet_kind:
            key = names.get(e[2], f"physical_{e[2]}")
            facet_sets.setdefault(key, []).append(remap(e[3], e[4], f"facet {e[0]}"))
    node_sets: Dict[str, list] = {}
    for what, name, ids, no in raw_sets:
        if what == "node":
            node_sets[name] = remap(ids, no, f"node set {name!r}")
        else:
            missing = [i for i in ids if i not in elem_index]
            if missing:
                raise DanglingReferenceError(f"line {no}: element set {name!r} references missing element {missing[0]}")
            element_sets[name] = [elem_index[i] for i in ids]
    nodes = np.array(coords)[:, :top_dim]
    mesh = Mesh(
        nodes,
        elements,
        kind,
        node_sets,
        element_sets,
        {k: np.array(v, dtype=np.int64) for k, v in facet_sets.items()},
    )
    mesh.check_jacobians()
    return mesh


def write_mesh(mesh: Mesh, path) -> None:
    """Write ``mesh`` with 1-based ids; facet sets become tagged facets."""
    lines = ["$MeshFormat", "2.2 0 8", "$EndMeshFormat"]
    facet_names = sorted(mesh.facet_sets)
    if facet_names:
        fdim = ELEMENT_KINDS[mesh.facet_kind].dim
        lines.append("$PhysicalNames")
        lines.append(str(len(facet_names)))
        for tag, name in enumerate(facet_names, start=1):
            lines.append(f'{fdim} {tag} "{name}"')
        lines.append("$EndPhysicalNames")
    lines.append("$Nodes")
    lines.append(str(mesh.n_nodes))
    for i, x in enumerate(mesh.nodes):
        xyz = list(x) + [0.0] * (3 - len(x))
        lines.append(f"{i + 1} " + " ".join(repr(float(v)) for v in xyz))
    lines.append("$EndNodes")
    n_facets = sum(len(mesh.facet_sets[n]) for n in facet_names)
    lines.append("$Elements")
    lines.append(str(mesh.n_elements + n_facets))
    etype = ELEMENT_KINDS[mesh.kind].gmsh_type
    for i, conn in enumerate(mesh.elements):
        lines.append(f"{i + 1} {etype} 2 0 0 " + " ".join(str(n + 1) for n in conn))
    eid = mesh.n_elements
    if facet_names:
        ftype = ELEMENT_KINDS[mesh.facet_kind].gmsh_type
        for tag, name in enumerate(facet_names, start=1):
            for conn in mesh.facet_sets[name]:
                eid += 1
                lines.append(f"{eid} {ftype} 2 {tag} {tag} " + " ".join(str(n + 1) for n in conn))
    lines.append("$EndElements")
    sets = [("node", k, v) for k, v in sorted(mesh.node_sets.items())]
    sets += [("element", k, v) for k, v in sorted(mesh.element_sets.items())]
    if sets:
        lines.append("$Sets")
        lines.append(str(len(sets)))
        for what, name, ids in sets:
            lines.append(f"{what} {name} {len(ids)} " + " ".join(str(int(i) + 1) for i in ids))
        lines.append("$EndSets")
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)
