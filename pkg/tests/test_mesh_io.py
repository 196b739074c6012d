import numpy as np
import pytest

from phasefem.gmsh import MeshParseError, parse_mesh, read_mesh, write_mesh
from phasefem.mesh import DanglingReferenceError, InvertedElementError, generate_structured

ONE_QUAD = """$MeshFormat
2.2 0 8
$EndMeshFormat
$PhysicalNames
2
1 1 "bottom"
2 2 "body"
$EndPhysicalNames
$Nodes
4
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
$EndNodes
$Elements
2
1 3 2 2 2 1 2 3 4
2 1 2 1 1 1 2
$EndElements
$Sets
1
node corner 1 3
$EndSets
"""


def test_single_quad_file():
    m = parse_mesh(ONE_QUAD)
    assert m.kind == "quad4" and m.n_elements == 1 and m.n_nodes == 4
    assert list(m.node_sets["corner"]) == [2]
    assert m.facet_sets["bottom"].tolist() == [[0, 1]]
    assert list(m.element_sets["body"]) == [0]


def test_dangling_node_reference():
    text = ONE_QUAD.replace("1 3 2 2 2 1 2 3 4", "1 3 2 2 2 1 2 3 99")
    with pytest.raises(DanglingReferenceError):
        parse_mesh(text)


def test_collapsed_element_rejected():
    text = ONE_QUAD.replace("3 1 1 0", "3 1 0 0")
    with pytest.raises(InvertedElementError):
        parse_mesh(text)


@pytest.mark.parametrize(
    "mutate,line",
    [
        (lambda t: t.replace("2.2 0 8", "2.2 1 8"), 2),
        (lambda t: t.replace("1 0 0 0\n", "1 0 zero 0\n"), 11),
        (lambda t: t.replace("2 1 2 1 1 1 2", "2 77 2 1 1 1 2"), 19),
        (lambda t: t.replace("node corner 1 3", "node corner 2 3"), 23),
    ],
)
def test_parse_errors_carry_line(mutate, line):
    with pytest.raises(MeshParseError) as info:
        parse_mesh(mutate(ONE_QUAD))
    assert info.value.line == line


def test_missing_format_block():
    with pytest.raises(MeshParseError):
        parse_mesh(ONE_QUAD.split("$EndMeshFormat\n", 1)[1])


def test_unknown_block_is_skipped():
    m = parse_mesh(ONE_QUAD + "$Comments\nanything at all\n$EndComments\n")
    assert m.n_elements == 1


@pytest.mark.parametrize("kind,bounds,div", [
    ("quad4", [(0, 2), (0, 1)], [3, 2]),
    ("quad8", [(0, 2), (0, 1)], [2, 2]),
    ("tri3", [(0, 2), (0, 1)], [2, 2]),
    ("hex8", [(0, 1), (0, 1), (0, 1)], [2, 1, 2]),
])
def test_write_read_round_trip(tmp_path, kind, bounds, div):
    m = generate_structured(bounds, div, kind).with_sets(node_sets={"pin": [0]}, element_sets={"first": [0]})
    path = tmp_path / f"{kind}.msh"
    write_mesh(m, path)
    back = read_mesh(path)
    assert back.kind == kind
    assert np.array_equal(back.nodes, m.nodes)
    assert np.array_equal(back.elements, m.elements)
    assert sorted(back.facet_sets) == sorted(m.facet_sets)
    for k in m.facet_sets:
        assert np.array_equal(back.facet_sets[k], m.facet_sets[k])
    assert list(back.node_sets["pin"]) == [0]
    assert list(back.element_sets["first"]) == [0]
