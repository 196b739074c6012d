import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from phasefem.mesh import (
    ELEMENT_KINDS,
    DanglingReferenceError,
    ElementGeometry,
    InvertedElementError,
    Mesh,
    MeshError,
    gauss_rule,
    generate_structured,
    graded_axis,
    map_gradients,
    shape_eval,
)

SOLID = ["tri3", "quad4", "quad8", "hex8"]


def random_interior(kind, rng, n):
    dim = ELEMENT_KINDS[kind].dim
    if kind == "tri3":
        a = rng.uniform(0, 1, (n, 2))
        flip = a.sum(axis=1) > 1
        a[flip] = 1 - a[flip]
        return a
    return rng.uniform(-1, 1, (n, dim))


@pytest.mark.parametrize(
    "bounds,div,kind,nn,ne",
    [
        ([(0, 1), (0, 1)], [2, 2], "quad4", 9, 4),
        ([(0, 1), (0, 1)], [1, 1], "quad8", 8, 1),
        ([(0, 1), (0, 1), (0, 1)], [2, 2, 2], "hex8", 27, 8),
        ([(0, 1), (0, 1)], [2, 2], "tri3", 9, 8),
    ],
)
def test_structured_counts(bounds, div, kind, nn, ne):
    m = generate_structured(bounds, div, kind)
    assert (m.n_nodes, m.n_elements) == (nn, ne)


def test_structured_boundary_sets():
    m = generate_structured([(0, 2), (0, 1)], [4, 2], "quad4")
    x, y = m.nodes.T
    assert np.allclose(x[m.nodes_in("left")], 0) and np.allclose(x[m.nodes_in("right")], 2)
    assert np.allclose(y[m.nodes_in("bottom")], 0) and np.allclose(y[m.nodes_in("top")], 1)
    m3 = generate_structured([(0, 1), (0, 1), (0, 3)], [1, 1, 3], "hex8")
    assert np.allclose(m3.nodes[m3.nodes_in("back"), 2], 3) or np.allclose(m3.nodes[m3.nodes_in("front"), 2], 3)


def test_structured_rejects_bad_input():
    with pytest.raises(MeshError):
        generate_structured([(0, 1), (0, 1)], [2, 2], "hex8")
    with pytest.raises(MeshError):
        generate_structured([(0, 0), (0, 1)], [2, 2], "quad4")


def test_graded_axis_hits_breaks():
    x = graded_axis([0.0, 0.1, 1.0], [0.01, 0.1])
    assert x[0] == 0.0 and x[-1] == 1.0
    assert np.any(np.isclose(x, 0.1))
    assert np.all(np.diff(x) > 0)
    assert np.diff(x).max() <= 0.1 + 1e-12


@pytest.mark.parametrize("kind,total", [("tri3", 0.5), ("quad4", 4.0), ("quad8", 4.0), ("hex8", 8.0)])
def test_quadrature_weights_sum_to_reference_volume(kind, total):
    assert abs(gauss_rule(kind).weights.sum() - total) < 1e-12


def test_default_rule_sizes():
    assert [gauss_rule(k).n_points for k in ("tri3", "quad4", "quad8", "hex8")] == [1, 4, 9, 8]


def test_quad4_shape_values():
    N, _ = shape_eval("quad4", np.zeros(2))
    assert np.allclose(N, 0.25)
    N, _ = shape_eval("quad4", np.array([-1.0, -1.0]))
    assert np.allclose(N, [1, 0, 0, 0])


def test_quad8_centre_values():
    N, _ = shape_eval("quad8", np.zeros(2))
    assert np.allclose(N[:4], -0.25) and np.allclose(N[4:], 0.5)


@pytest.mark.parametrize("kind", SOLID)
def test_partition_of_unity(kind, rng):
    pts = random_interior(kind, rng, 100)
    N, dN = shape_eval(kind, pts)
    assert np.abs(N.sum(axis=1) - 1).max() < 1e-12
    assert np.abs(dN.sum(axis=1)).max() < 1e-12


def test_mapping_examples():
    _, dN = shape_eval("quad4", np.zeros(2))
    unit = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], float)
    detj, _ = map_gradients(unit, dN)
    assert abs(detj - 0.25) < 1e-14
    side2 = 2 * unit - 1
    detj, dNdx = map_gradients(side2, dN)
    assert abs(detj - 1) < 1e-14 and np.allclose(dNdx, dN)
    th = 0.7
    R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    detj, _ = map_gradients(unit @ R.T, dN)
    assert abs(detj - 0.25) < 1e-14


def test_collapsed_element_is_inverted():
    nodes = np.array([[0, 0], [1, 0], [1, 0], [0, 1]], float)
    with pytest.raises(InvertedElementError):
        Mesh(nodes, [[0, 1, 2, 3]], "quad4").check_jacobians()


def test_clockwise_element_is_inverted():
    nodes = np.array([[0, 0], [0, 1], [1, 1], [1, 0]], float)
    with pytest.raises(InvertedElementError):
        ElementGeometry(Mesh(nodes, [[0, 1, 2, 3]], "quad4"))


def test_dangling_references():
    nodes = np.zeros((4, 2))
    with pytest.raises(DanglingReferenceError):
        Mesh(nodes, [[0, 1, 2, 9]], "quad4")
    ok = generate_structured([(0, 1), (0, 1)], [1, 1])
    with pytest.raises(DanglingReferenceError):
        ok.with_sets(node_sets={"bad": [7]})
    with pytest.raises(DanglingReferenceError):
        ok.with_sets(element_sets={"bad": [1]})


def _distorted(kind, rng):
    if kind == "hex8":
        m = generate_structured([(0, 1), (0, 2), (0, 1)], [3, 2, 2], "hex8")
    else:
        m = generate_structured([(0, 1), (0, 2)], [3, 2], kind)
    h = 0.08
    x = m.nodes + rng.uniform(-h, h, m.nodes.shape)
    x[np.isclose(m.nodes, 0) | np.isclose(m.nodes, m.nodes.max(axis=0))] = m.nodes[
        np.isclose(m.nodes, 0) | np.isclose(m.nodes, m.nodes.max(axis=0))]
    if kind == "quad8":
        # keep mid-side nodes at edge midpoints so edges stay straight
        corners = m.elements[:, :4]
        mids = m.elements[:, 4:]
        for e in range(m.n_elements):
            for k in range(4):
                x[mids[e, k]] = 0.5 * (x[corners[e, k]] + x[corners[e, (k + 1) % 4]])
    return Mesh(x, m.elements, kind), m


@pytest.mark.parametrize("kind", SOLID)
def test_volume_and_linear_reproduction(kind, rng):
    dist, m = _distorted(kind, rng)
    g = ElementGeometry(dist)
    box = np.prod(m.nodes.max(axis=0) - m.nodes.min(axis=0))
    assert abs(g.volume() - box) < 1e-10 * box
    a = rng.normal(size=dist.dim)
    f = dist.nodes @ a
    assert np.abs(g.interpolate(f) - g.x @ a).max() < 1e-12
    grad = g.gradient(f).reshape(-1, dist.dim)
    assert np.abs(grad - a).max() < 1e-10


@given(st.integers(1, 6), st.integers(1, 6), st.floats(0.1, 10), st.floats(0.1, 10), st.sampled_from(["quad4", "tri3", "quad8"]))
def test_generated_volume_property(nx, ny, lx, ly, kind):
    m = generate_structured([(0, lx), (0, ly)], [nx, ny], kind)
    assert abs(ElementGeometry(m).volume() - lx * ly) < 1e-10 * lx * ly
