import math

import numpy as np
import pytest

from biharm.mesh import (
    DegenerateElementError,
    Mesh,
    MeshError,
    MeshParseError,
    check_mesh,
    read_mesh,
    refine_uniform,
    shape_regularity,
    unit_square_mesh,
    write_mesh,
)


@pytest.mark.parametrize("n, nv, nt, nbe", [(1, 4, 2, 4), (2, 9, 8, 8), (5, 36, 50, 20)])
@pytest.mark.parametrize("diagonal", ["left", "right"])
def test_unit_square_counts(n, nv, nt, nbe, diagonal):
    m = unit_square_mesh(n, diagonal)
    assert (m.n_vertices, m.n_triangles, len(m.boundary_edges)) == (nv, nt, nbe)
    assert m.h_max == pytest.approx(math.sqrt(2) / n, rel=1e-14)
    check_mesh(m, area=1.0)


def test_unit_square_rejects_zero():
    with pytest.raises(ValueError):
        unit_square_mesh(0)
    with pytest.raises(ValueError):
        unit_square_mesh(2, "up")


def test_normals_outward_and_unit():
    m = unit_square_mesh(3)
    mid = m.vertices[m.boundary_edges].mean(axis=1)
    # on the unit square the outward normal is known from the side
    expected = np.zeros_like(mid)
    expected[np.isclose(mid[:, 0], 0), 0] = -1
    expected[np.isclose(mid[:, 0], 1), 0] = 1
    expected[np.isclose(mid[:, 1], 0), 1] = -1
    expected[np.isclose(mid[:, 1], 1), 1] = 1
    assert np.allclose(m.boundary_normals, expected, atol=1e-15)
    assert m.boundary_length == pytest.approx(4.0)


def test_refine_two_triangles():
    m = unit_square_mesh(1)
    r = refine_uniform(m)
    assert r.n_triangles == 8
    assert len(r.boundary_edges) == 8
    assert r.h_max == pytest.approx(m.h_max / 2, rel=1e-14)
    assert r.area == pytest.approx(m.area, rel=1e-12)
    check_mesh(r, area=1.0)


def test_refinement_sequence_invariants():
    m = unit_square_mesh(2, "left")
    sr = shape_regularity(m)
    lengths = m.boundary_edge_lengths
    ratio0 = lengths.max() / lengths.min()
    for _ in range(3):
        m = refine_uniform(m)
        check_mesh(m, area=1.0)
        assert shape_regularity(m) == pytest.approx(sr, rel=1e-12)
        edge_len = np.linalg.norm(np.diff(m.vertices[m.edges], axis=1)[:, 0], axis=1)
        assert edge_len.max() / edge_len.min() <= ratio0 * math.sqrt(2) + 1e-12


def test_refined_matches_structured_counts():
    r = refine_uniform(unit_square_mesh(4))
    s = unit_square_mesh(8)
    assert (r.n_vertices, r.n_triangles, len(r.boundary_edges)) == (s.n_vertices, s.n_triangles, 32)


def test_shape_regularity_examples():
    h = math.sqrt(3) / 2
    eq = Mesh.from_arrays([[0, 0], [1, 0], [0.5, h]], [[0, 1, 2]])
    assert shape_regularity(eq) == pytest.approx(2 * math.sqrt(3), rel=1e-12)
    right = Mesh.from_arrays([[0, 0], [1, 0], [0, 1]], [[0, 1, 2]])
    assert shape_regularity(right) == pytest.approx(math.sqrt(2) / (1 - math.sqrt(2) / 2), rel=1e-12)


def test_clockwise_and_degenerate_rejected():
    with pytest.raises(DegenerateElementError):
        Mesh.from_arrays([[0, 0], [0, 1], [1, 0]], [[0, 1, 2]])
    with pytest.raises(DegenerateElementError):
        Mesh.from_arrays([[0, 0], [1, 0], [2, 0]], [[0, 1, 2]])


def test_non_manifold_rejected():
    verts = [[0, 0], [1, 0], [0.5, 1], [0.5, -1], [0.6, 2]]
    with pytest.raises(MeshError):
        Mesh.from_arrays(verts, [[0, 1, 2], [0, 3, 1], [1, 4, 0]])


def test_partial_boundary_marking():
    m = Mesh.from_arrays([[0, 0], [1, 0], [0, 1]], [[0, 1, 2]], boundary_edges=[[1, 0]])
    assert m.boundary_edges.tolist() == [[0, 1]]
    assert np.allclose(m.boundary_normals, [[0, -1]])
    with pytest.raises(MeshError):
        Mesh.from_arrays([[0, 0], [1, 0], [0, 1], [1, 1]], [[0, 1, 2], [1, 3, 2]], boundary_edges=[[1, 2]])


def test_mesh_round_trip(tmp_path):
    m = refine_uniform(unit_square_mesh(2, "left"))
    path = tmp_path / "m.txt"
    write_mesh(m, path)
    r = read_mesh(path)
    assert np.array_equal(r.vertices, m.vertices)
    assert r.same_as(m)


def test_irrational_coordinates_round_trip(tmp_path):
    rot = np.array([[math.cos(0.3), -math.sin(0.3)], [math.sin(0.3), math.cos(0.3)]])
    m = unit_square_mesh(3)
    m = Mesh.from_arrays(m.vertices @ rot.T / 7.0, m.triangles)
    write_mesh(m, tmp_path / "m.txt")
    assert read_mesh(tmp_path / "m.txt").same_as(m)


def test_truncated_file_names_line(tmp_path):
    path = tmp_path / "m.txt"
    write_mesh(unit_square_mesh(2), path)
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:12]) + "\n")
    with pytest.raises(MeshParseError, match="line 13"):
        read_mesh(path)


def test_garbage_line_named(tmp_path):
    path = tmp_path / "m.txt"
    write_mesh(unit_square_mesh(1), path)
    lines = path.read_text().splitlines()
    lines[2] = "1.0 oops"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(MeshParseError) as info:
        read_mesh(path)
    assert info.value.lineno == 3


def test_repeated_triangle_rejected(tmp_path):
    path = tmp_path / "m.txt"
    path.write_text("3 2 0\n0 0\n1 0\n0 1\n0 1 2\n1 2 0\n")
    with pytest.raises(MeshError, match="repeated triangle"):
        read_mesh(path)
