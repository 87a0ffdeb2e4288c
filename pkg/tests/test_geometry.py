"""
几何模块测试
Geometry module tests.
"""

from __future__ import annotations

import itertools

import numpy as np
import pytest
from conftest import TETRA_FACES, tetrahedron_points

from QuboSculpt.geometry import (
    Mesh,
    apply_configuration,
    build_mesh,
    compute_normals,
    export_mesh,
    generate_sphere_mesh,
    load_mesh,
    triangulate,
    winding_number,
)
from QuboSculpt.kernel.errors import MeshError, MeshNotClosedError
from QuboSculpt.optimizer.mutation import MutationSet


@pytest.mark.parametrize(
    ("n_theta", "n_phi", "counts"),
    [
        (3, 3, (5, 9, 6)),
        (4, 8, (18, 48, 32)),
        (6, 8, (34, 96, 64)),
    ],
)
def test_lattice_counts(n_theta, n_phi, counts):
    mesh = generate_sphere_mesh(n_theta, n_phi)
    assert (mesh.n_vertices, mesh.n_edges, mesh.n_simplices) == counts


@pytest.mark.parametrize(("n_theta", "n_phi"), [(3, 4), (4, 8), (5, 8), (8, 12)])
def test_sphere_is_closed_genus_zero(n_theta, n_phi):
    mesh = generate_sphere_mesh(n_theta, n_phi)
    assert mesh.is_closed
    assert mesh.euler_characteristic == 2
    assert 2 * mesh.n_edges == 3 * mesh.n_simplices
    assert mesh.edges.flags.writeable is False


def test_sphere_normals_point_outward(sphere):
    centroids = sphere.triangles().mean(axis=1)
    assert np.all(np.einsum("ij,ij->i", sphere.normals, centroids) > 0)
    np.testing.assert_allclose(np.linalg.norm(sphere.normals, axis=1), 1.0)


def test_winding_matches_normals(sphere):
    tri = sphere.triangles()
    cross = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    assert np.all(np.einsum("ij,ij->i", cross, sphere.normals) > 0)


@pytest.mark.parametrize(("n_theta", "n_phi"), [(2, 8), (5, 2)])
def test_lattice_too_small(n_theta, n_phi):
    with pytest.raises(MeshError, match="lattice"):
        generate_sphere_mesh(n_theta, n_phi)


def _brute_force_hull(points: np.ndarray) -> set[frozenset[int]]:
    """每个其余点都在同一侧的三元组即为凸包面 / Triples with all points on one side."""
    triples = np.array(list(itertools.combinations(range(len(points)), 3)))
    a, b, c = (points[triples[:, i]] for i in range(3))
    normals = np.cross(b - a, c - a)
    side = np.einsum("tnk,tk->tn", points[None, :, :] - a[:, None, :], normals)
    side[np.arange(len(triples))[:, None], triples] = 0.0
    on_hull = np.all(side <= 1e-12, axis=1) | np.all(side >= -1e-12, axis=1)
    return {frozenset(t) for t in triples[on_hull].tolist()}


def _edge_counts(simplices) -> dict[frozenset[int], int]:
    counts: dict[frozenset[int], int] = {}
    for s in simplices:
        for edge in itertools.combinations(s.vertex_indices, 2):
            counts[frozenset(edge)] = counts.get(frozenset(edge), 0) + 1
    return counts


def test_triangulate_matches_brute_force_hull():
    rng = np.random.default_rng(7)
    for _ in range(100):
        n = int(rng.integers(4, 51))
        points = rng.normal(size=(n, 3))
        points /= np.linalg.norm(points, axis=1)[:, None]

        simplices = triangulate(points)
        faces = {frozenset(s.vertex_indices) for s in simplices}
        assert faces == _brute_force_hull(points)
        # 球面点全部在凸包上：V − E + S = 2
        edges = _edge_counts(simplices)
        assert n - len(edges) + len(simplices) == 2
        for s in simplices:
            centroid = points[list(s.vertex_indices)].mean(axis=0)
            assert np.dot(s.outward_normal, centroid) > 0


def test_triangulate_platonic_solids():
    tetra = tetrahedron_points()
    tetra /= np.linalg.norm(tetra, axis=1)[:, None]
    simplices = triangulate(tetra)
    assert len(simplices) == 4
    assert set(_edge_counts(simplices).values()) == {2}

    octa = np.concatenate([np.eye(3), -np.eye(3)])
    simplices = triangulate(octa)
    edges = _edge_counts(simplices)
    assert len(simplices) == 8
    assert len(edges) == 12
    assert set(edges.values()) == {2}


def test_triangulate_rejects_points_off_sphere():
    points = tetrahedron_points() * 3.0
    with pytest.raises(MeshError, match="unit sphere"):
        triangulate(points)


def test_triangulate_rejects_coplanar_points():
    angles = np.linspace(0.0, 2.0 * np.pi, 6, endpoint=False)
    points = np.stack([np.cos(angles), np.sin(angles), np.zeros(6)], axis=1)
    with pytest.raises(MeshError, match="coplanar"):
        triangulate(points)


@pytest.mark.parametrize("reorient", [True, False])
def test_compute_normals_is_idempotent(sphere, reorient):
    once = compute_normals(sphere, reorient=reorient)
    twice = compute_normals(once, reorient=reorient)

    np.testing.assert_array_equal(twice.simplices, once.simplices)
    np.testing.assert_array_equal(twice.normals, once.normals)
    np.testing.assert_array_equal(once.simplices, sphere.simplices)


def test_symmetric_face_normal():
    points = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-1.0, -1.0, -1.0]]
    mesh = build_mesh(points, TETRA_FACES)
    sid = next(
        i for i, s in enumerate(mesh.simplices.tolist()) if sorted(s) == [0, 1, 2]
    )
    np.testing.assert_allclose(mesh.normals[sid], np.ones(3) / np.sqrt(3.0), atol=1e-12)


def test_winding_number_separates_inside_from_outside(sphere, tetrahedron):
    assert winding_number(sphere, (0.0, 0.0, 0.0)) == pytest.approx(1.0, abs=1e-9)
    assert winding_number(sphere, (0.3, -0.2, 0.1)) == pytest.approx(1.0, abs=1e-9)
    assert winding_number(sphere, (2.5, 0.0, 0.0)) == pytest.approx(0.0, abs=1e-9)
    assert winding_number(tetrahedron, (0.0, 0.0, 0.0)) == pytest.approx(1.0, abs=1e-9)

    # 单元中心两侧各偏移一点
    centroid = sphere.triangle(0).mean(axis=0)
    normal = sphere.normals[0]
    assert winding_number(sphere, centroid + 1e-3 * normal) == pytest.approx(
        0.0, abs=1e-6
    )
    assert winding_number(sphere, centroid - 1e-3 * normal) == pytest.approx(
        1.0, abs=1e-6
    )


def test_open_mesh_is_rejected():
    with pytest.raises(MeshNotClosedError) as excinfo:
        build_mesh(tetrahedron_points(), TETRA_FACES[:3])
    assert all(count == 1 for count in excinfo.value.edges.values())


def test_repeated_vertex_is_rejected():
    with pytest.raises(MeshError, match="repeats"):
        build_mesh(tetrahedron_points(), [[0, 0, 1], [0, 1, 2], [0, 2, 3], [1, 2, 3]])


def test_neighbors(octahedron):
    np.testing.assert_array_equal(octahedron.neighbors(0), [2, 3, 4, 5])
    np.testing.assert_array_equal(octahedron.neighbors(4), [0, 1, 2, 3])


def test_wavefront_round_trip(tmp_path, sphere):
    path = export_mesh(sphere, str(tmp_path / "snap" / "iter_1.obj"))
    loaded = load_mesh(path)

    np.testing.assert_array_equal(loaded.vertices, sphere.vertices)
    np.testing.assert_array_equal(loaded.simplices, sphere.simplices)
    np.testing.assert_allclose(loaded.normals, sphere.normals, atol=1e-15)


def test_export_refuses_empty_mesh(tmp_path):
    empty = Mesh(vertices=np.zeros((0, 3)), simplices=np.zeros((0, 3)))
    target = tmp_path / "empty.obj"
    with pytest.raises(MeshError, match="empty"):
        export_mesh(empty, str(target))
    assert not target.exists()


def test_load_mesh_errors(tmp_path):
    with pytest.raises(MeshError, match="cannot read"):
        load_mesh(str(tmp_path / "missing.obj"))

    quad = tmp_path / "quad.obj"
    quad.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
    with pytest.raises(MeshError, match="triangular"):
        load_mesh(str(quad))


def test_apply_configuration_moves_chosen_displacement(tetrahedron):
    displacements = np.zeros((4, 2, 3))
    displacements[2, 1] = [0.01, -0.02, 0.03]
    mutations = MutationSet(displacements, np.full(4, 0.1))

    moved = apply_configuration(tetrahedron, mutations, [1, 1, 2, 1])

    expected = np.array(tetrahedron.vertices)
    expected[2] += [0.01, -0.02, 0.03]
    np.testing.assert_array_equal(moved.vertices, expected)
    np.testing.assert_array_equal(moved.simplices, tetrahedron.simplices)
    assert moved.is_closed
    # 原网格不变
    assert tetrahedron.vertices.flags.writeable is False
    np.testing.assert_array_equal(tetrahedron.vertices, tetrahedron_points())


def test_apply_configuration_rejects_bad_index(tetrahedron):
    mutations = MutationSet.identity(4, k=2)
    with pytest.raises(MeshError, match="v3"):
        apply_configuration(tetrahedron, mutations, [1, 2, 3, 1])
    with pytest.raises(MeshError, match="covers"):
        apply_configuration(tetrahedron, mutations, [1, 1, 1])


def test_negated_configuration_restores_vertices(sphere):
    rng = np.random.default_rng(11)
    displacements = rng.uniform(-0.05, 0.05, (sphere.n_vertices, 3, 3))
    chosen = rng.integers(1, 4, sphere.n_vertices)
    radii = np.full(sphere.n_vertices, 0.1)

    moved = apply_configuration(sphere, MutationSet(displacements, radii), chosen)
    back = apply_configuration(moved, MutationSet(-displacements, radii), chosen)

    np.testing.assert_allclose(back.vertices, sphere.vertices, rtol=0.0, atol=1e-12)
    np.testing.assert_allclose(back.normals, sphere.normals, atol=1e-9)


def test_apply_configuration_only_moves_displaced_vertices(sphere):
    displacements = np.zeros((sphere.n_vertices, 2, 3))
    displacements[[3, 7], 1] = [0.02, 0.0, -0.01]
    mutations = MutationSet(displacements, np.full(sphere.n_vertices, 0.1))
    chosen = np.full(sphere.n_vertices, 2)

    moved = apply_configuration(sphere, mutations, chosen)

    changed = np.flatnonzero(np.any(moved.vertices != sphere.vertices, axis=1))
    assert changed.tolist() == [3, 7]
    touched = np.any(np.isin(sphere.simplices, [3, 7]), axis=1)
    np.testing.assert_allclose(
        moved.normals[~touched], sphere.normals[~touched], rtol=0.0, atol=1e-15
    )
    assert np.all(np.any(moved.normals[touched] != sphere.normals[touched], axis=1))
    np.testing.assert_allclose(np.linalg.norm(moved.normals, axis=1), 1.0, atol=1e-9)


def test_zero_displacements_leave_mesh_unchanged(sphere):
    mutations = MutationSet.identity(sphere.n_vertices, k=3)
    moved = apply_configuration(sphere, mutations, np.full(sphere.n_vertices, 3))
    np.testing.assert_array_equal(moved.vertices, sphere.vertices)
    np.testing.assert_allclose(moved.normals, sphere.normals, rtol=0.0, atol=1e-15)
