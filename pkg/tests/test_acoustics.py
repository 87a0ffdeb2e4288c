"""
声学模块测试
Acoustics module tests.
"""

from __future__ import annotations

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from QuboSculpt.acoustics import (
    Microphone,
    Monopole,
    Ray,
    build_partial_loss_table,
    ensure_source_outside,
    partial_loss,
    ray_hits_microphone,
    ray_triangle_intersect,
    reflect,
    sample_rays,
    shade_partial_loss,
    simplex_losses,
    total_loss,
    trace_rays,
)
from QuboSculpt.kernel.errors import AcousticsError
from QuboSculpt.kernel.seeding import SeedStream
from QuboSculpt.optimizer.mutation import MutationSet, random_displacements

# 位于 x=1 平面、正对声源的小三角形
FACING = np.array([[1.0, -0.1, -0.1], [1.0, 0.1, -0.1], [1.0, 0.0, 0.1]])
# 位于 x=−1 平面、背对声源
AWAY = np.array([[-1.0, 0.0, 0.0], [-1.0, 0.0, 1.0], [-1.0, 1.0, 0.0]])


def test_reflection_law():
    rng = np.random.default_rng(0)
    d = rng.normal(size=(10_000, 3))
    d /= np.linalg.norm(d, axis=1)[:, None]
    n = rng.normal(size=(10_000, 3))
    n /= np.linalg.norm(n, axis=1)[:, None]

    r = reflect(d, n)

    np.testing.assert_allclose(np.linalg.norm(r, axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(
        np.einsum("ij,ij->i", r, n), -np.einsum("ij,ij->i", d, n), atol=1e-12
    )
    # r − d 平行于法向
    np.testing.assert_allclose(np.cross(r - d, n), 0.0, atol=1e-12)


def test_ray_triangle_intersection():
    triangle = [[-1.0, -1.0, 0.0], [1.0, -1.0, 0.0], [0.0, 1.0, 0.0]]
    up = Ray(origin=(0.0, 0.0, -1.0), direction=(0.0, 0.0, 1.0))

    t, point = ray_triangle_intersect(up, triangle)
    assert t == pytest.approx(1.0)
    np.testing.assert_allclose(point, [0.0, 0.0, 0.0], atol=1e-15)

    # 背后、平行与偏离三角形
    down = Ray(origin=(0.0, 0.0, -1.0), direction=(0.0, 0.0, -1.0))
    assert ray_triangle_intersect(down, triangle) is None
    parallel = Ray(origin=(0.0, 0.0, -1.0), direction=(1.0, 0.0, 0.0))
    assert ray_triangle_intersect(parallel, triangle) is None
    aside = Ray(origin=(5.0, 0.0, -1.0), direction=(0.0, 0.0, 1.0))
    assert ray_triangle_intersect(aside, triangle) is None

    far = Ray(origin=(0.0, 0.0, -5.0), direction=(0.0, 0.0, 1.0))
    t, point = ray_triangle_intersect(far, triangle)
    assert t == pytest.approx(5.0)
    np.testing.assert_allclose(point, [0.0, 0.0, 0.0], atol=1e-15)


def _solve_intersection(origin, direction, triangle):
    """以线性方程组求 (t, u, v) / Solve o + t·d = a + u·e1 + v·e2 for (t, u, v)."""
    a, b, c = triangle
    system = np.column_stack([direction, a - b, a - c])
    return np.linalg.solve(system, a - origin)


def test_ray_triangle_intersection_agrees_with_linear_solve():
    rng = np.random.default_rng(21)
    checked = hits = 0
    while checked < 1000:
        triangle = rng.uniform(-1.0, 1.0, (3, 3))
        origin = rng.uniform(-3.0, 3.0, 3)
        target = triangle.mean(axis=0) + rng.normal(scale=0.6, size=3)
        direction = target - origin
        direction /= np.linalg.norm(direction)
        system = np.column_stack([direction, *(triangle[0] - triangle[1:])])
        if abs(np.linalg.det(system)) < 1e-6:
            continue
        t, u, v = _solve_intersection(origin, direction, triangle)
        margins = np.array([u, v, 1.0 - u - v, t])
        # 边界附近两种算法的舍入可能不同
        if np.min(np.abs(margins)) < 1e-7:
            continue
        checked += 1

        expected = t > 0 and u > 0 and v > 0 and u + v < 1
        found = ray_triangle_intersect(Ray(origin, direction), triangle)
        assert (found is not None) == expected
        if expected:
            hits += 1
            assert found[0] == pytest.approx(t, rel=1e-9, abs=1e-9)
            np.testing.assert_allclose(found[1], origin + t * direction, atol=1e-9)
    assert 100 < hits < 900


def test_ray_through_edge_counts_as_hit():
    triangle = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]
    ray = Ray(origin=(0.5, 0.0, 1.0), direction=(0.0, 0.0, -1.0))
    assert ray_triangle_intersect(ray, triangle) is not None


def test_microphone_hits(mic):
    assert ray_hits_microphone(Ray((1.0, 0.0, 0.0), (1.0, 0.0, 0.0)), mic)
    # 麦克风在声线后方
    assert not ray_hits_microphone(Ray((1.0, 0.0, 0.0), (-1.0, 0.0, 0.0)), mic)
    # 平行于麦克风平面
    assert not ray_hits_microphone(Ray((1.0, 0.0, 0.0), (0.0, 1.0, 0.0)), mic)
    # 越过 u 方向边界
    assert not ray_hits_microphone(Ray.toward((1.0, 0.0, 0.0), (2.0, 2.5, 0.0)), mic)
    assert ray_hits_microphone(Ray.toward((1.0, 0.0, 0.0), (2.0, 1.9, 1.1)), mic)
    assert ray_hits_microphone(Ray((0.0, 0.0, 0.0), (1.0, 0.0, 0.0)), mic)
    # α_u = 1.5
    assert not ray_hits_microphone(Ray((0.0, 3.0, 0.0), (1.0, 0.0, 0.0)), mic)


def test_microphone_axes_must_be_orthogonal():
    with pytest.raises(AcousticsError, match="orthogonal"):
        Microphone(center=(0, 0, 0), half_axis_u=(1, 0, 0), half_axis_v=(1, 1, 0))
    with pytest.raises(AcousticsError, match="3-vector"):
        Monopole(position=(1.0, 2.0))


def test_sample_rays_hit_their_triangle(monopole):
    rays = sample_rays(monopole, FACING, 200, np.random.default_rng(3))
    assert len(rays) == 200
    for ray in rays:
        assert np.linalg.norm(ray.direction) == pytest.approx(1.0)
        assert ray_triangle_intersect(ray, FACING) is not None


def test_sample_rays_empty_and_uniform(monopole):
    assert sample_rays(monopole, FACING, 0, np.random.default_rng(0)) == []

    rays = sample_rays(monopole, FACING, 100_000, np.random.default_rng(4))
    origins = np.array([r.origin for r in rays])
    directions = np.array([r.direction for r in rays])
    # 声线与 x=1 平面的交点即采样点
    points = origins + ((1.0 - origins[:, 0]) / directions[:, 0])[:, None] * directions
    centroid = FACING.mean(axis=0)
    span = np.ptp(FACING, axis=0).max()
    np.testing.assert_allclose(points.mean(axis=0), centroid, atol=0.01 * span)


def test_partial_loss_reflects_straight_back(monopole, mic):
    rng = np.random.default_rng(1)
    assert partial_loss(FACING, monopole, mic, 100, rng) == 1.0


def test_partial_loss_is_zero_facing_away(monopole, mic):
    rng = np.random.default_rng(1)
    assert partial_loss(AWAY, monopole, mic, 100, rng) == 0.0


def test_partial_loss_is_zero_with_mic_behind(monopole):
    behind = Microphone(
        center=(-3.0, 0.0, 0.0),
        half_axis_u=(0.0, 2.0, 0.0),
        half_axis_v=(0.0, 0.0, 1.15),
    )
    rng = np.random.default_rng(1)
    assert partial_loss(FACING, monopole, behind, 100, rng) == 0.0


def test_partial_loss_degenerate_and_invalid(monopole, mic):
    rng = np.random.default_rng(1)
    flat = np.array([[1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [1.0, 2.0, 0.0]])
    assert partial_loss(flat, monopole, mic, 10, rng) == 0.0
    with pytest.raises(AcousticsError):
        partial_loss(FACING, monopole, mic, 0, rng)


def test_partial_loss_is_rotation_invariant(sphere, monopole, mic):
    n_rays = 200
    rng = np.random.default_rng(13)
    for _ in range(3):
        rot = Rotation.from_rotvec(rng.normal(size=3)).as_matrix()
        turned_source = Monopole(rot @ monopole.position)
        turned_mic = Microphone(
            rot @ mic.center, rot @ mic.half_axis_u, rot @ mic.half_axis_v
        )
        for sid in range(sphere.n_simplices):
            triangle = sphere.triangle(sid)
            plain = partial_loss(
                triangle, monopole, mic, n_rays, np.random.default_rng(sid)
            )
            turned = partial_loss(
                triangle @ rot.T,
                turned_source,
                turned_mic,
                n_rays,
                np.random.default_rng(sid),
            )
            assert abs(plain - turned) <= 2.0 / n_rays


def test_source_must_be_outside_the_mesh(sphere, monopole):
    ensure_source_outside(sphere, monopole)
    with pytest.raises(AcousticsError, match="not strictly outside"):
        ensure_source_outside(sphere, Monopole((0.0, 0.0, 0.0)))
    with pytest.raises(AcousticsError, match="not strictly outside"):
        ensure_source_outside(sphere, Monopole((0.3, 0.1, -0.1)))


def test_initial_sphere_has_positive_loss(sphere, monopole, mic):
    loss = total_loss(sphere, monopole, mic, 50, SeedStream(0).child(3))
    assert loss > 0.0
    assert loss <= sphere.n_simplices


def test_total_loss_is_reproducible(sphere, monopole, mic):
    stream = SeedStream(11)
    assert total_loss(sphere, monopole, mic, 20, stream) == total_loss(
        sphere, monopole, mic, 20, stream
    )


def test_identity_table_matches_simplex_losses(sphere, monopole, mic):
    stream = SeedStream(5).child(2, 1)
    table = build_partial_loss_table(
        sphere, MutationSet.identity(sphere.n_vertices), monopole, mic, 30, stream
    )
    losses = simplex_losses(sphere, monopole, mic, 30, stream)

    assert table.values.shape == (sphere.n_simplices, 1, 1, 1)
    np.testing.assert_array_equal(table.values[:, 0, 0, 0], losses)


def test_loss_table_is_independent_of_workers(sphere, monopole, mic):
    rng = np.random.default_rng(9)
    radii = np.full(sphere.n_vertices, 0.05)
    mutations = MutationSet(random_displacements(radii, 2, rng), radii)
    stream = SeedStream(9).child(2, 1)

    serial = build_partial_loss_table(
        sphere, mutations, monopole, mic, 10, stream, workers=1
    )
    parallel = build_partial_loss_table(
        sphere, mutations, monopole, mic, 10, stream, workers=4
    )

    assert serial.values.shape == (sphere.n_simplices, 2, 2, 2)
    np.testing.assert_array_equal(serial.values, parallel.values)
    assert serial.values.min() >= 0.0 and serial.values.max() <= 1.0


def test_loss_table_rejects_wrong_vertex_count(sphere, monopole, mic):
    with pytest.raises(AcousticsError, match="covers"):
        build_partial_loss_table(
            sphere, MutationSet.identity(3), monopole, mic, 10, SeedStream(0)
        )


def test_shading_is_normalized(sphere, monopole, mic):
    rows = shade_partial_loss(sphere, monopole, mic, 20, SeedStream(0))
    assert [r.simplex_id for r in rows] == list(range(sphere.n_simplices))
    assert max(r.normalized_loss for r in rows) == 1.0
    assert all(0.0 <= r.normalized_loss <= 1.0 for r in rows)


def test_shading_all_zero(sphere, monopole, silent_mic):
    rows = shade_partial_loss(sphere, monopole, silent_mic, 5, SeedStream(0))
    assert all(r.loss == 0.0 and r.normalized_loss == 0.0 for r in rows)


def test_shadow_test_only_removes_hits(sphere, monopole, mic):
    stream = SeedStream(4)
    plain = simplex_losses(sphere, monopole, mic, 20, stream)
    shadowed = simplex_losses(sphere, monopole, mic, 20, stream, shadow_test=True)
    assert np.all(shadowed <= plain)


def test_trace_rays(sphere, monopole, mic):
    stream = SeedStream(0).child(5)
    records = trace_rays(sphere, monopole, mic, 50, stream)

    assert [r.ray_id for r in records] == list(range(50))
    centroids = sphere.triangles().mean(axis=1)
    for r in records:
        lit = sphere.normals[r.simplex_id] @ (monopole.position - centroids[r.simplex_id])
        assert lit > 0
        assert np.linalg.norm(r.direction) == pytest.approx(1.0)
    assert records == trace_rays(sphere, monopole, mic, 50, stream)
