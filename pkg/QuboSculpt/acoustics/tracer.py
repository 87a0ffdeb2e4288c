"""
声线追踪原语 - 采样、求交、反射与麦克风命中判定
Ray tracing primitives - sampling, intersection, reflection and microphone hits.

标量版本对应单条声线，_batch 版本对 (n, 3) 数组做向量化计算。
Scalar functions handle a single ray; the _batch variants vectorize over (n, 3) arrays.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from QuboSculpt.acoustics.scene import Microphone, Monopole, Ray, Vector
from QuboSculpt.geometry.mesh import AREA_TOLERANCE, Mesh
from QuboSculpt.kernel.errors import AcousticsError
from QuboSculpt.kernel.seeding import SeedStream

logger = logging.getLogger(__name__)

# 自交容差：反射点处 t 必须大于此值
HIT_EPSILON = 1e-9
BARYCENTRIC_TOLERANCE = 1e-12
PARALLEL_TOLERANCE = 1e-12


def triangle_normal(triangle: np.ndarray) -> tuple[np.ndarray, float]:
    """
    按绕向计算单位法向与面积
    Unit normal along the winding, and the area.
    """
    cross = np.cross(triangle[1] - triangle[0], triangle[2] - triangle[0])
    length = float(np.linalg.norm(cross))
    if length == 0.0:
        return np.zeros(3), 0.0
    return cross / length, 0.5 * length


def sample_triangle_points(
    triangle: np.ndarray, n: int, rng: np.random.Generator
) -> np.ndarray:
    """
    三角形上的均匀采样（重心坐标折叠法）
    Uniform samples on a triangle by folded barycentric coordinates.
    """
    uv = rng.random((n, 2))
    folded = uv.sum(axis=1) > 1.0
    uv[folded] = 1.0 - uv[folded]
    a, b, c = triangle
    return a + uv[:, :1] * (b - a) + uv[:, 1:] * (c - a)


def sample_rays(
    monopole: Monopole,
    simplex_vertices: Sequence[Vector] | np.ndarray,
    n_rays: int,
    rng: np.random.Generator,
) -> list[Ray]:
    """
    从声源射向三角形上均匀采样点的声线
    Rays from the monopole toward points sampled uniformly on the triangle.
    """
    triangle = np.asarray(simplex_vertices, dtype=np.float64).reshape(3, 3)
    _, area = triangle_normal(triangle)
    if area < AREA_TOLERANCE:
        raise AcousticsError(
            f"cannot sample rays on a degenerate triangle (area={area:.3e})"
        )
    if n_rays <= 0:
        return []
    points = sample_triangle_points(triangle, n_rays, rng)
    return [Ray.toward(monopole.position, point) for point in points]


def ray_triangle_intersect(
    ray: Ray, triangle: Sequence[Vector] | np.ndarray
) -> tuple[float, np.ndarray] | None:
    """
    Möller–Trumbore 声线-三角形求交
    Möller–Trumbore ray/triangle intersection.

    返回 t > 1e-9 的交点 (t, point)，包含边界；无交点时返回 None。
    Returns (t, point) for a hit with t > 1e-9, boundary included; None otherwise.
    """
    a, b, c = np.asarray(triangle, dtype=np.float64).reshape(3, 3)
    e1 = b - a
    e2 = c - a
    p = np.cross(ray.direction, e2)
    det = float(e1 @ p)
    if abs(det) < PARALLEL_TOLERANCE:
        return None
    inv = 1.0 / det
    s = ray.origin - a
    u = float(s @ p) * inv
    if u < -BARYCENTRIC_TOLERANCE or u > 1.0 + BARYCENTRIC_TOLERANCE:
        return None
    q = np.cross(s, e1)
    v = float(ray.direction @ q) * inv
    if v < -BARYCENTRIC_TOLERANCE or u + v > 1.0 + BARYCENTRIC_TOLERANCE:
        return None
    t = float(e2 @ q) * inv
    if t <= HIT_EPSILON:
        return None
    return t, ray.origin + t * ray.direction


def segments_blocked_batch(
    origin: np.ndarray, targets: np.ndarray, occluders: np.ndarray
) -> np.ndarray:
    """
    判断 origin→target 线段是否先穿过任一遮挡三角形
    Whether each origin→target segment crosses an occluder before its target.

    targets: (n, 3)，occluders: (m, 3, 3)；返回 (n,) 布尔数组。
    targets is (n, 3) and occluders (m, 3, 3); returns an (n,) bool array.
    """
    if not len(occluders) or not len(targets):
        return np.zeros(len(targets), dtype=bool)
    delta = targets - origin
    dist = np.linalg.norm(delta, axis=1)
    dirs = delta / dist[:, None]
    a = occluders[:, 0]
    e1 = occluders[:, 1] - a
    e2 = occluders[:, 2] - a
    p = np.cross(dirs[:, None, :], e2[None, :, :])
    det = np.einsum("mk,nmk->nm", e1, p)
    valid = np.abs(det) >= PARALLEL_TOLERANCE
    inv = np.where(valid, 1.0 / np.where(valid, det, 1.0), 0.0)
    s = origin - a
    u = np.einsum("mk,nmk->nm", s, p) * inv
    q = np.cross(s, e1)
    v = np.einsum("nk,mk->nm", dirs, q) * inv
    t = np.einsum("mk,mk->m", e2, q)[None, :] * inv
    inside = (
        valid
        & (u >= -BARYCENTRIC_TOLERANCE)
        & (v >= -BARYCENTRIC_TOLERANCE)
        & (u + v <= 1.0 + BARYCENTRIC_TOLERANCE)
    )
    blocking = inside & (t > HIT_EPSILON) & (t < dist[:, None] - HIT_EPSILON)
    return blocking.any(axis=1)


def reflect(direction: np.ndarray, normal: np.ndarray) -> np.ndarray:
    """
    镜面反射 r = d - 2(d·n)n，支持 (..., 3) 批量
    Specular reflection r = d - 2(d·n)n; broadcasts over (..., 3).
    """
    direction = np.asarray(direction, dtype=np.float64)
    normal = np.asarray(normal, dtype=np.float64)
    dot = np.sum(direction * normal, axis=-1, keepdims=True)
    return direction - 2.0 * dot * normal


def hits_microphone_batch(
    origins: np.ndarray, directions: np.ndarray, mic: Microphone
) -> np.ndarray:
    """
    向量化的麦克风命中判定
    Vectorized microphone hit test.
    """
    normal = mic.normal
    denom = directions @ normal
    parallel = np.abs(denom) < PARALLEL_TOLERANCE
    safe = np.where(parallel, 1.0, denom)
    t = ((mic.center - origins) @ normal) / safe
    points = origins + t[:, None] * directions
    rel = points - mic.center
    u, v = mic.half_axis_u, mic.half_axis_v
    alpha_u = rel @ u / float(u @ u)
    alpha_v = rel @ v / float(v @ v)
    return (
        ~parallel
        & (t > HIT_EPSILON)
        & (np.abs(alpha_u) <= 1.0)
        & (np.abs(alpha_v) <= 1.0)
    )


def ray_hits_microphone(ray: Ray, mic: Microphone) -> bool:
    """
    反射声线是否穿过麦克风矩形
    Whether a reflected ray crosses the microphone rectangle.

    入射声线从不参与判定，只测试反射声线。
    Incoming rays are never tested; only reflected rays are.
    """
    hits = hits_microphone_batch(ray.origin[None, :], ray.direction[None, :], mic)
    return bool(hits[0])


@dataclass(frozen=True)
class RayRecord:
    """一条追踪声线的记录 / Record of one traced ray."""

    ray_id: int
    simplex_id: int
    hit_point: tuple[float, float, float]
    direction: tuple[float, float, float]
    hits_mic: bool


def trace_rays(
    mesh: Mesh,
    monopole: Monopole,
    mic: Microphone,
    n_rays: int,
    stream: SeedStream,
) -> list[RayRecord]:
    """
    向受照单元投射声线并记录反射结果（按面积加权选择单元）
    Cast rays at illuminated simplices, chosen with area weights, and record the
    reflections.
    """
    triangles = mesh.triangles()
    centroids = triangles.mean(axis=1)
    lit = np.einsum("ij,ij->i", mesh.normals, monopole.position - centroids) > 0
    lit_ids = np.flatnonzero(lit)
    if n_rays <= 0 or not lit_ids.size:
        return []

    rng = stream.generator()
    cross = np.cross(
        triangles[lit_ids, 1] - triangles[lit_ids, 0],
        triangles[lit_ids, 2] - triangles[lit_ids, 0],
    )
    weights = np.linalg.norm(cross, axis=1)
    chosen = rng.choice(lit_ids, size=n_rays, p=weights / weights.sum())

    records: list[RayRecord] = []
    for ray_id, sid in enumerate(chosen.tolist()):
        point = sample_triangle_points(triangles[sid], 1, rng)[0]
        incoming = Ray.toward(monopole.position, point)
        outgoing = Ray(
            origin=point, direction=reflect(incoming.direction, mesh.normals[sid])
        )
        d = outgoing.direction
        records.append(
            RayRecord(
                ray_id=ray_id,
                simplex_id=int(sid),
                hit_point=(float(point[0]), float(point[1]), float(point[2])),
                direction=(float(d[0]), float(d[1]), float(d[2])),
                hits_mic=ray_hits_microphone(outgoing, mic),
            )
        )
    logger.info(
        "已追踪 %d 条声线, 命中麦克风 %d 条",
        len(records),
        sum(r.hits_mic for r in records),
    )
    return records
