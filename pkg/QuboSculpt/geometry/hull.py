"""
凸包三角化 - 单位球面点集的三维凸包
Convex-hull triangulation - the 3D convex hull of points on the unit sphere.

球面点集的凸包与球面 Delaunay 三角化一致，因此无需在 (θ, φ) 参数平面处理周期接缝。
For points on a sphere the convex hull coincides with the spherical Delaunay
triangulation, so the periodic φ seam never has to be handled in parameter space.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from QuboSculpt.geometry.mesh import Simplex
from QuboSculpt.kernel.errors import MeshError

logger = logging.getLogger(__name__)

SPHERE_TOLERANCE = 1e-9
VOLUME_TOLERANCE = 1e-12


def hull_simplices(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    计算凸包三角形，绕向与外法向一致
    Compute the hull triangles with windings consistent with the outward normals.

    返回 (simplices (S, 3), normals (S, 3))。
    Returns (simplices (S, 3), normals (S, 3)).
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 3:
        raise MeshError(f"expected an (n, 3) point array, got shape {points.shape}")
    if len(points) < 4:
        raise MeshError(f"convex hull needs at least 4 points, got {len(points)}")
    if not np.all(np.isfinite(points)):
        raise MeshError("points must be finite")

    try:
        hull = ConvexHull(points)
    except QhullError as exc:
        raise MeshError(f"degenerate (coplanar) input: {exc}") from exc
    if hull.volume < VOLUME_TOLERANCE:
        raise MeshError("degenerate (coplanar) input: hull has zero volume")
    if len(hull.vertices) != len(points):
        missing = sorted(set(range(len(points))) - set(hull.vertices.tolist()))
        raise MeshError(f"points not on the hull (duplicate or interior): {missing}")

    simplices = np.array(hull.simplices, dtype=np.int64)
    outward = hull.equations[:, :3]
    triangles = points[simplices]
    cross = np.cross(
        triangles[:, 1] - triangles[:, 0], triangles[:, 2] - triangles[:, 0]
    )
    # Qhull 不保证绕向，按超平面外法向统一为逆时针
    flip = np.einsum("ij,ij->i", cross, outward) < 0
    simplices[flip] = simplices[flip][:, [0, 2, 1]]
    cross[flip] = -cross[flip]
    normals = cross / np.linalg.norm(cross, axis=1)[:, None]
    return simplices, normals


def triangulate(points_3d: Sequence[Sequence[float]] | np.ndarray) -> list[Simplex]:
    """
    单位球面点集的三角化
    Triangulate points on the unit sphere.
    """
    points = np.asarray(points_3d, dtype=np.float64)
    if points.ndim == 2 and points.shape[1] == 3:
        off_sphere = np.flatnonzero(
            np.abs(np.linalg.norm(points, axis=1) - 1.0) > SPHERE_TOLERANCE
        )
        if off_sphere.size:
            raise MeshError(f"points not on the unit sphere: {off_sphere.tolist()}")

    simplices, normals = hull_simplices(points)
    logger.debug("凸包三角化完成: %d 个点, %d 个三角形", len(points), len(simplices))
    return [
        Simplex(
            vertex_indices=(int(a), int(b), int(c)),
            outward_normal=(float(n[0]), float(n[1]), float(n[2])),
        )
        for (a, b, c), n in zip(simplices, normals)
    ]
