"""
三角网格 - 顶点、单元、边邻接与外法向
Triangle mesh - vertices, simplices, edge adjacency and outward normals.

网格值构造后不可变：所有操作返回新的 Mesh，数组均为只读。
Mesh values are immutable once built: every operation returns a new Mesh and all
arrays are read-only.
"""

from __future__ import annotations

import dataclasses
import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import TYPE_CHECKING

import numpy as np

from QuboSculpt.kernel.errors import (
    DegenerateSimplexError,
    MeshError,
    MeshNotClosedError,
)

if TYPE_CHECKING:
    from QuboSculpt.optimizer.mutation import MutationSet

logger = logging.getLogger(__name__)

# 面积小于该值的三角形视为退化
AREA_TOLERANCE = 1e-12

Edge = tuple[int, int]


@dataclass(frozen=True)
class Vertex:
    """网格顶点 / Mesh vertex."""

    index: int
    position: tuple[float, float, float]


@dataclass(frozen=True)
class Simplex:
    """
    三角形单元，顶点按外侧逆时针排列
    Triangular simplex, vertices counter-clockwise seen from outside.
    """

    vertex_indices: tuple[int, int, int]
    outward_normal: tuple[float, float, float]


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Mesh:
    """
    三角网格
    Triangle mesh.

    vertices 为 (N, 3) 浮点数组，simplices 为 (S, 3) 整数数组；
    edges 为按字典序排列的 (E, 2) 顶点对 (a < b)，edge_adjacency 把每条边映射到相邻单元。
    vertices is an (N, 3) float array and simplices an (S, 3) int array; edges holds
    the (E, 2) sorted vertex pairs (a < b) and edge_adjacency maps each edge to its
    adjacent simplex ids.
    """

    vertices: np.ndarray
    simplices: np.ndarray
    normals: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    edges: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=np.int64))
    edge_adjacency: Mapping[Edge, tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        simplices = np.asarray(self.simplices, dtype=np.int64).reshape(-1, 3)
        if not np.all(np.isfinite(vertices)):
            raise MeshError("vertex coordinates must be finite")
        if simplices.size and (simplices.min() < 0 or simplices.max() >= len(vertices)):
            raise MeshError("simplex references a vertex outside [0, N)")
        if simplices.size:
            a, b, c = simplices.T
            bad = np.flatnonzero((a == b) | (b == c) | (a == c))
            if bad.size:
                raise MeshError(f"simplex {int(bad[0])} repeats a vertex")
        object.__setattr__(self, "vertices", _readonly(vertices))
        object.__setattr__(self, "simplices", _readonly(simplices))
        object.__setattr__(
            self, "normals", _readonly(np.asarray(self.normals, dtype=np.float64))
        )
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        object.__setattr__(self, "edges", _readonly(edges))
        object.__setattr__(
            self, "edge_adjacency", MappingProxyType(dict(self.edge_adjacency))
        )

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_simplices(self) -> int:
        return len(self.simplices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def euler_characteristic(self) -> int:
        """V - E + S"""
        return self.n_vertices - self.n_edges + self.n_simplices

    @property
    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    @property
    def is_closed(self) -> bool:
        """每条边恰有两个相邻单元 / Every edge has exactly two adjacent simplices."""
        return bool(self.edge_adjacency) and all(
            len(ids) == 2 for ids in self.edge_adjacency.values()
        )

    def vertex(self, index: int) -> Vertex:
        x, y, z = (float(c) for c in self.vertices[index])
        return Vertex(index=index, position=(x, y, z))

    def simplex(self, simplex_id: int) -> Simplex:
        a, b, c = (int(i) for i in self.simplices[simplex_id])
        nx, ny, nz = (float(c) for c in self.normals[simplex_id])
        return Simplex(vertex_indices=(a, b, c), outward_normal=(nx, ny, nz))

    def triangle(self, simplex_id: int) -> np.ndarray:
        """单元的 (3, 3) 顶点坐标 / The (3, 3) corner coordinates of a simplex."""
        return self.vertices[self.simplices[simplex_id]]

    def triangles(self) -> np.ndarray:
        """所有单元的 (S, 3, 3) 坐标 / All simplices as an (S, 3, 3) array."""
        return self.vertices[self.simplices]

    def neighbors(self, index: int) -> np.ndarray:
        """顶点的一环邻居（升序） / One-ring neighbours of a vertex, ascending."""
        edges = self.edges
        ring = np.concatenate(
            [edges[edges[:, 0] == index, 1], edges[edges[:, 1] == index, 0]]
        )
        return np.sort(ring)

    def with_vertices(self, vertices: np.ndarray) -> Mesh:
        """
        保持拓扑与绕向，替换顶点坐标并重算法向
        Replace vertex positions keeping topology and winding; normals recomputed.
        """
        moved = dataclasses.replace(self, vertices=vertices)
        return compute_normals(moved, reorient=False)


def triangle_areas(triangles: np.ndarray) -> np.ndarray:
    """(S, 3, 3) 三角形的面积 / Areas of (S, 3, 3) triangles."""
    cross = np.cross(
        triangles[:, 1] - triangles[:, 0], triangles[:, 2] - triangles[:, 0]
    )
    return 0.5 * np.linalg.norm(cross, axis=1)


def winding_number(mesh: Mesh, point: Sequence[float] | np.ndarray) -> float:
    """
    广义环绕数：闭合外向网格内部为 1，外部为 0，表面上为 1/2
    Generalized winding number: 1 inside a closed outward mesh, 0 outside and 1/2
    on its surface.

    各单元对 point 所张立体角之和除以 4π。
    The solid angles the simplices subtend at the point, summed and divided by 4π.
    """
    rel = mesh.triangles() - np.asarray(point, dtype=np.float64)
    a, b, c = rel[:, 0], rel[:, 1], rel[:, 2]
    la, lb, lc = (np.linalg.norm(x, axis=1) for x in (a, b, c))
    numerator = np.einsum("ij,ij->i", a, np.cross(b, c))
    denominator = (
        la * lb * lc
        + np.einsum("ij,ij->i", a, b) * lc
        + np.einsum("ij,ij->i", a, c) * lb
        + np.einsum("ij,ij->i", b, c) * la
    )
    return float(np.arctan2(numerator, denominator).sum() / (2.0 * np.pi))


def compute_normals(mesh: Mesh, reorient: bool = True) -> Mesh:
    """
    计算单位外法向
    Compute unit outward normals.

    法向为边向量叉积的归一化。reorient=True 时（凸的初始形状），
    若法向背离网格质心则翻转法向并交换绕向；变形后的网格应传 reorient=False，
    此时法向跟随已有的绕向。
    Each normal is the normalized cross product of the edge vectors. With
    reorient=True (convex initial shapes) a normal pointing toward the mesh centroid
    is flipped and the winding swapped to match; deformed meshes pass
    reorient=False so normals follow the existing winding.
    """
    simplices = np.array(mesh.simplices, copy=True)
    if not len(simplices):
        return dataclasses.replace(mesh, normals=np.zeros((0, 3)))

    triangles = mesh.vertices[simplices]
    cross = np.cross(
        triangles[:, 1] - triangles[:, 0], triangles[:, 2] - triangles[:, 0]
    )
    lengths = np.linalg.norm(cross, axis=1)
    degenerate = np.flatnonzero(0.5 * lengths < AREA_TOLERANCE)
    if degenerate.size:
        sid = int(degenerate[0])
        raise DegenerateSimplexError(sid, float(0.5 * lengths[sid]))
    normals = cross / lengths[:, None]

    if reorient:
        outward = triangles.mean(axis=1) - mesh.centroid
        flip = np.einsum("ij,ij->i", normals, outward) < 0
        if flip.any():
            simplices[flip] = simplices[flip][:, [0, 2, 1]]
            normals[flip] = -normals[flip]
            logger.debug("已翻转 %d 个单元的绕向", int(flip.sum()))

    return dataclasses.replace(mesh, simplices=simplices, normals=normals)


def build_edge_adjacency(mesh: Mesh, require_closed: bool = True) -> Mesh:
    """
    构建边到相邻单元的映射
    Build the edge to adjacent-simplex map.

    闭合网格中每条边恰好被两个单元共享，因此 2|E| = 3|S|。
    In a closed mesh each edge is shared by exactly two simplices, so 2|E| = 3|S|.
    """
    adjacency: dict[Edge, list[int]] = {}
    for sid, (a, b, c) in enumerate(mesh.simplices.tolist()):
        for u, v in ((a, b), (b, c), (c, a)):
            key = (u, v) if u < v else (v, u)
            adjacency.setdefault(key, []).append(sid)

    if require_closed:
        bad = {edge: len(ids) for edge, ids in adjacency.items() if len(ids) != 2}
        if bad:
            raise MeshNotClosedError(bad)

    edges = sorted(adjacency)
    return dataclasses.replace(
        mesh,
        edges=np.array(edges, dtype=np.int64).reshape(-1, 2),
        edge_adjacency={edge: tuple(adjacency[edge]) for edge in edges},
    )


def build_mesh(
    vertices: np.ndarray | Sequence[Sequence[float]],
    simplices: np.ndarray | Sequence[Sequence[int]],
    require_closed: bool = True,
    reorient: bool = True,
) -> Mesh:
    """
    由顶点和单元构造完整网格（法向 + 邻接）
    Build a complete mesh (normals and adjacency) from vertices and simplices.
    """
    mesh = Mesh(vertices=np.asarray(vertices), simplices=np.asarray(simplices))
    mesh = compute_normals(mesh, reorient=reorient)
    mesh = build_edge_adjacency(mesh, require_closed=require_closed)
    if require_closed:
        unused = set(range(mesh.n_vertices)) - set(mesh.simplices.ravel().tolist())
        if unused:
            raise MeshError(f"isolated vertices: {sorted(unused)}")
    return mesh


def sphere_lattice(n_theta: int, n_phi: int) -> np.ndarray:
    """
    (θ, φ) 矩形格点映射到单位球面，两极的重复点合并为单个顶点
    Map the rectangular (θ, φ) lattice onto the unit sphere, merging the duplicate
    pole points into a single vertex per pole.

    顺序：北极、各纬圈（θ 递增，φ 递增）、南极。
    Order: north pole, latitude rings (θ then φ ascending), south pole.
    """
    theta = np.linspace(0.0, np.pi, n_theta)[1:-1]
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    rings = np.stack(
        [np.sin(tt) * np.cos(pp), np.sin(tt) * np.sin(pp), np.cos(tt)], axis=-1
    ).reshape(-1, 3)
    return np.vstack([[0.0, 0.0, 1.0], rings, [0.0, 0.0, -1.0]])


def generate_sphere_mesh(n_theta: int, n_phi: int) -> Mesh:
    """
    生成初始球面网格
    Generate the initial sphere mesh.

    格点 x = sinθcosφ, y = sinθsinφ, z = cosθ 的三维凸包即为球面的 Delaunay 三角化，
    φ 接缝由凸包自然缝合。
    The 3D convex hull of the mapped lattice is the Delaunay triangulation of the
    sphere; the φ seam is stitched by the hull itself.
    """
    from QuboSculpt.geometry.hull import hull_simplices

    if n_theta < 3 or n_phi < 3:
        raise MeshError(
            f"lattice needs n_theta >= 3 and n_phi >= 3, got {n_theta}x{n_phi}"
        )
    points = sphere_lattice(n_theta, n_phi)
    if len(points) < 4:
        raise MeshError(f"lattice {n_theta}x{n_phi} yields fewer than 4 vertices")

    simplices, _ = hull_simplices(points)
    mesh = build_mesh(points, simplices)
    logger.info(
        "已生成球面网格: V=%d, E=%d, S=%d",
        mesh.n_vertices,
        mesh.n_edges,
        mesh.n_simplices,
    )
    return mesh


def apply_configuration(
    mesh: Mesh,
    mutations: MutationSet,
    chosen: Sequence[int] | np.ndarray,
) -> Mesh:
    """
    按配置移动顶点：v_i -> v_i + dv_i[chosen(i)]（chosen 从 1 开始）
    Move each vertex by its chosen displacement (chosen indices start at 1).

    拓扑不变，法向按原绕向重算。
    Topology is unchanged; normals are recomputed along the existing winding.
    """
    chosen = np.asarray(chosen, dtype=np.int64)
    displacements = mutations.displacements
    n_vertices, k = displacements.shape[:2]
    if n_vertices != mesh.n_vertices or chosen.shape != (n_vertices,):
        raise MeshError(
            f"configuration covers {chosen.size} vertices, mesh has {mesh.n_vertices}"
        )
    out_of_range = np.flatnonzero((chosen < 1) | (chosen > k))
    if out_of_range.size:
        vid = int(out_of_range[0])
        raise MeshError(
            f"mutation index {int(chosen[vid])} for vertex v{vid + 1} outside [1, {k}]"
        )
    offsets = displacements[np.arange(n_vertices), chosen - 1]
    return mesh.with_vertices(mesh.vertices + offsets)
