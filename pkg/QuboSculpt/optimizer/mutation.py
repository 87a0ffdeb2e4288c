"""
变异生成 - 每个顶点在半径递减的球内取 K 个随机位移
Mutation generation - K random displacements per vertex inside a ball whose
radius shrinks with the iteration count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from QuboSculpt.geometry.mesh import Mesh
from QuboSculpt.kernel.errors import ConfigError, MeshError
from QuboSculpt.optimizer.params import OptimizerParams, SearchMode


@dataclass(frozen=True, eq=False)
class MutationSet:
    """
    变异集合：displacements[i, j] 为顶点 i 的第 j+1 个位移，radii[i] 为其上限 R_i
    Mutation set: displacements[i, j] is vertex i's (j+1)-th displacement and
    radii[i] its bound R_i.
    """

    displacements: np.ndarray
    radii: np.ndarray

    def __post_init__(self) -> None:
        disp = np.array(self.displacements, dtype=np.float64, copy=True)
        radii = np.array(self.radii, dtype=np.float64, copy=True).reshape(-1)
        if disp.ndim != 3 or disp.shape[2] != 3 or disp.shape[1] < 1:
            raise ConfigError(f"displacements must be (N, K, 3), got {disp.shape}")
        if radii.shape != (disp.shape[0],):
            raise ConfigError("one radius per vertex is required")
        disp.setflags(write=False)
        radii.setflags(write=False)
        object.__setattr__(self, "displacements", disp)
        object.__setattr__(self, "radii", radii)

    @property
    def k(self) -> int:
        return self.displacements.shape[1]

    @property
    def n_vertices(self) -> int:
        return self.displacements.shape[0]

    @classmethod
    def identity(cls, n_vertices: int, k: int = 1) -> MutationSet:
        """全零位移 / All-zero displacements."""
        return cls(np.zeros((n_vertices, k, 3)), np.zeros(n_vertices))


def convexity_bound(mesh: Mesh, vertex_index: int) -> float:
    """
    ρ_i = 一环邻居最小距离的三分之一
    ρ_i is a third of the smallest distance to a one-ring neighbour.

    位移小于 ρ_i 时不会使相邻三角形翻转或退化。
    Displacing v_i by less than ρ_i cannot flip or collapse an adjacent triangle.
    """
    ring = mesh.neighbors(vertex_index)
    if ring.size < 3:
        raise MeshError(
            f"vertex v{vertex_index + 1} has {ring.size} neighbours, "
            "at least 3 required"
        )
    dist = np.linalg.norm(mesh.vertices[ring] - mesh.vertices[vertex_index], axis=1)
    return float(dist.min()) / 3.0


def convexity_bounds(mesh: Mesh) -> np.ndarray:
    """所有顶点的 ρ_i / ρ_i for every vertex."""
    return np.array([convexity_bound(mesh, i) for i in range(mesh.n_vertices)])


def mutation_radius(t: int, beta: float, mu: float, rho: float) -> float:
    """R = β·ρ·t^(−μ)"""
    if t < 1:
        raise ConfigError(f"iteration index starts at 1, got {t}")
    return beta * rho * float(t) ** (-mu)


def random_displacements(
    radii: np.ndarray, k: int, rng: np.random.Generator
) -> np.ndarray:
    """
    均匀的极角 θ∈[0,π]、方位角 φ∈[0,2π) 与均匀半径 r∈[0,R_i)
    Uniform polar angle θ in [0,π], azimuth φ in [0,2π) and radius r in [0,R_i).
    """
    n = len(radii)
    theta = rng.uniform(0.0, np.pi, (n, k))
    phi = rng.uniform(0.0, 2.0 * np.pi, (n, k))
    r = np.asarray(radii)[:, None] * rng.random((n, k))
    direction = np.stack(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)],
        axis=-1,
    )
    return r[..., None] * direction


def generate_mutations(
    mesh: Mesh, t: int, params: OptimizerParams, rng: np.random.Generator
) -> MutationSet:
    """
    第 t 次迭代的变异；plus 模式下每个顶点的第一个位移为零
    Mutations for iteration t; in plus mode every vertex's first displacement is zero.
    """
    rho = convexity_bounds(mesh)
    radii = np.array([mutation_radius(t, params.beta, params.mu, r) for r in rho])
    displacements = random_displacements(radii, params.k, rng)
    if params.search_mode is SearchMode.PLUS:
        displacements[:, 0] = 0.0
    return MutationSet(displacements=displacements, radii=radii)
