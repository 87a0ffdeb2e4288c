"""
局部损失 - 单元反射进麦克风的声线比例
Partial loss - the fraction of rays a simplex reflects into the microphone.

每个 (单元, 变异三元组) 单元格使用由主种子派生的独立随机流，
因此损失表与求值顺序、线程数无关。
Every (simplex, mutation triple) cell uses its own stream derived from the master
seed, so loss tables do not depend on evaluation order or thread count.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from QuboSculpt.acoustics.scene import Microphone, Monopole
from QuboSculpt.acoustics.tracer import (
    hits_microphone_batch,
    reflect,
    sample_triangle_points,
    segments_blocked_batch,
    triangle_normal,
)
from QuboSculpt.geometry.mesh import AREA_TOLERANCE, Mesh, winding_number
from QuboSculpt.kernel.errors import AcousticsError
from QuboSculpt.kernel.seeding import SeedStream

if TYPE_CHECKING:
    from QuboSculpt.optimizer.mutation import MutationSet

logger = logging.getLogger(__name__)

# 环绕数低于此值视为位于网格外部（表面上为 0.5）
OUTSIDE_WINDING = 0.25


@dataclass(frozen=True, eq=False)
class PartialLossTable:
    """
    局部损失表：values[s, j1, j2, k] 为单元 s 的三个顶点（按绕向）取变异 j1, j2, k 时的损失
    Partial loss table: values[s, j1, j2, k] is the loss of simplex s when its three
    corners, in winding order, take mutations j1, j2 and k.

    变异下标在数组中从 0 开始。
    Mutation indices are 0-based inside the array.
    """

    values: np.ndarray
    rays_per_sample: int

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 4 or len(set(values.shape[1:])) != 1:
            raise AcousticsError(f"loss table must be (S, K, K, K), got {values.shape}")
        if self.rays_per_sample < 1:
            raise AcousticsError("rays_per_sample must be positive")
        if values.size and (values.min() < 0.0 or values.max() > 1.0):
            raise AcousticsError("loss table entries must lie in [0, 1]")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def k(self) -> int:
        return self.values.shape[1]

    @property
    def n_simplices(self) -> int:
        return self.values.shape[0]


def cell_stream(
    stream: SeedStream, simplex_id: int, j1: int = 0, j2: int = 0, k: int = 0
) -> SeedStream:
    """
    单元格随机流；未变异的单元损失与 (0, 0, 0) 单元格共用同一随机流
    Per-cell stream; the unmutated simplex loss shares the (0, 0, 0) cell stream.
    """
    return stream.child(simplex_id, j1, j2, k)


def partial_loss(
    simplex_config: np.ndarray,
    monopole: Monopole,
    mic: Microphone,
    n_rays: int,
    rng: np.random.Generator,
    occluders: np.ndarray | None = None,
) -> float:
    """
    单元在给定顶点位置下的局部损失
    Partial loss of a simplex at the given corner positions.

    三个顶点按单元自身的绕向传入，由此确定外法向。
    背向声源的单元不投射声线，直接返回 0；只计一次反射。
    Corners come in the simplex's own winding, which fixes the outward normal.
    A simplex facing away from the source casts nothing and returns 0; only a single
    bounce is modelled.
    """
    if n_rays < 1:
        raise AcousticsError(f"n_rays must be >= 1, got {n_rays}")
    triangle = np.asarray(simplex_config, dtype=np.float64).reshape(3, 3)
    normal, area = triangle_normal(triangle)
    if area < AREA_TOLERANCE:
        logger.warning("变异后的三角形退化 (面积=%.3e)，按零反射处理", area)
        return 0.0

    centroid = triangle.mean(axis=0)
    if float(normal @ (monopole.position - centroid)) <= 0.0:
        return 0.0

    points = sample_triangle_points(triangle, n_rays, rng)
    incoming = points - monopole.position
    incoming /= np.linalg.norm(incoming, axis=1)[:, None]
    outgoing = reflect(incoming, normal)
    hits = hits_microphone_batch(points, outgoing, mic)
    if occluders is not None and len(occluders):
        hits &= ~segments_blocked_batch(monopole.position, points, occluders)
    return int(hits.sum()) / n_rays


def _occluders_for(
    triangles: np.ndarray, simplex_id: int, shadow_test: bool
) -> np.ndarray | None:
    if not shadow_test:
        return None
    return np.delete(triangles, simplex_id, axis=0)


def simplex_losses(
    mesh: Mesh,
    monopole: Monopole,
    mic: Microphone,
    n_rays: int,
    stream: SeedStream,
    shadow_test: bool = False,
) -> np.ndarray:
    """
    当前（未变异）顶点位置下各单元的局部损失
    Per-simplex partial losses at the current, unmutated vertex positions.
    """
    triangles = mesh.triangles()
    return np.array(
        [
            partial_loss(
                triangles[sid],
                monopole,
                mic,
                n_rays,
                cell_stream(stream, sid).generator(),
                occluders=_occluders_for(triangles, sid, shadow_test),
            )
            for sid in range(mesh.n_simplices)
        ],
        dtype=np.float64,
    )


def ensure_source_outside(mesh: Mesh, monopole: Monopole) -> None:
    """
    声源必须严格位于网格外部，否则抛出 AcousticsError
    The monopole must lie strictly outside the mesh; raises AcousticsError.
    """
    winding = winding_number(mesh, monopole.position)
    if abs(winding) >= OUTSIDE_WINDING:
        raise AcousticsError(
            f"monopole at {monopole.position.tolist()} is not strictly outside "
            f"the mesh (winding number {winding:.3f})"
        )


def total_loss(
    mesh: Mesh,
    monopole: Monopole,
    mic: Microphone,
    n_rays: int,
    stream: SeedStream,
    shadow_test: bool = False,
) -> float:
    """
    总损失 L = Σ_s ℓ(s)
    Total loss L = Σ_s ℓ(s).
    """
    losses = simplex_losses(mesh, monopole, mic, n_rays, stream, shadow_test)
    return math.fsum(losses.tolist())


def build_partial_loss_table(
    mesh: Mesh,
    mutations: MutationSet,
    monopole: Monopole,
    mic: Microphone,
    n_rays: int,
    stream: SeedStream,
    shadow_test: bool = False,
    workers: int = 1,
) -> PartialLossTable:
    """
    为每个单元填充全部 K³ 个局部损失
    Fill all K³ partial losses of every simplex.

    单元之间互不依赖，workers > 1 时并行计算，结果按单元顺序组装。
    Simplices are independent; with workers > 1 they run in parallel and the
    results are assembled in simplex order.
    """
    displacements = mutations.displacements
    k = displacements.shape[1]
    if k < 1:
        raise AcousticsError("mutation set must hold at least one mutation per vertex")
    if displacements.shape[0] != mesh.n_vertices:
        raise AcousticsError(
            f"mutation set covers {displacements.shape[0]} vertices, "
            f"mesh has {mesh.n_vertices}"
        )
    triangles = mesh.triangles()

    def fill(sid: int) -> np.ndarray:
        a, b, c = mesh.simplices[sid]
        occluders = _occluders_for(triangles, sid, shadow_test)
        block = np.zeros((k, k, k))
        for j1 in range(k):
            pa = mesh.vertices[a] + displacements[a, j1]
            for j2 in range(k):
                pb = mesh.vertices[b] + displacements[b, j2]
                for j3 in range(k):
                    pc = mesh.vertices[c] + displacements[c, j3]
                    block[j1, j2, j3] = partial_loss(
                        np.stack([pa, pb, pc]),
                        monopole,
                        mic,
                        n_rays,
                        cell_stream(stream, sid, j1, j2, j3).generator(),
                        occluders=occluders,
                    )
        return block

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(fill, range(mesh.n_simplices)))
    else:
        blocks = [fill(sid) for sid in range(mesh.n_simplices)]

    values = np.stack(blocks) if blocks else np.zeros((0, k, k, k))
    logger.debug(
        "损失表已构建: %d 个单元 x %d 个配置, 非零 %d",
        mesh.n_simplices,
        k**3,
        int(np.count_nonzero(values)),
    )
    return PartialLossTable(values=values, rays_per_sample=n_rays)


@dataclass(frozen=True)
class ShadingRow:
    """单元着色行 / One simplex shading row."""

    simplex_id: int
    loss: float
    normalized_loss: float


def shade_partial_loss(
    mesh: Mesh,
    monopole: Monopole,
    mic: Microphone,
    n_rays: int,
    stream: SeedStream,
    shadow_test: bool = False,
) -> list[ShadingRow]:
    """
    各单元的局部损失及按最大值归一化的着色值（全零时归一化值也为零）
    Per-simplex losses with shades normalized to the maximum loss (all zero when
    every loss is zero).
    """
    losses = simplex_losses(mesh, monopole, mic, n_rays, stream, shadow_test)
    peak = float(losses.max()) if losses.size else 0.0
    normalized = losses / peak if peak > 0.0 else np.zeros_like(losses)
    return [
        ShadingRow(simplex_id=sid, loss=float(loss), normalized_loss=float(shade))
        for sid, (loss, shade) in enumerate(zip(losses, normalized))
    ]
