"""
QUBO 构造 - 由局部损失表生成边耦合矩阵并加入 one-hot 罚项
QUBO construction - edge couplings from the partial loss table plus the one-hot
penalty.

对每条边 (v, w) 与变异对 (j1, j2)：
    Q[(v, j1), (w, j2)] = α Σ_{s ∈ S(v,w)} Σ_k ℓ̂(s, j1, j2, k)
罚项 λ Σ_i (Σ_j x_ij − 1)² 展开后为对角 −λ、块内非对角 +2λ，常数 +λN 省略。
For every edge (v, w) and mutation pair (j1, j2) the entry sums the partial losses
of the two adjacent simplices over the third corner's K mutations. The penalty
λ Σ_i (Σ_j x_ij − 1)² expands to −λ on the diagonal and +2λ inside each vertex
block; the constant +λN is dropped.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np

from QuboSculpt.acoustics.loss import PartialLossTable
from QuboSculpt.geometry.mesh import Mesh
from QuboSculpt.kernel.errors import InfeasibleResultError, QuboError
from QuboSculpt.qubo.model import Configuration, IndexMap, QuboInstance

logger = logging.getLogger(__name__)


def build_loss_matrix(mesh: Mesh, table: PartialLossTable) -> np.ndarray:
    """
    未缩放（α = 1）的损失耦合矩阵，仅含边对应的非对角块
    Unscaled (α = 1) loss coupling matrix; only edge off-diagonal blocks are set.
    """
    if table.n_simplices != mesh.n_simplices:
        raise QuboError(
            f"loss table covers {table.n_simplices} simplices, "
            f"mesh has {mesh.n_simplices}"
        )
    if not mesh.is_closed:
        raise QuboError("QUBO construction requires a closed mesh")

    k = table.k
    raw = np.zeros((mesh.n_vertices * k, mesh.n_vertices * k))
    for (v, w), simplex_ids in mesh.edge_adjacency.items():
        block = np.zeros((k, k))
        for sid in simplex_ids:
            corners = mesh.simplices[sid].tolist()
            pv, pw = corners.index(v), corners.index(w)
            pc = 3 - pv - pw
            # 轴顺序调整为 (v 的变异, w 的变异, 第三个顶点的变异)，再对第三轴求和
            block += np.transpose(table.values[sid], (pv, pw, pc)).sum(axis=2)
        raw[v * k : (v + 1) * k, w * k : (w + 1) * k] += block
    return raw


def default_alpha(raw: np.ndarray) -> float:
    """
    使最大的损失项绝对值为 1 的缩放（全零时为 1）
    Scale making the largest loss entry magnitude equal 1 (1 when all are zero).
    """
    peak = float(np.abs(raw).max()) if raw.size else 0.0
    return 1.0 / peak if peak > 0.0 else 1.0


def build_loss_qubo(
    mesh: Mesh, table: PartialLossTable, alpha: float | None = None
) -> QuboInstance:
    """
    只含损失项的 QUBO（罚项之前）
    Loss-only QUBO, before the penalty.
    """
    raw = build_loss_matrix(mesh, table)
    alpha = default_alpha(raw) if alpha is None else float(alpha)
    if alpha <= 0.0:
        raise QuboError(f"alpha must be positive, got {alpha}")
    entries = alpha * raw
    return QuboInstance(
        entries=entries,
        index_map=IndexMap(mesh.n_vertices, table.k),
        alpha=alpha,
        lam=0.0,
        loss_part=entries,
    )


def penalty_matrix(index_map: IndexMap, lam: float) -> np.ndarray:
    """
    one-hot 罚项矩阵
    One-hot penalty matrix.
    """
    size, k = index_map.size, index_map.k
    penalty = np.zeros((size, size))
    block = np.triu(np.full((k, k), 2.0 * lam), k=1)
    np.fill_diagonal(block, -lam)
    for vertex in range(index_map.n_vertices):
        sl = index_map.block(vertex)
        penalty[sl, sl] = block
    return penalty


def choose_penalty(q_loss_part: QuboInstance) -> float:
    """
    可证明保证可行性的罚系数 λ = 1 + Σ|损失项|
    Certified penalty λ = 1 + Σ|loss entries|.

    对任意符号的损失项：在空块中置一位或在多热块中清一位，罚项至少下降 λ，
    而损失项的变化不超过 Σ|损失项|，因此惩罚后的每个局部极小都满足 one-hot。
    For loss entries of either sign, setting a bit in an empty block or clearing
    one in a multi-hot block lowers the penalty by at least λ while the loss terms
    change by at most Σ|loss entries|, so every minimum of the penalized QUBO is
    one-hot.
    """
    return 1.0 + float(np.abs(q_loss_part.loss_part).sum())


def add_one_hot_penalty(q: QuboInstance, lam: float) -> QuboInstance:
    """在损失项上加入罚项 / Add the penalty on top of the loss terms."""
    if lam <= 0.0:
        raise QuboError(f"lambda must be positive, got {lam}")
    return QuboInstance(
        entries=q.loss_part + penalty_matrix(q.index_map, lam),
        index_map=q.index_map,
        alpha=q.alpha,
        lam=float(lam),
        loss_part=q.loss_part,
    )


def build_qubo(
    mesh: Mesh,
    table: PartialLossTable,
    alpha: float | None = None,
    lam: float | None = None,
) -> QuboInstance:
    """
    构造完整 QUBO（α、λ 缺省时按默认规则选取）
    Build the full QUBO; α and λ default to the normalizing and certified choices.
    """
    loss_q = build_loss_qubo(mesh, table, alpha)
    lam = choose_penalty(loss_q) if lam is None else float(lam)
    q = add_one_hot_penalty(loss_q, lam)
    logger.debug(
        "QUBO 已构建: NK=%d, α=%.4g, λ=%.4g, 非零项=%d",
        q.size,
        q.alpha,
        q.lam,
        int(np.count_nonzero(q.entries)),
    )
    return q


def _as_bits(q: QuboInstance, x: Sequence[int] | np.ndarray) -> np.ndarray:
    bits = np.asarray(x)
    if bits.shape != (q.size,):
        raise QuboError(f"bit vector length {bits.size} does not match NK={q.size}")
    if not np.all((bits == 0) | (bits == 1)):
        raise QuboError("bit vector entries must be 0 or 1")
    return bits.astype(np.float64)


def qubo_objective(q: QuboInstance, x: Sequence[int] | np.ndarray) -> float:
    """
    Obj(x) = xᵀQx（上三角约定，每个无序对计一次）
    Obj(x) = xᵀQx with the upper-triangular convention (each pair counted once).
    """
    bits = _as_bits(q, x)
    return float(bits @ q.entries @ bits)


def loss_objective(q: QuboInstance, x: Sequence[int] | np.ndarray) -> float:
    """仅损失项的目标值（边求和代理损失） / Objective of the loss terms only."""
    bits = _as_bits(q, x)
    return float(bits @ q.loss_part @ bits)


def feasible_objective(q: QuboInstance, c: Configuration) -> float:
    """
    可行配置的目标值；罚项贡献恒为 −λN
    Objective of a feasible configuration; the penalty contributes exactly −λN.
    """
    return qubo_objective(q, c.to_bits(q.index_map))


def decode_bitstring(
    x: Sequence[int] | np.ndarray, index_map: IndexMap
) -> Configuration:
    """
    比特串解码为配置，每个顶点块必须恰好 one-hot
    Decode a bitstring into a configuration; every vertex block must be one-hot.
    """
    bits = np.asarray(x, dtype=np.int64)
    if bits.shape != (index_map.size,):
        raise QuboError(
            f"bit vector length {bits.size} does not match NK={index_map.size}"
        )
    blocks = bits.reshape(index_map.n_vertices, index_map.k)
    counts = blocks.sum(axis=1)
    bad = np.flatnonzero(counts != 1)
    if bad.size:
        raise InfeasibleResultError(bad.tolist(), counts[bad].tolist())
    return Configuration(assignment=tuple(int(j) + 1 for j in blocks.argmax(axis=1)))
