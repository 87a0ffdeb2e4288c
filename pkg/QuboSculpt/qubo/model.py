"""
QUBO 数据模型 - 变量索引、QUBO/Ising 实例与配置
QUBO data model - variable index map, QUBO/Ising instances and configurations.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from QuboSculpt.kernel.errors import QuboError


@dataclass(frozen=True)
class IndexMap:
    """
    (顶点 i, 变异 j) 与扁平下标之间的双射，j 从 1 开始
    Bijection between (vertex i, mutation j) and flat indices; j starts at 1.

    比特串布局为 [x_11 … x_1K; x_21 … x_2K; …; x_N1 … x_NK]。
    The bitstring layout is [x_11 … x_1K; x_21 … x_2K; …; x_N1 … x_NK].
    """

    n_vertices: int
    k: int

    def __post_init__(self) -> None:
        if self.n_vertices < 1 or self.k < 1:
            raise QuboError(
                f"index map needs N >= 1 and K >= 1, got {self.n_vertices}, {self.k}"
            )

    @property
    def size(self) -> int:
        return self.n_vertices * self.k

    def flat(self, vertex: int, mutation: int) -> int:
        if not (0 <= vertex < self.n_vertices and 1 <= mutation <= self.k):
            raise QuboError(
                f"(vertex={vertex}, mutation={mutation}) outside the index map"
            )
        return vertex * self.k + (mutation - 1)

    def unflat(self, index: int) -> tuple[int, int]:
        if not 0 <= index < self.size:
            raise QuboError(f"flat index {index} outside [0, {self.size})")
        vertex, offset = divmod(index, self.k)
        return vertex, offset + 1

    def block(self, vertex: int) -> slice:
        """顶点 one-hot 块在比特串中的切片 / Slice of a vertex's one-hot block."""
        return slice(vertex * self.k, (vertex + 1) * self.k)


def bits_rank(bits: Sequence[int] | np.ndarray) -> int:
    """
    比特向量的平局排序键：变量 0 为最低位的整数值
    Tie-break key for bit vectors: the integer value with variable 0 as the least
    significant bit, i.e. lexicographic order read from the last variable.
    """
    return sum(1 << i for i, b in enumerate(np.asarray(bits).tolist()) if b)


def _as_upper(entries: np.ndarray) -> np.ndarray:
    entries = np.asarray(entries, dtype=np.float64)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise QuboError(f"QUBO matrix must be square, got shape {entries.shape}")
    if not np.all(np.isfinite(entries)):
        raise QuboError("QUBO entries must be finite")
    # 下三角部分折叠到上三角
    folded = np.triu(entries) + np.triu(entries.T, k=1)
    folded.setflags(write=False)
    return folded


@dataclass(frozen=True, eq=False)
class QuboInstance:
    """
    上三角 QUBO 实例
    Upper-triangular QUBO instance.

    entries 为完整矩阵（损失项 + 罚项），loss_part 仅含损失项；
    alpha 为能量缩放，lam 为 one-hot 罚系数（0 表示尚未加入罚项）。
    entries holds the full matrix (loss plus penalty) and loss_part only the loss
    terms; alpha is the energy scale and lam the one-hot penalty (0 before the
    penalty is added).
    """

    entries: np.ndarray
    index_map: IndexMap
    alpha: float = 1.0
    lam: float = 0.0
    loss_part: np.ndarray | None = None

    def __post_init__(self) -> None:
        entries = _as_upper(self.entries)
        if entries.shape[0] != self.index_map.size:
            raise QuboError(
                f"matrix size {entries.shape[0]} does not match index map size "
                f"{self.index_map.size}"
            )
        loss = entries if self.loss_part is None else _as_upper(self.loss_part)
        if loss.shape != entries.shape:
            raise QuboError("loss part and entries differ in shape")
        if self.alpha <= 0.0 or self.lam < 0.0:
            raise QuboError(
                "alpha must be positive and lambda non-negative "
                f"({self.alpha}, {self.lam})"
            )
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "loss_part", loss)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def k(self) -> int:
        return self.index_map.k

    @property
    def max_abs_entry(self) -> float:
        return float(np.abs(self.entries).max()) if self.size else 0.0

    def nonzero_items(self) -> list[tuple[int, int, float]]:
        """上三角非零项 (i, j, value)，行优先 / Upper-triangular nonzeros, row-major."""
        rows, cols = np.nonzero(self.entries)
        return [
            (int(i), int(j), float(self.entries[i, j])) for i, j in zip(rows, cols)
        ]

    @classmethod
    def from_items(
        cls,
        size: int,
        items: Iterable[tuple[int, int, float]],
        index_map: IndexMap | None = None,
    ) -> QuboInstance:
        """
        由稀疏项构造（顺序无关，(j, i) 与 (i, j) 累加到同一上三角位置）
        Build from sparse items; order-free, (j, i) accumulates onto (i, j).
        """
        entries = np.zeros((size, size))
        for i, j, value in items:
            if not (0 <= i < size and 0 <= j < size):
                raise QuboError(f"entry ({i}, {j}) outside a {size}x{size} matrix")
            a, b = (i, j) if i <= j else (j, i)
            entries[a, b] += value
        return cls(entries=entries, index_map=index_map or IndexMap(size, 1))


@dataclass(frozen=True, eq=False)
class IsingInstance:
    """
    Ising 实例：E(s) = Σ h_i s_i + Σ_{i<j} J_ij s_i s_j + offset
    Ising instance: E(s) = Σ h_i s_i + Σ_{i<j} J_ij s_i s_j + offset.

    J 以 i < j 的键存储，coupling(i, j) 对两种顺序返回相同值。
    J is keyed with i < j; coupling(i, j) answers for either order.
    """

    h: np.ndarray
    J: Mapping[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self) -> None:
        h = np.array(self.h, dtype=np.float64, copy=True)
        if not np.all(np.isfinite(h)):
            raise QuboError("Ising fields must be finite")
        couplings: dict[tuple[int, int], float] = {}
        for (i, j), value in self.J.items():
            if i == j:
                raise QuboError(f"Ising coupling ({i}, {j}) lies on the diagonal")
            if not np.isfinite(value):
                raise QuboError("Ising couplings must be finite")
            key = (i, j) if i < j else (j, i)
            couplings[key] = couplings.get(key, 0.0) + float(value)
        h.setflags(write=False)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "J", MappingProxyType(couplings))

    def coupling(self, i: int, j: int) -> float:
        return self.J.get((i, j) if i < j else (j, i), 0.0)


@dataclass(frozen=True)
class Configuration:
    """
    完整配置：每个顶点一个变异下标（从 1 开始）
    Complete configuration: one mutation index per vertex, starting at 1.
    """

    assignment: tuple[int, ...]

    @classmethod
    def identity(cls, n_vertices: int) -> Configuration:
        """全部取变异 1 / Every vertex takes mutation 1."""
        return cls(assignment=(1,) * n_vertices)

    def validate(self, index_map: IndexMap) -> None:
        if len(self.assignment) != index_map.n_vertices:
            raise QuboError(
                f"configuration covers {len(self.assignment)} vertices, "
                f"expected {index_map.n_vertices}"
            )
        bad = [i for i, j in enumerate(self.assignment) if not 1 <= j <= index_map.k]
        if bad:
            raise QuboError(
                f"mutation index out of [1, {index_map.k}] at vertices {bad}"
            )

    def to_bits(self, index_map: IndexMap) -> np.ndarray:
        """one-hot 编码 / One-hot encoding."""
        self.validate(index_map)
        bits = np.zeros(index_map.size, dtype=np.int8)
        for vertex, mutation in enumerate(self.assignment):
            bits[index_map.flat(vertex, mutation)] = 1
        return bits
