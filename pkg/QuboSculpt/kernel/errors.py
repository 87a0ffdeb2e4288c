"""
错误体系 - 框架内所有领域错误的基类与子类
Error hierarchy - base and derived classes for every domain error.

每个错误都带有一个简短的 code，CLI 用它输出单行可解析的错误信息。
Every error carries a short code the CLI uses for its single-line error output.
"""

from __future__ import annotations

from collections.abc import Sequence
from typing import Any


class QuboSculptError(Exception):
    """框架错误基类 / Base class for framework errors."""

    code = "error"


class ConfigError(QuboSculptError):
    """配置无效 / Invalid configuration."""

    code = "config"


class MeshError(QuboSculptError):
    """网格错误 / Mesh error."""

    code = "mesh"


class DegenerateSimplexError(MeshError):
    """零面积三角形 / Zero-area triangle."""

    def __init__(self, simplex_id: int, area: float) -> None:
        super().__init__(f"simplex {simplex_id} is degenerate (area={area:.3e})")
        self.simplex_id = simplex_id
        self.area = area


class MeshNotClosedError(MeshError):
    """
    网格不闭合：存在邻接单元数不等于 2 的边
    Mesh not closed: some edge does not have exactly two adjacent simplices.
    """

    def __init__(self, edges: dict[tuple[int, int], int]) -> None:
        listing = ", ".join(f"({a},{b})x{n}" for (a, b), n in sorted(edges.items()))
        super().__init__(f"mesh not closed: edges {listing}")
        self.edges = dict(edges)


class AcousticsError(QuboSculptError):
    """声学模型错误 / Acoustic model error."""

    code = "acoustics"


class QuboError(QuboSculptError):
    """QUBO 构造或求值错误 / QUBO construction or evaluation error."""

    code = "qubo"


class InfeasibleResultError(QuboError):
    """
    比特串不满足 one-hot 约束
    Bitstring violates the one-hot constraint.
    """

    def __init__(self, vertices: Sequence[int], hot_counts: Sequence[int]) -> None:
        parts = []
        for vertex, count in zip(vertices, hot_counts):
            kind = "zero-hot" if count == 0 else f"multi-hot({count})"
            parts.append(f"v{vertex + 1} {kind}")
        super().__init__("infeasible result: " + ", ".join(parts))
        self.vertices = list(vertices)
        self.hot_counts = list(hot_counts)


class SolverError(QuboSculptError):
    """求解器错误 / Solver error."""

    code = "solver"


class SolverConfigError(SolverError):
    """求解器配置错误 / Solver configuration error."""


class ProblemTooLargeError(SolverError):
    """问题规模超出后端上限 / Problem size exceeds the backend cap."""


class RemoteSolverError(SolverError):
    """远程采样器不可达、超时或响应格式错误 / Remote sampler failure."""


class OptimizationError(QuboSculptError):
    """
    迭代失败，保留已完成的历史
    Iteration failure; the partial history is preserved.
    """

    code = "optimize"

    def __init__(self, iteration: int, message: str, history: Any = None) -> None:
        super().__init__(f"iteration {iteration}: {message}")
        self.iteration = iteration
        self.history = history
