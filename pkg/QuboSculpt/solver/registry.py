"""
求解器注册表 - 管理后端类型并分发求解请求
Solver registry - manages backend types and dispatches solve requests.
"""

from __future__ import annotations

import logging
import math

from QuboSculpt.kernel.errors import SolverConfigError
from QuboSculpt.qubo.builder import qubo_objective
from QuboSculpt.solver.base import (
    QuboSolver,
    Sample,
    SolveRequest,
    SolveResult,
    SolverBackend,
    build_result,
)

logger = logging.getLogger(__name__)


class SolverRegistry:
    """
    求解器注册表
    Solver registry.
    """

    def __init__(self, register_builtins: bool = True) -> None:
        # 后端 -> 求解器类
        self._solver_types: dict[SolverBackend, type[QuboSolver]] = {}
        if register_builtins:
            self._register_builtin_types()

    def register_type(
        self, backend: SolverBackend, solver_cls: type[QuboSolver]
    ) -> None:
        """注册一种后端 / Register a backend type."""
        self._solver_types[SolverBackend(backend)] = solver_cls
        logger.debug("已注册求解后端: %s", SolverBackend(backend).value)

    def create(self, backend: SolverBackend | str) -> QuboSolver:
        """实例化后端 / Instantiate a backend."""
        try:
            key = SolverBackend(backend)
        except ValueError as exc:
            raise SolverConfigError(f"unknown backend: {backend}") from exc
        solver_cls = self._solver_types.get(key)
        if solver_cls is None:
            raise SolverConfigError(f"backend not available: {key.value}")
        return solver_cls()

    def available(self) -> list[str]:
        return sorted(b.value for b in self._solver_types)

    def _register_builtin_types(self) -> None:
        from QuboSculpt.solver.annealer import AnnealerSolver
        from QuboSculpt.solver.exhaustive import ExhaustiveSolver
        from QuboSculpt.solver.remote import RemoteSolver

        self.register_type(SolverBackend.EXHAUSTIVE, ExhaustiveSolver)
        self.register_type(SolverBackend.ANNEALER, AnnealerSolver)
        self.register_type(SolverBackend.REMOTE, RemoteSolver)


_default_registry: SolverRegistry | None = None


def get_registry() -> SolverRegistry:
    """全局默认注册表 / The process-wide default registry."""
    global _default_registry
    if _default_registry is None:
        _default_registry = SolverRegistry()
    return _default_registry


def revalidate(request: SolveRequest, result: SolveResult) -> SolveResult:
    """
    以本地求值为准重算所有样本能量并重新排序
    Recompute every sample energy locally, which wins over the reported value,
    and re-sort.
    """
    samples = []
    for sample in result.samples:
        local = qubo_objective(request.instance, sample.bits)
        if local != sample.energy:
            if not math.isclose(local, sample.energy, rel_tol=1e-9, abs_tol=1e-12):
                logger.warning(
                    "样本能量不一致, 已按本地求值修正: 报告 %.12g, 本地 %.12g",
                    sample.energy,
                    local,
                )
        samples.append(Sample(sample.bits, local, sample.multiplicity))
    return build_result(samples, result.backend_used, result.wall_time)


async def solve(
    request: SolveRequest, registry: SolverRegistry | None = None
) -> SolveResult:
    """
    按请求的后端求解并在本地校验能量
    Solve with the requested backend and validate energies locally.
    """
    solver = (registry or get_registry()).create(request.backend)
    result = await solver.solve(request)
    return revalidate(request, result)
