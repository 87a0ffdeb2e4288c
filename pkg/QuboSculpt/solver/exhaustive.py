"""
穷举求解器 - 枚举全部 2^NK 个向量，用作测试基准
Exhaustive solver - enumerates all 2^NK vectors; the reference oracle for tests.
"""

from __future__ import annotations

import asyncio
import logging
import time

import numpy as np

from QuboSculpt.kernel.errors import ProblemTooLargeError
from QuboSculpt.qubo.builder import qubo_objective
from QuboSculpt.qubo.model import QuboInstance
from QuboSculpt.solver.base import (
    QuboSolver,
    Sample,
    SolveRequest,
    SolveResult,
    SolverBackend,
    build_result,
)

logger = logging.getLogger(__name__)

# 硬上限
MAX_VARIABLES = 26
_CHUNK = 1 << 15


def index_bits(index: int, size: int) -> np.ndarray:
    """整数 → 比特向量，变量 0 为最低位 / Integer to bits, variable 0 lowest."""
    return ((index >> np.arange(size, dtype=np.int64)) & 1).astype(np.int8)


def solve_exhaustive(instance: QuboInstance, num_reads: int = 1) -> SolveResult:
    """
    穷举求全局最小；能量相同时取排序键最小的向量
    Global minimum by enumeration; ties go to the smallest bit rank.

    返回能量最低的 num_reads 个不同向量。
    Returns the num_reads lowest distinct vectors.
    """
    n = instance.size
    if n > MAX_VARIABLES:
        raise ProblemTooLargeError(
            f"exhaustive search is capped at {MAX_VARIABLES} variables, got {n}"
        )
    start = time.perf_counter()
    q = instance.entries
    keep = max(1, num_reads)
    shifts = np.arange(n, dtype=np.int64)
    total = 1 << n

    best_energy = np.empty(0)
    best_index = np.empty(0, dtype=np.int64)
    for lo in range(0, total, _CHUNK):
        index = np.arange(lo, min(lo + _CHUNK, total), dtype=np.int64)
        x = ((index[:, None] >> shifts) & 1).astype(np.float64)
        energy = np.einsum("ij,ij->i", x @ q, x)
        cand_energy = np.concatenate([best_energy, energy])
        cand_index = np.concatenate([best_index, index])
        # 先按能量、再按下标（即排序键）排序
        order = np.lexsort((cand_index, cand_energy))[:keep]
        best_energy, best_index = cand_energy[order], cand_index[order]

    samples = []
    for idx in best_index.tolist():
        bits = index_bits(idx, n)
        samples.append(Sample(bits, qubo_objective(instance, bits)))
    return build_result(samples, SolverBackend.EXHAUSTIVE, time.perf_counter() - start)


class ExhaustiveSolver(QuboSolver):
    """穷举后端 / Exhaustive backend."""

    backend = SolverBackend.EXHAUSTIVE

    async def solve(self, request: SolveRequest) -> SolveResult:
        return await asyncio.to_thread(
            solve_exhaustive, request.instance, request.num_reads
        )
