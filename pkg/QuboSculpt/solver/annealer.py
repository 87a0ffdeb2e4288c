"""
模拟退火求解器 - 单比特翻转 Metropolis 退火，几何降温
Simulated annealing solver - single-bit-flip Metropolis chains with a geometric
temperature schedule.

每条链使用按重启序号派生的独立随机流，结果按 (能量, 排序键) 合并，
与线程数无关。
Each chain owns a stream derived from its restart index and results merge by
(energy, bit rank), independent of the thread count.
"""

from __future__ import annotations

import asyncio
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from QuboSculpt.kernel.seeding import SeedStream
from QuboSculpt.qubo.builder import qubo_objective
from QuboSculpt.qubo.model import QuboInstance
from QuboSculpt.solver.base import (
    AnnealerParams,
    QuboSolver,
    Sample,
    SolveRequest,
    SolveResult,
    SolverBackend,
    build_result,
)

logger = logging.getLogger(__name__)

# 贪心收尾的最大步数（相对变量数）
_QUENCH_FACTOR = 10


class IncrementalEnergy:
    """
    增量能量跟踪
    Incremental energy tracker.

    field[b] = Q_bb + Σ_{j≠b} W_bj x_j，其中 W 为对称化的非对角部分；
    翻转 b 的能量变化为 (1 − 2x_b)·field[b]，更新为 O(NK)。
    field[b] = Q_bb + Σ_{j≠b} W_bj x_j with W the symmetrized off-diagonal part;
    flipping b changes the energy by (1 − 2x_b)·field[b] and updates in O(NK).
    """

    def __init__(self, entries: np.ndarray, bits: np.ndarray) -> None:
        upper = np.triu(entries, k=1)
        self.coupling = upper + upper.T
        self.diag = np.diag(entries).copy()
        self.bits = np.asarray(bits, dtype=np.int8).copy()
        x = self.bits.astype(np.float64)
        self.field = self.diag + self.coupling @ x
        self.energy = float(x @ entries @ x)

    def flip_delta(self, b: int) -> float:
        return float((1 - 2 * self.bits[b]) * self.field[b])

    def flip(self, b: int) -> None:
        sign = 1 - 2 * int(self.bits[b])
        self.energy += sign * float(self.field[b])
        self.bits[b] ^= 1
        self.field += sign * self.coupling[:, b]

    def swap_delta(self, on: int, off: int) -> float:
        """
        把置位比特从 on 移到 off 的能量变化
        Energy change of moving the set bit from `on` to `off`.
        """
        return float(self.field[off] - self.field[on] - self.coupling[on, off])

    def swap(self, on: int, off: int) -> None:
        self.flip(on)
        self.flip(off)


def _block_members(instance: QuboInstance, params: AnnealerParams) -> list[np.ndarray]:
    index_map = instance.index_map
    if not params.block_moves or index_map.k < 2 or instance.lam <= 0.0:
        return []
    return [
        np.arange(index_map.size)[index_map.block(v)]
        for v in range(index_map.n_vertices)
    ]


def _try_swap(
    state: IncrementalEnergy,
    members: np.ndarray,
    temperature: float,
    rng: np.random.Generator,
) -> None:
    on = members[state.bits[members] == 1]
    if on.size != 1:
        return
    a = int(on[0])
    others = members[members != a]
    c = int(others[rng.integers(others.size)])
    delta = state.swap_delta(a, c)
    if delta <= 0.0 or rng.random() < math.exp(-delta / temperature):
        state.swap(a, c)


def _quench(state: IncrementalEnergy, blocks: list[np.ndarray]) -> None:
    """零温贪心下降 / Zero-temperature greedy descent."""
    for _ in range(_QUENCH_FACTOR * state.bits.size + 1):
        deltas = (1 - 2 * state.bits) * state.field
        b = int(np.argmin(deltas))
        best_delta = float(deltas[b])
        move: tuple[int, int] | None = None
        for members in blocks:
            on = members[state.bits[members] == 1]
            if on.size != 1:
                continue
            a = int(on[0])
            swaps = state.field[members] - state.field[a] - state.coupling[a, members]
            swaps[members == a] = np.inf
            c = int(np.argmin(swaps))
            if swaps[c] < best_delta:
                best_delta = float(swaps[c])
                move = (a, int(members[c]))
        if best_delta >= 0.0:
            return
        if move is None:
            state.flip(b)
        else:
            state.swap(*move)


def run_chain(
    instance: QuboInstance,
    params: AnnealerParams,
    temperatures: np.ndarray,
    blocks: list[np.ndarray],
    rng: np.random.Generator,
) -> np.ndarray:
    """
    单条退火链，返回链上最优状态经贪心收尾后的比特串
    One annealing chain; returns its best state after the greedy quench.
    """
    n = instance.size
    state = IncrementalEnergy(instance.entries, rng.integers(0, 2, n))
    best_bits = state.bits.copy()
    best_energy = state.energy

    for temperature in temperatures.tolist():
        order = rng.permutation(n)
        accept = rng.random(n)
        for b, u in zip(order.tolist(), accept.tolist()):
            delta = state.flip_delta(b)
            if delta <= 0.0 or u < math.exp(-delta / temperature):
                state.flip(b)
        for v in rng.permutation(len(blocks)).tolist():
            _try_swap(state, blocks[v], temperature, rng)
        if state.energy < best_energy:
            best_energy = state.energy
            best_bits = state.bits.copy()

    final = IncrementalEnergy(instance.entries, best_bits)
    _quench(final, blocks)
    return final.bits


def solve_annealer(
    instance: QuboInstance, params: AnnealerParams | None = None, seed: int = 0
) -> SolveResult:
    """
    多次重启的模拟退火，返回所有链中的最优
    Simulated annealing over independent restarts; returns the best of all chains.
    """
    params = params or AnnealerParams()
    start = time.perf_counter()
    t0, t1 = params.schedule(instance.max_abs_entry)
    temperatures = np.geomspace(t0, t1, params.sweeps)
    blocks = _block_members(instance, params)
    stream = SeedStream(seed)

    def chain(restart: int) -> np.ndarray:
        rng = stream.child(restart).generator()
        return run_chain(instance, params, temperatures, blocks, rng)

    if params.workers > 1:
        with ThreadPoolExecutor(max_workers=params.workers) as pool:
            finals = list(pool.map(chain, range(params.restarts)))
    else:
        finals = [chain(r) for r in range(params.restarts)]

    samples = [Sample(bits, qubo_objective(instance, bits)) for bits in finals]
    result = build_result(samples, SolverBackend.ANNEALER, time.perf_counter() - start)
    logger.debug(
        "退火完成: NK=%d, %d 条链 x %d 轮, 最优能量 %.6g",
        instance.size,
        params.restarts,
        params.sweeps,
        result.best_energy,
    )
    return result


class AnnealerSolver(QuboSolver):
    """本地模拟退火后端 / Local simulated annealing backend."""

    backend = SolverBackend.ANNEALER

    async def solve(self, request: SolveRequest) -> SolveResult:
        return await asyncio.to_thread(
            solve_annealer, request.instance, request.annealer_params, request.seed
        )
