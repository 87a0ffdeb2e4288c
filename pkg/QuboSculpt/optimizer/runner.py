"""
优化循环 - 变异、损失表、QUBO、求解、解码、应用配置
Optimization loop - mutate, tabulate losses, build the QUBO, solve, decode and
apply the configuration.

迭代之间顺序执行；迭代内部的损失表与退火链可以并行，结果确定。
Iterations run in sequence; inside one iteration the loss table and annealing
chains may run in parallel with a deterministic result.
"""

from __future__ import annotations

import asyncio
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from QuboSculpt.acoustics.loss import (
    build_partial_loss_table,
    ensure_source_outside,
    total_loss,
)
from QuboSculpt.acoustics.scene import Microphone, Monopole
from QuboSculpt.geometry.mesh import (
    AREA_TOLERANCE,
    Mesh,
    apply_configuration,
    triangle_areas,
)
from QuboSculpt.kernel.errors import (
    InfeasibleResultError,
    OptimizationError,
    QuboSculptError,
)
from QuboSculpt.kernel.seeding import (
    TAG_EVALUATION,
    TAG_LOSS_TABLE,
    TAG_MUTATION,
    TAG_SOLVER,
    SeedStream,
)
from QuboSculpt.kernel.signal_hub import SignalHub, SignalKind
from QuboSculpt.optimizer.history import IterationRecord, RunHistory
from QuboSculpt.optimizer.mutation import MutationSet, generate_mutations
from QuboSculpt.optimizer.params import OptimizerParams, SearchMode
from QuboSculpt.qubo.builder import build_qubo, decode_bitstring, loss_objective
from QuboSculpt.qubo.model import Configuration, QuboInstance
from QuboSculpt.solver.base import SolveResult
from QuboSculpt.solver.registry import SolverRegistry, solve

logger = logging.getLogger(__name__)


@dataclass
class OptimizationContext:
    """
    优化上下文：声学场景与运行事件
    Optimization context: the acoustic scene and run events.
    """

    monopole: Monopole
    mic: Microphone
    # 是否做声源到采样点的遮挡检测
    shadow_test: bool = False
    hub: SignalHub = field(default_factory=SignalHub)
    registry: SolverRegistry | None = None


def evaluation_stream(stream: SeedStream) -> SeedStream:
    """
    总损失求值流，所有迭代共用，相同网格得到相同损失
    Total-loss stream shared by every iteration, so equal meshes get equal losses.
    """
    return stream.child(TAG_EVALUATION)


def mutation_stream(stream: SeedStream, t: int, attempt: int = 0) -> SeedStream:
    return stream.child(TAG_MUTATION, t, attempt)


def loss_table_stream(stream: SeedStream, t: int) -> SeedStream:
    return stream.child(TAG_LOSS_TABLE, t)


def solver_seed(stream: SeedStream, t: int, attempt: int = 0) -> int:
    return stream.child(TAG_SOLVER, t, attempt).derive_seed()


def evaluate_mesh(
    mesh: Mesh,
    params: OptimizerParams,
    context: OptimizationContext,
    stream: SeedStream,
) -> float:
    """当前网格的总损失 / Total loss of a mesh."""
    return total_loss(
        mesh,
        context.monopole,
        context.mic,
        params.rays_per_simplex,
        evaluation_stream(stream),
        shadow_test=context.shadow_test,
    )


def _first_feasible(
    result: SolveResult, qubo: QuboInstance
) -> Configuration | None:
    for sample in result.samples:
        try:
            return decode_bitstring(sample.bits, qubo.index_map)
        except InfeasibleResultError:
            continue
    return None


async def run_iteration(
    mesh: Mesh,
    t: int,
    params: OptimizerParams,
    context: OptimizationContext,
    stream: SeedStream | None = None,
    loss_before: float | None = None,
    mutations: MutationSet | None = None,
) -> tuple[Mesh, IterationRecord]:
    """
    执行一次迭代
    Run one iteration.

    最优样本不可行时取最优的可行样本；没有可行样本则重试，每次重试都重新抽取
    变异集合并使用新的求解种子。重试耗尽后 plus 模式应用恒等配置，comma 模式报错。
    传入 mutations 时使用给定的变异集合（重试时仍使用同一集合）。
    An infeasible best sample falls back to the best feasible sample; with none,
    the iteration retries, and every retry redraws the mutation set and reseeds the
    solver. When retries run out plus mode applies the identity configuration and
    comma mode fails. Passing `mutations` pins the mutation set, retries included.
    """
    stream = stream or SeedStream(params.seed)
    start = time.perf_counter()
    try:
        if not mesh.is_closed:
            raise OptimizationError(t, "mesh is not closed")
        ensure_source_outside(mesh, context.monopole)
        if loss_before is None:
            loss_before = await asyncio.to_thread(
                evaluate_mesh, mesh, params, context, stream
            )

        chosen: Configuration | None = None
        feasible = False
        solver_energy = 0.0
        attempt = 0
        for attempt in range(params.infeasible_retries + 1):
            mutation_set = mutations or generate_mutations(
                mesh, t, params, mutation_stream(stream, t, attempt).generator()
            )
            table = await asyncio.to_thread(
                build_partial_loss_table,
                mesh,
                mutation_set,
                context.monopole,
                context.mic,
                params.rays_per_simplex,
                loss_table_stream(stream, t),
                context.shadow_test,
                params.workers,
            )
            qubo = build_qubo(mesh, table)
            request = params.solver.request(qubo, solver_seed(stream, t, attempt))
            result = await solve(request, context.registry)
            solver_energy = result.best_energy
            try:
                chosen = decode_bitstring(result.best_bits, qubo.index_map)
                feasible = True
                break
            except InfeasibleResultError as exc:
                logger.warning("第 %d 次迭代求解结果不可行: %s", t, exc)
                await context.hub.emit_new(
                    SignalKind.SOLVER_INFEASIBLE,
                    payload=exc,
                    source=__name__,
                    iteration=t,
                    attempt=attempt,
                )
                chosen = _first_feasible(result, qubo)
                if chosen is not None:
                    break

        if chosen is None:
            if params.search_mode is not SearchMode.PLUS:
                raise OptimizationError(
                    t,
                    f"no feasible configuration after {params.infeasible_retries + 1} "
                    "solve attempt(s)",
                )
            logger.warning("第 %d 次迭代没有可行样本, 应用恒等配置", t)
            chosen = Configuration.identity(mesh.n_vertices)

        new_mesh = apply_configuration(mesh, mutation_set, chosen.assignment)
        areas = triangle_areas(new_mesh.triangles())
        if np.any(areas < AREA_TOLERANCE):
            logger.warning(
                "第 %d 次迭代后出现退化三角形: %s",
                t,
                np.flatnonzero(areas < AREA_TOLERANCE).tolist(),
            )
        loss_after = await asyncio.to_thread(
            evaluate_mesh, new_mesh, params, context, stream
        )
    except OptimizationError:
        raise
    except QuboSculptError as exc:
        raise OptimizationError(t, f"[{exc.code}] {exc}") from exc

    identity = Configuration.identity(mesh.n_vertices)
    record = IterationRecord(
        t=t,
        loss_before=float(loss_before),
        loss_after=float(loss_after),
        configuration=chosen.assignment,
        solver_energy=float(solver_energy),
        feasible=feasible,
        surrogate=loss_objective(qubo, chosen.to_bits(qubo.index_map)),
        identity_surrogate=loss_objective(qubo, identity.to_bits(qubo.index_map)),
        attempts=attempt + 1,
        wall_ms=(time.perf_counter() - start) * 1000.0,
    )
    logger.info(
        "迭代 %d: 损失 %.4f -> %.4f, 能量 %.6g%s",
        t,
        record.loss_before,
        record.loss_after,
        record.solver_energy,
        "" if feasible else " (不可行)",
    )
    return new_mesh, record


async def optimize(
    initial_mesh: Mesh,
    params: OptimizerParams,
    context: OptimizationContext,
) -> RunHistory:
    """
    运行至多 iterations 次迭代；连续 convergence_window 次总损失为零时提前停止
    Run up to `iterations` iterations, stopping early after `convergence_window`
    consecutive zero-loss iterations.

    声源不在初始网格外部时直接抛出 AcousticsError；
    任一迭代出错时中止，OptimizationError.history 保留已完成的记录。
    A monopole that is not outside the initial mesh raises AcousticsError up front.
    Any iteration error aborts the run; OptimizationError.history keeps the
    completed records.
    """
    ensure_source_outside(initial_mesh, context.monopole)
    stream = SeedStream(params.seed)
    start = time.perf_counter()
    initial_loss = await asyncio.to_thread(
        evaluate_mesh, initial_mesh, params, context, stream
    )
    history = RunHistory(initial_loss=initial_loss)
    await context.hub.emit_new(
        SignalKind.RUN_STARTED, payload=initial_mesh, source=__name__, params=params
    )
    logger.info(
        "开始优化: 初始损失 %.4f, 最多 %d 次迭代, K=%d, β=%.3g, μ=%.3g",
        initial_loss,
        params.iterations,
        params.k,
        params.beta,
        params.mu,
    )

    mesh = initial_mesh
    loss = initial_loss
    zero_streak = 0
    for t in range(1, params.iterations + 1):
        try:
            mesh, record = await run_iteration(
                mesh, t, params, context, stream, loss_before=loss
            )
        except OptimizationError as exc:
            history.final_mesh = mesh
            history.wall_time = time.perf_counter() - start
            exc.history = history
            logger.error("优化在第 %d 次迭代中止: %s", t, exc)
            raise
        history.records.append(record)
        loss = record.loss_after
        await context.hub.emit_new(
            SignalKind.ITERATION_COMPLETED, payload=record, source=__name__, mesh=mesh
        )
        zero_streak = zero_streak + 1 if loss == 0.0 else 0
        if zero_streak >= params.convergence_window:
            history.converged = True
            logger.info("连续 %d 次迭代损失为零, 已收敛", zero_streak)
            break

    history.final_mesh = mesh
    history.wall_time = time.perf_counter() - start
    await context.hub.emit_new(
        SignalKind.RUN_FINISHED, payload=history, source=__name__
    )
    logger.info(
        "优化结束: %d 次迭代, 损失 %.4f -> %.4f",
        history.iterations_run,
        history.initial_loss,
        history.final_loss,
    )
    return history
