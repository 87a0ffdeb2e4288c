"""
优化模块测试
Optimizer module tests.
"""

from __future__ import annotations

import itertools

import numpy as np
import pytest
from conftest import TETRA_FACES, tetrahedron_points
from pydantic import ValidationError
from scipy import stats

from QuboSculpt.acoustics import Monopole, build_partial_loss_table
from QuboSculpt.geometry import build_mesh
from QuboSculpt.kernel.errors import (
    AcousticsError,
    ConfigError,
    MeshError,
    OptimizationError,
)
from QuboSculpt.kernel.seeding import SeedStream
from QuboSculpt.kernel.signal_hub import SignalKind
from QuboSculpt.optimizer import (
    MutationSet,
    OptimizationContext,
    OptimizerParams,
    SearchMode,
    convexity_bound,
    convexity_bounds,
    generate_mutations,
    mutation_radius,
    optimize,
    run_iteration,
)
from QuboSculpt.optimizer.mutation import random_displacements
from QuboSculpt.optimizer.runner import evaluate_mesh, loss_table_stream
from QuboSculpt.qubo import Configuration, bits_rank, build_qubo, loss_objective
from QuboSculpt.solver import AnnealerParams, SolverBackend, SolverSettings
from QuboSculpt.solver.base import QuboSolver, Sample, build_result
from QuboSculpt.solver.registry import SolverRegistry
from QuboSculpt.solver.remote import ENDPOINT_ENV

EXHAUSTIVE = SolverSettings(backend="exhaustive", num_reads=1)
SMALL_ANNEALER = SolverSettings(
    backend="annealer", annealer=AnnealerParams(sweeps=30, restarts=3)
)


def small_params(**overrides) -> OptimizerParams:
    values = {"K": 2, "iterations": 2, "rays_per_simplex": 5, "solver": SMALL_ANNEALER}
    values.update(overrides)
    return OptimizerParams(**values)


def test_convexity_bound_on_unit_tetrahedron(tetrahedron):
    for i in range(4):
        assert convexity_bound(tetrahedron, i) == pytest.approx(1.0 / 3.0, abs=1e-12)


def test_convexity_bound_scales_with_mesh():
    mesh = build_mesh(tetrahedron_points(2.0), TETRA_FACES)
    np.testing.assert_allclose(convexity_bounds(mesh), 2.0 / 3.0, atol=1e-12)


def test_mutation_radius():
    assert mutation_radius(10, 0.7, 0.18, 1.0) == pytest.approx(0.7 * 10**-0.18, abs=1e-12)
    assert mutation_radius(1, 0.7, 0.18, 0.5) == pytest.approx(0.35)
    with pytest.raises(ConfigError):
        mutation_radius(0, 0.7, 0.18, 1.0)


def test_displacement_distribution():
    rng = np.random.default_rng(123)
    disp = random_displacements(np.ones(4000), 1, rng)[:, 0]
    r = np.linalg.norm(disp, axis=1)
    theta = np.arccos(np.clip(disp[:, 2] / r, -1.0, 1.0))

    assert np.all(r < 1.0)
    assert stats.kstest(r, "uniform").pvalue > 1e-3
    assert stats.kstest(theta, "uniform", args=(0.0, np.pi)).pvalue > 1e-3


def test_generate_mutations_respect_radius(sphere):
    params = OptimizerParams(K=3)
    mutations = generate_mutations(sphere, 4, params, np.random.default_rng(0))

    assert mutations.displacements.shape == (sphere.n_vertices, 3, 3)
    expected = [mutation_radius(4, 0.7, 0.18, rho) for rho in convexity_bounds(sphere)]
    np.testing.assert_allclose(mutations.radii, expected)
    norms = np.linalg.norm(mutations.displacements, axis=2)
    assert np.all(norms < mutations.radii[:, None])


def test_plus_mode_keeps_the_incumbent(sphere):
    params = OptimizerParams(K=3, search_mode="plus")
    mutations = generate_mutations(sphere, 1, params, np.random.default_rng(0))
    assert not np.any(mutations.displacements[:, 0])
    assert np.all(np.linalg.norm(mutations.displacements[:, 1:], axis=2) > 0)


def test_plus_mode_needs_two_mutations():
    with pytest.raises(ValidationError, match="plus"):
        OptimizerParams(K=1, search_mode=SearchMode.PLUS)


def test_convexity_bound_needs_three_neighbours():
    # 两个三角形背靠背：每个顶点只有两个邻居
    mesh = build_mesh(
        [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        [[0, 1, 2], [0, 2, 1]],
        reorient=False,
    )
    with pytest.raises(MeshError, match="neighbours"):
        convexity_bound(mesh, 0)


async def test_identity_mutations_leave_mesh_unchanged(tetrahedron, monopole, mic):
    params = OptimizerParams(K=1, rays_per_simplex=20, solver=EXHAUSTIVE)
    context = OptimizationContext(monopole=monopole, mic=mic)

    mesh, record = await run_iteration(
        tetrahedron, 1, params, context, mutations=MutationSet.identity(4)
    )

    np.testing.assert_array_equal(mesh.vertices, tetrahedron.vertices)
    assert record.configuration == (1, 1, 1, 1)
    assert record.feasible
    assert record.loss_after == record.loss_before
    assert record.surrogate == record.identity_surrogate


async def test_iteration_picks_surrogate_minimum(tetrahedron, monopole, mic):
    context = OptimizationContext(monopole=monopole, mic=mic)
    for seed in range(20):
        params = OptimizerParams(K=2, rays_per_simplex=10, seed=seed, solver=EXHAUSTIVE)
        stream = SeedStream(seed)
        mutations = generate_mutations(
            tetrahedron, 1, params, np.random.default_rng(seed)
        )

        _, record = await run_iteration(
            tetrahedron, 1, params, context, stream=stream, mutations=mutations
        )

        table = build_partial_loss_table(
            tetrahedron,
            mutations,
            monopole,
            mic,
            params.rays_per_simplex,
            loss_table_stream(stream, 1),
        )
        q = build_qubo(tetrahedron, table)
        scored = []
        for assignment in itertools.product((1, 2), repeat=4):
            bits = Configuration(assignment).to_bits(q.index_map)
            scored.append((loss_objective(q, bits), bits_rank(bits), assignment))
        best = min(scored)[0]
        winners = {a for value, _, a in scored if value <= best + 1e-9}

        assert record.configuration in winners
        assert record.surrogate == pytest.approx(best, abs=1e-9)


async def test_iteration_rejects_open_mesh(monopole, mic):
    open_mesh = build_mesh(tetrahedron_points(), TETRA_FACES[:3], require_closed=False)
    context = OptimizationContext(monopole=monopole, mic=mic)
    with pytest.raises(OptimizationError, match="not closed"):
        await run_iteration(open_mesh, 1, small_params(), context)


async def test_mesh_stays_closed_every_iteration(sphere, monopole, mic):
    context = OptimizationContext(monopole=monopole, mic=mic)
    seen = []

    def check(signal):
        mesh = signal.metadata["mesh"]
        assert mesh.is_closed
        assert mesh.euler_characteristic == 2
        seen.append(signal.payload.t)

    context.hub.connect(SignalKind.ITERATION_COMPLETED, check)
    history = await optimize(
        sphere, small_params(iterations=10, convergence_window=20), context
    )

    assert seen == list(range(1, 11))
    assert history.iterations_run == 10
    assert history.stop_reason == "iterations"
    assert len(history.loss_history) == 11


async def test_optimize_is_deterministic(sphere, monopole, mic):
    runs = []
    for workers in (1, 3):
        solver = SMALL_ANNEALER.model_copy(
            update={"annealer": AnnealerParams(sweeps=30, restarts=3, workers=workers)}
        )
        params = small_params(iterations=3, workers=workers, solver=solver)
        context = OptimizationContext(monopole=monopole, mic=mic)
        runs.append(await optimize(sphere, params, context))

    first, second = runs
    assert first.loss_history == second.loss_history
    assert [r.configuration for r in first.records] == [
        r.configuration for r in second.records
    ]
    np.testing.assert_array_equal(first.final_mesh.vertices, second.final_mesh.vertices)


async def test_optimize_stops_after_zero_loss_window(sphere, monopole, silent_mic):
    context = OptimizationContext(monopole=monopole, mic=silent_mic)
    events = []
    context.hub.connect(SignalKind.RUN_STARTED, lambda s: events.append("started"))
    context.hub.connect(SignalKind.RUN_FINISHED, lambda s: events.append("finished"))

    history = await optimize(sphere, small_params(iterations=10), context)

    assert history.converged
    assert history.stop_reason == "converged"
    assert history.iterations_run == 3
    assert history.final_loss == 0.0
    assert events == ["started", "finished"]


async def test_single_iteration_run(sphere, monopole, mic):
    context = OptimizationContext(monopole=monopole, mic=mic)
    history = await optimize(sphere, small_params(iterations=1), context)

    assert history.iterations_run == 1
    summary = history.summary(seed=0, backend="annealer")
    assert summary["iterations_run"] == 1
    assert summary["loss_history"] == [history.initial_loss, history.final_loss]
    assert summary["initial_loss"] == evaluate_mesh(
        sphere, small_params(), context, SeedStream(0)
    )


async def test_failure_keeps_partial_history(sphere, monopole, mic):
    context = OptimizationContext(monopole=monopole, mic=mic)
    failing = SolverSettings(backend="exhaustive")

    # NK = 18·2 超出穷举上限
    with pytest.raises(OptimizationError) as excinfo:
        await optimize(sphere, small_params(solver=failing), context)

    assert excinfo.value.iteration == 1
    assert "[solver]" in str(excinfo.value)
    assert excinfo.value.history.iterations_run == 0


class AllZeroSolver(QuboSolver):
    """总是返回全零（不可行）样本 / Always answers the all-zero, infeasible sample."""

    backend = SolverBackend.ANNEALER
    seeds: list[int] = []

    async def solve(self, request):
        self.seeds.append(request.seed)
        bits = np.zeros(request.instance.size, dtype=np.int8)
        return build_result([Sample(bits, 0.0)], self.backend, 0.0)


async def test_infeasible_retries_redraw_mutations(
    tetrahedron, monopole, mic, monkeypatch
):
    drawn = []

    def recording(*args, **kwargs):
        mutation_set = generate_mutations(*args, **kwargs)
        drawn.append(mutation_set)
        return mutation_set

    monkeypatch.setattr("QuboSculpt.optimizer.runner.generate_mutations", recording)
    monkeypatch.setattr(AllZeroSolver, "seeds", [])
    registry = SolverRegistry(register_builtins=False)
    registry.register_type(SolverBackend.ANNEALER, AllZeroSolver)
    context = OptimizationContext(monopole=monopole, mic=mic, registry=registry)
    params = small_params(search_mode="plus", infeasible_retries=2)

    new_mesh, record = await run_iteration(tetrahedron, 1, params, context)

    assert record.attempts == 3
    assert not record.feasible
    assert record.configuration == (1, 1, 1, 1)
    np.testing.assert_array_equal(new_mesh.vertices, tetrahedron.vertices)
    assert len(drawn) == 3
    for first, second in itertools.combinations(drawn, 2):
        assert not np.array_equal(first.displacements, second.displacements)
    assert len(set(AllZeroSolver.seeds)) == 3

    # 指定变异集合时每次重试都沿用
    drawn.clear()
    pinned = MutationSet.identity(tetrahedron.n_vertices, k=2)
    await run_iteration(tetrahedron, 1, params, context, mutations=pinned)
    assert drawn == []


async def test_invalid_remote_endpoint_keeps_partial_history(
    sphere, monopole, mic, monkeypatch
):
    monkeypatch.setenv(ENDPOINT_ENV, "not a url")
    context = OptimizationContext(monopole=monopole, mic=mic)
    remote = SolverSettings(backend="remote", num_reads=2)

    with pytest.raises(OptimizationError) as excinfo:
        await optimize(sphere, small_params(solver=remote), context)

    assert excinfo.value.iteration == 1
    assert "[solver]" in str(excinfo.value)
    assert excinfo.value.history is not None
    assert excinfo.value.history.iterations_run == 0


async def test_source_inside_mesh_is_rejected(sphere, mic):
    context = OptimizationContext(monopole=Monopole((0.0, 0.0, 0.0)), mic=mic)
    with pytest.raises(AcousticsError, match="not strictly outside"):
        await optimize(sphere, small_params(), context)

    with pytest.raises(OptimizationError, match=r"\[acoustics\]"):
        await run_iteration(sphere, 1, small_params(), context)


@pytest.mark.slow
async def test_front_source_experiment_reduces_loss(sphere, monopole, mic):
    reduced = 0
    for seed in range(5):
        context = OptimizationContext(monopole=monopole, mic=mic)
        history = await optimize(sphere, OptimizerParams(seed=seed), context)
        assert history.initial_loss > 0.0
        reduced += history.final_loss <= 0.1 * history.initial_loss
    assert reduced >= 2
