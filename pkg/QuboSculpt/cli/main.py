"""
CLI 主入口 - 使用 Click 框架
CLI main entry - using Click framework.

领域错误输出单行 "error[<code>]: <message>" 并以 1 退出；意外错误以 2 退出。
Domain errors print a single "error[<code>]: <message>" line and exit with 1;
unexpected errors exit with 2.
"""

from __future__ import annotations

import asyncio
import functools
import logging
import math
import os
import sys
from collections.abc import Callable
from typing import Any

import click

from QuboSculpt.kernel.errors import OptimizationError, QuboSculptError

logger = logging.getLogger("QuboSculpt.cli")

BACKENDS = ("exhaustive", "annealer", "remote")


def _fail(code: str, message: str, status: int) -> None:
    line = " ".join(str(message).split())
    click.echo(f"error[{code}]: {line}", err=True)
    sys.exit(status)


def handle_errors(func: Callable[..., Any]) -> Callable[..., Any]:
    """把异常转换为单行错误与退出码 / Map exceptions to one error line and a status."""

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except click.ClickException:
            raise
        except QuboSculptError as exc:
            logger.debug("命令失败", exc_info=True)
            _fail(exc.code, str(exc), 1)
        except Exception as exc:
            logger.exception("未预期的错误")
            _fail("internal", f"{type(exc).__name__}: {exc}", 2)

    return wrapper


def experiment_options(func: Callable[..., Any]) -> Callable[..., Any]:
    """所有实验命令共用的选项 / Options shared by every experiment command."""
    options = [
        click.option(
            "--config",
            "config_path",
            type=click.Path(dir_okay=False),
            help="JSON 配置文件",
        ),
        click.option("--preset", help="实验预设 (sphere-front / offset-source)"),
        click.option("--seed", type=int, help="主随机种子"),
        click.option("--backend", type=click.Choice(BACKENDS), help="求解后端"),
        click.option("--iterations", type=int, help="最大迭代次数"),
        click.option("--beta", type=float, help="步长控制 β"),
        click.option("--mu", type=float, help="衰减指数 μ"),
        click.option(
            "--out", "out", type=click.Path(file_okay=False), help="输出目录"
        ),
        click.option("--log-level", default=None, help="日志级别"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def load_experiment(
    config_path: str | None,
    preset: str | None,
    overrides: dict[str, Any],
) -> Any:
    """
    默认值 < 预设 < 配置文件 < 命令行参数
    Defaults < preset < config file < command-line flags.
    """
    from QuboSculpt.config.defaults import build_default_config
    from QuboSculpt.config.manager import ConfigManager

    manager = ConfigManager(build_default_config(preset), config_path)
    manager.load()
    for key, value in overrides.items():
        if value is not None:
            manager.set(key, value)
    return manager.validate()


def _overrides(opts: dict[str, Any]) -> dict[str, Any]:
    """命令行参数到配置键 / Command-line flags to config keys."""
    return {
        "optimizer.seed": opts["seed"],
        "solver.backend": opts["backend"],
        "optimizer.iterations": opts["iterations"],
        "optimizer.beta": opts["beta"],
        "optimizer.mu": opts["mu"],
        "output_dir": opts["out"],
        "log_level": opts["log_level"],
    }


def prepare_output(config: Any) -> str:
    """解析输出目录、写入生效配置并开启文件日志 / Resolve output, save config, log."""
    from QuboSculpt.config.manager import ConfigManager
    from QuboSculpt.utils.logging import setup_logging
    from QuboSculpt.utils.paths import get_output_path

    output_dir = get_output_path(config.output_dir)
    setup_logging(config.log_level, log_file=os.path.join(output_dir, "run.log"))
    ConfigManager.save_resolved(config, output_dir)
    return output_dir


def _initial_mesh(config: Any, mesh_path: str | None) -> Any:
    from QuboSculpt.geometry import generate_sphere_mesh, load_mesh

    if mesh_path:
        return load_mesh(mesh_path)
    return generate_sphere_mesh(config.mesh.n_theta, config.mesh.n_phi)


@click.group()
def cli() -> None:
    """QuboSculpt - 基于 QUBO 的声学形状优化"""
    from QuboSculpt.utils.logging import setup_logging

    setup_logging("WARNING")


@cli.command()
@experiment_options
@click.option("--n-theta", type=int, help="纬向格点数")
@click.option("--n-phi", type=int, help="经向格点数")
@handle_errors
def generate(n_theta: int | None, n_phi: int | None, **opts: Any) -> None:
    """生成初始球面网格 / Generate the initial sphere mesh."""
    from QuboSculpt.cli.artifacts import INITIAL_MESH_FILE
    from QuboSculpt.geometry import export_mesh, generate_sphere_mesh

    overrides = _overrides(opts)
    overrides.update({"mesh.n_theta": n_theta, "mesh.n_phi": n_phi})
    config = load_experiment(opts["config_path"], opts["preset"], overrides)
    mesh = generate_sphere_mesh(config.mesh.n_theta, config.mesh.n_phi)
    output_dir = prepare_output(config)
    path = export_mesh(mesh, os.path.join(output_dir, INITIAL_MESH_FILE))

    euler = mesh.euler_characteristic
    click.echo(f"V={mesh.n_vertices} E={mesh.n_edges} S={mesh.n_simplices}")
    click.echo(f"euler characteristic {euler}: {'PASS' if euler == 2 else 'FAIL'}")
    click.echo(f"mesh written to {path}")


@cli.command()
@experiment_options
@click.argument("mesh_file", required=False, type=click.Path(dir_okay=False))
@handle_errors
def evaluate(mesh_file: str | None, **opts: Any) -> None:
    """计算总损失并写出单元着色表 / Total loss and per-simplex shading CSV."""
    from QuboSculpt.acoustics import ensure_source_outside, shade_partial_loss
    from QuboSculpt.cli.artifacts import write_shading
    from QuboSculpt.kernel.seeding import SeedStream
    from QuboSculpt.optimizer.runner import evaluation_stream

    overrides = _overrides(opts)
    config = load_experiment(opts["config_path"], opts["preset"], overrides)
    mesh = _initial_mesh(config, mesh_file)
    monopole = config.build_monopole()
    ensure_source_outside(mesh, monopole)
    output_dir = prepare_output(config)

    rows = shade_partial_loss(
        mesh,
        monopole,
        config.build_microphone(),
        config.optimizer.rays_per_simplex,
        evaluation_stream(SeedStream(config.optimizer.seed)),
        shadow_test=config.acoustics.shadow_test,
    )
    total = math.fsum(r.loss for r in rows)
    path = write_shading(output_dir, rows)
    click.echo(f"total loss: {total!r}")
    click.echo(f"shading written to {path} ({len(rows)} simplices)")


@cli.command()
@experiment_options
@click.option(
    "--mesh", "mesh_file", type=click.Path(dir_okay=False), help="初始网格文件"
)
@handle_errors
def optimize(mesh_file: str | None, **opts: Any) -> None:
    """运行形状优化 / Run the shape optimization."""
    from QuboSculpt.acoustics import ensure_source_outside
    from QuboSculpt.cli.artifacts import RunArtifacts, write_summary
    from QuboSculpt.optimizer.runner import OptimizationContext
    from QuboSculpt.optimizer.runner import optimize as run_optimize

    overrides = _overrides(opts)
    config = load_experiment(opts["config_path"], opts["preset"], overrides)
    mesh = _initial_mesh(config, mesh_file)
    monopole = config.build_monopole()
    ensure_source_outside(mesh, monopole)
    output_dir = prepare_output(config)

    context = OptimizationContext(
        monopole=monopole,
        mic=config.build_microphone(),
        shadow_test=config.acoustics.shadow_test,
    )
    RunArtifacts(output_dir, config.output).attach(context.hub)
    seed = config.optimizer.seed
    backend = config.solver.backend.value

    try:
        history = asyncio.run(run_optimize(mesh, config.optimizer, context))
    except OptimizationError as exc:
        if exc.history is not None:
            write_summary(output_dir, exc.history, seed, backend, error=str(exc))
        raise

    write_summary(output_dir, history, seed, backend)
    click.echo(
        f"loss {history.initial_loss!r} -> {history.final_loss!r} "
        f"after {history.iterations_run} iteration(s) ({history.stop_reason})"
    )


@cli.command()
@experiment_options
@click.argument("mesh_file", required=False, type=click.Path(dir_okay=False))
@click.option("--rays", type=int, help="投射的声线数")
@handle_errors
def trace(mesh_file: str | None, rays: int | None, **opts: Any) -> None:
    """追踪声线并写出 rays.csv / Trace rays and write rays.csv."""
    from QuboSculpt.acoustics import ensure_source_outside, trace_rays
    from QuboSculpt.cli.artifacts import write_rays
    from QuboSculpt.kernel.seeding import TAG_TRACE, SeedStream

    overrides = _overrides(opts)
    overrides["acoustics.trace_rays"] = rays
    config = load_experiment(opts["config_path"], opts["preset"], overrides)
    mesh = _initial_mesh(config, mesh_file)
    monopole = config.build_monopole()
    ensure_source_outside(mesh, monopole)
    output_dir = prepare_output(config)

    records = trace_rays(
        mesh,
        monopole,
        config.build_microphone(),
        config.acoustics.trace_rays,
        SeedStream(config.optimizer.seed).child(TAG_TRACE),
    )
    path = write_rays(output_dir, records)
    hits = sum(r.hits_mic for r in records)
    click.echo(f"{len(records)} rays traced, {hits} reach the microphone")
    click.echo(f"rays written to {path}")


@cli.command()
@click.option("--host", default="127.0.0.1", help="监听地址")
@click.option("--port", default=8765, type=int, help="监听端口")
@click.option("--config", "config_path", type=click.Path(dir_okay=False))
@click.option("--seed", type=int, help="采样种子")
@handle_errors
def serve(host: str, port: int, config_path: str | None, seed: int | None) -> None:
    """以远程协议提供本地退火器 / Serve the annealer over the remote protocol."""
    from QuboSculpt.solver.service import SamplerService
    from QuboSculpt.utils.logging import setup_logging

    config = load_experiment(config_path, None, {"optimizer.seed": seed})
    setup_logging(config.log_level)
    service = SamplerService(
        config.solver.annealer, seed=config.optimizer.seed, host=host, port=port
    )
    try:
        asyncio.run(service.run())
    except KeyboardInterrupt:
        logger.info("收到键盘中断信号")


@cli.command()
def info() -> None:
    """显示版本信息 / Show version info."""
    from QuboSculpt import __app_name__, __version__
    from QuboSculpt.config.defaults import PRESETS

    click.echo(f"{__app_name__} v{__version__}")
    click.echo(f"backends: {', '.join(BACKENDS)}")
    click.echo(f"presets: {', '.join(sorted(PRESETS))}")
