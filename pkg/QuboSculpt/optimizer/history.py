"""
运行历史 - 每次迭代的记录与汇总
Run history - per-iteration records and the run summary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from QuboSculpt.geometry.mesh import Mesh
from QuboSculpt.utils.io import format_float

HISTORY_HEADER = (
    "t",
    "loss_before",
    "loss_after",
    "solver_energy",
    "feasible",
    "wall_ms",
)


@dataclass
class IterationRecord:
    """
    一次迭代的记录
    One iteration's record.
    """

    # 迭代序号，从 1 开始
    t: int
    loss_before: float
    loss_after: float
    # 每个顶点选中的变异（从 1 开始）
    configuration: tuple[int, ...]
    solver_energy: float
    # 求解器最优样本是否满足 one-hot
    feasible: bool
    # 选中配置与恒等配置的边求和代理损失
    surrogate: float = 0.0
    identity_surrogate: float = 0.0
    # 求解尝试次数
    attempts: int = 1
    wall_ms: float = 0.0

    def csv_row(self, record_wall_time: bool = False) -> list[str]:
        return [
            str(self.t),
            format_float(self.loss_before),
            format_float(self.loss_after),
            format_float(self.solver_energy),
            "true" if self.feasible else "false",
            format_float(round(self.wall_ms, 3)) if record_wall_time else "",
        ]

    def to_dict(self) -> dict[str, Any]:
        return {
            "t": self.t,
            "loss_before": self.loss_before,
            "loss_after": self.loss_after,
            "configuration": list(self.configuration),
            "solver_energy": self.solver_energy,
            "feasible": self.feasible,
            "surrogate": self.surrogate,
            "identity_surrogate": self.identity_surrogate,
            "attempts": self.attempts,
            "wall_ms": self.wall_ms,
        }


@dataclass
class RunHistory:
    """
    一次优化运行的历史
    History of one optimization run.
    """

    initial_loss: float
    records: list[IterationRecord] = field(default_factory=list)
    final_mesh: Mesh | None = None
    converged: bool = False
    wall_time: float = 0.0

    @property
    def iterations_run(self) -> int:
        return len(self.records)

    @property
    def final_loss(self) -> float:
        return self.records[-1].loss_after if self.records else self.initial_loss

    @property
    def loss_history(self) -> list[float]:
        return [self.initial_loss] + [r.loss_after for r in self.records]

    @property
    def stop_reason(self) -> str:
        return "converged" if self.converged else "iterations"

    def summary(self, seed: int, backend: str) -> dict[str, Any]:
        """运行摘要 / Run summary."""
        return {
            "initial_loss": self.initial_loss,
            "final_loss": self.final_loss,
            "iterations_run": self.iterations_run,
            "seed": seed,
            "backend": backend,
            "converged": self.converged,
            "stop_reason": self.stop_reason,
            "loss_history": self.loss_history,
            "wall_time_s": self.wall_time,
        }
