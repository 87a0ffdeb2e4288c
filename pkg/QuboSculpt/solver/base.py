"""
求解器基类 - 请求、结果与所有 QUBO 后端的抽象
Solver base - request, result and the abstraction shared by every QUBO backend.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import ClassVar

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from QuboSculpt.kernel.errors import SolverConfigError, SolverError
from QuboSculpt.qubo.model import QuboInstance, bits_rank


class SolverBackend(str, Enum):
    """求解后端枚举 / Solver backend enum."""

    EXHAUSTIVE = "exhaustive"
    ANNEALER = "annealer"
    REMOTE = "remote"


class AnnealerParams(BaseModel):
    """
    模拟退火参数；温度缺省时按实例的最大项绝对值推导
    Simulated annealing parameters; missing temperatures derive from the instance's
    largest entry magnitude.
    """

    model_config = ConfigDict(extra="forbid")

    sweeps: int = Field(default=200, ge=1)
    restarts: int = Field(default=20, ge=1)
    initial_temperature: float | None = Field(default=None, gt=0)
    final_temperature: float | None = Field(default=None, gt=0)
    # one-hot 块内的交换移动
    block_moves: bool = True
    # 并行运行的链数
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check_schedule(self) -> AnnealerParams:
        t0, t1 = self.initial_temperature, self.final_temperature
        if t0 is not None and t1 is not None and t0 < t1:
            raise ValueError(
                f"initial_temperature {t0} must not be below final_temperature {t1}"
            )
        return self

    def schedule(self, max_abs_entry: float) -> tuple[float, float]:
        """
        (初始温度, 最终温度)
        (initial, final) temperatures.
        """
        scale = max_abs_entry if max_abs_entry > 0.0 else 1.0
        t0 = self.initial_temperature if self.initial_temperature is not None else scale
        t1 = (
            self.final_temperature
            if self.final_temperature is not None
            else 1e-3 * min(t0, scale)
        )
        if t0 < t1:
            raise SolverConfigError(
                f"initial temperature {t0} is below final temperature {t1}"
            )
        return t0, t1


class RemoteSettings(BaseModel):
    """远程采样器设置 / Remote sampler settings."""

    model_config = ConfigDict(extra="forbid")

    endpoint: str | None = None
    timeout: float = Field(default=30.0, gt=0)
    # 连接失败或超时时的最大尝试次数
    attempts: int = Field(default=3, ge=1)


class SolverSettings(BaseModel):
    """
    求解请求模板（实例与种子在每次迭代时填入）
    Solve request template; instance and seed are filled in per iteration.
    """

    model_config = ConfigDict(extra="forbid")

    backend: SolverBackend = SolverBackend.ANNEALER
    num_reads: int = Field(default=10, ge=1)
    annealer: AnnealerParams = Field(default_factory=AnnealerParams)
    remote: RemoteSettings = Field(default_factory=RemoteSettings)

    def request(self, instance: QuboInstance, seed: int) -> SolveRequest:
        return SolveRequest(
            instance=instance,
            num_reads=self.num_reads,
            backend=self.backend,
            annealer_params=self.annealer,
            seed=seed,
            remote=self.remote,
        )


@dataclass(frozen=True, eq=False)
class Sample:
    """
    一个采样结果
    One sample.
    """

    bits: np.ndarray
    energy: float
    multiplicity: int = 1

    def sort_key(self) -> tuple[float, int]:
        return self.energy, bits_rank(self.bits)


@dataclass(frozen=True)
class SolveRequest:
    """
    求解请求
    Solve request.
    """

    instance: QuboInstance
    num_reads: int = 1
    backend: SolverBackend = SolverBackend.ANNEALER
    annealer_params: AnnealerParams = field(default_factory=AnnealerParams)
    seed: int = 0
    remote: RemoteSettings = field(default_factory=RemoteSettings)

    def __post_init__(self) -> None:
        if self.num_reads < 1:
            raise SolverConfigError(f"num_reads must be positive, got {self.num_reads}")
        if self.seed < 0:
            raise SolverConfigError(f"seed must be non-negative, got {self.seed}")
        try:
            backend = SolverBackend(self.backend)
        except ValueError as exc:
            raise SolverConfigError(f"unknown backend: {self.backend}") from exc
        object.__setattr__(self, "backend", backend)


@dataclass(frozen=True, eq=False)
class SolveResult:
    """
    求解结果：样本按 (能量, 比特排序键) 升序排列，best 为第一个样本
    Solve result: samples sorted by (energy, bit rank) ascending; best is the first.
    """

    best_bits: np.ndarray
    best_energy: float
    samples: list[Sample]
    backend_used: SolverBackend
    # 秒
    wall_time: float = 0.0


def merge_samples(samples: list[Sample]) -> list[Sample]:
    """
    合并相同比特串并排序
    Merge identical bitstrings and sort.
    """
    merged: dict[bytes, Sample] = {}
    for sample in samples:
        bits = np.asarray(sample.bits, dtype=np.int8)
        key = bits.tobytes()
        if key in merged:
            prev = merged[key]
            merged[key] = Sample(
                prev.bits, prev.energy, prev.multiplicity + sample.multiplicity
            )
        else:
            merged[key] = Sample(bits, float(sample.energy), sample.multiplicity)
    return sorted(merged.values(), key=Sample.sort_key)


def build_result(
    samples: list[Sample], backend: SolverBackend, wall_time: float
) -> SolveResult:
    """由样本构造结果 / Assemble a result from samples."""
    ordered = merge_samples(samples)
    if not ordered:
        raise SolverError("solver returned no samples")
    best = ordered[0]
    return SolveResult(
        best_bits=best.bits,
        best_energy=best.energy,
        samples=ordered,
        backend_used=backend,
        wall_time=wall_time,
    )


class QuboSolver(ABC):
    """
    QUBO 求解器基类
    QUBO solver base.
    """

    backend: ClassVar[SolverBackend]

    @abstractmethod
    async def solve(self, request: SolveRequest) -> SolveResult:
        """求解 / Solve."""
        ...
