"""
优化参数
Optimizer parameters.
"""

from __future__ import annotations

import logging
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, model_validator

from QuboSculpt.solver.base import SolverSettings

logger = logging.getLogger(__name__)


class SearchMode(str, Enum):
    """
    搜索模式：comma 为 (1,K)，全部 K 个变异随机；plus 为 (1+[K−1])，变异 1 固定为零位移
    Search mode: comma is (1,K) with all K mutations random; plus is (1+[K−1]) with
    mutation 1 fixed to the zero displacement.
    """

    COMMA = "comma"
    PLUS = "plus"


class OptimizerParams(BaseModel):
    """
    优化循环参数
    Optimization loop parameters.
    """

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    # 每个顶点的变异数
    k: int = Field(default=3, ge=1, alias="K")
    # 步长控制 β
    beta: float = Field(default=0.7, gt=0)
    # 衰减指数 μ
    mu: float = Field(default=0.18, gt=0)
    iterations: int = Field(default=30, ge=1)
    search_mode: SearchMode = SearchMode.COMMA
    rays_per_simplex: int = Field(default=50, ge=1)
    seed: int = Field(default=0, ge=0)
    # 求解请求模板，由实验配置的 solver 段填入
    solver: SolverSettings = Field(default_factory=SolverSettings, exclude=True)
    # 求解结果不可行时的重试次数
    infeasible_retries: int = Field(default=3, ge=0)
    # 连续多少次零损失视为收敛
    convergence_window: int = Field(default=3, ge=1)
    # 损失表构建线程数
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check_mode(self) -> OptimizerParams:
        if self.search_mode is SearchMode.PLUS and self.k < 2:
            raise ValueError(
                "plus search mode needs K >= 2 (mutation 1 is the identity)"
            )
        if self.beta > 1.0:
            logger.warning("β=%.3g > 1, 顶点位移可能破坏凸性", self.beta)
        return self
