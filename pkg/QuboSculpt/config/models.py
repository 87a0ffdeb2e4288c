"""
配置模型 - 实验配置的 pydantic 模型
Config models - pydantic models of the experiment configuration.
"""

from __future__ import annotations

from typing import Any

from pydantic import BaseModel, ConfigDict, Field, model_validator

from QuboSculpt.acoustics.scene import Microphone, Monopole
from QuboSculpt.kernel.errors import AcousticsError
from QuboSculpt.optimizer.params import OptimizerParams
from QuboSculpt.solver.base import SolverSettings

Vector3 = tuple[float, float, float]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class MeshSettings(_Section):
    """初始球面格点 / Initial sphere lattice."""

    n_theta: int = Field(default=4, ge=3)
    n_phi: int = Field(default=8, ge=3)


class MicrophoneSettings(_Section):
    """麦克风矩形 / Microphone rectangle."""

    center: Vector3 = (2.0, 0.0, 0.0)
    half_axis_u: Vector3 = (0.0, 2.0, 0.0)
    half_axis_v: Vector3 = (0.0, 0.0, 1.15)

    def build(self) -> Microphone:
        return Microphone(
            center=self.center,
            half_axis_u=self.half_axis_u,
            half_axis_v=self.half_axis_v,
        )


class AcousticsSettings(_Section):
    shadow_test: bool = False
    trace_rays: int = Field(default=300, ge=0)


class OutputSettings(_Section):
    # 是否在 history.csv 中写入耗时（写入后文件不再逐字节可复现）
    record_wall_time: bool = False
    snapshots: bool = True


class ExperimentConfig(_Section):
    """
    实验配置
    Experiment configuration.
    """

    mesh: MeshSettings = Field(default_factory=MeshSettings)
    monopole: Vector3 = (2.5, 0.0, 0.0)
    microphone: MicrophoneSettings = Field(default_factory=MicrophoneSettings)
    acoustics: AcousticsSettings = Field(default_factory=AcousticsSettings)
    optimizer: OptimizerParams = Field(default_factory=OptimizerParams)
    solver: SolverSettings = Field(default_factory=SolverSettings)
    output_dir: str | None = None
    output: OutputSettings = Field(default_factory=OutputSettings)
    log_level: str = "INFO"

    @model_validator(mode="after")
    def _link_sections(self) -> ExperimentConfig:
        try:
            self.microphone.build()
        except AcousticsError as exc:
            raise ValueError(str(exc)) from exc
        self.optimizer.solver = self.solver
        return self

    def build_monopole(self) -> Monopole:
        return Monopole(position=self.monopole)

    def build_microphone(self) -> Microphone:
        return self.microphone.build()

    def to_dict(self) -> dict[str, Any]:
        """完整的 JSON 形式（含全部默认值） / Full JSON form with every default."""
        return self.model_dump(mode="json", by_alias=True)
