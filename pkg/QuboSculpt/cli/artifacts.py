"""
运行产物 - 订阅运行事件并写出快照、历史与摘要
Run artifacts - subscribe to run events and write snapshots, history and summary.
"""

from __future__ import annotations

import logging
import os
from typing import Any

from QuboSculpt.acoustics.loss import ShadingRow
from QuboSculpt.acoustics.tracer import RayRecord
from QuboSculpt.config.models import OutputSettings
from QuboSculpt.geometry.wavefront import export_mesh
from QuboSculpt.kernel.signal_hub import Signal, SignalHub, SignalKind
from QuboSculpt.optimizer.history import HISTORY_HEADER, IterationRecord, RunHistory
from QuboSculpt.utils.io import append_csv_row, format_float, write_csv, write_json
from QuboSculpt.utils.paths import get_snapshot_path

logger = logging.getLogger(__name__)

HISTORY_FILE = "history.csv"
SUMMARY_FILE = "summary.json"
INITIAL_MESH_FILE = "initial.obj"
FINAL_MESH_FILE = "final.obj"
SHADING_FILE = "shading.csv"
RAYS_FILE = "rays.csv"

SHADING_HEADER = ("simplex_id", "loss", "normalized_loss")
RAYS_HEADER = (
    "ray_id",
    "simplex_id",
    "hit_x",
    "hit_y",
    "hit_z",
    "dir_x",
    "dir_y",
    "dir_z",
    "hits_mic",
)


class RunArtifacts:
    """
    运行产物写入器
    Run artifact writer.

    RUN_STARTED 时写初始网格并重置 history.csv；每次迭代追加一行并导出快照；
    RUN_FINISHED 时导出最终网格。
    Writes the initial mesh and resets history.csv on RUN_STARTED, appends a row
    and a snapshot per iteration, and exports the final mesh on RUN_FINISHED.
    """

    def __init__(self, output_dir: str, settings: OutputSettings) -> None:
        self._output_dir = output_dir
        self._settings = settings
        self._slots: list[str] = []

    @property
    def history_path(self) -> str:
        return os.path.join(self._output_dir, HISTORY_FILE)

    def attach(self, hub: SignalHub) -> None:
        self._slots = [
            hub.connect(SignalKind.RUN_STARTED, self._on_started),
            hub.connect(SignalKind.ITERATION_COMPLETED, self._on_iteration),
            hub.connect(SignalKind.RUN_FINISHED, self._on_finished),
        ]

    def detach(self, hub: SignalHub) -> None:
        for slot_id in self._slots:
            hub.disconnect(slot_id)
        self._slots = []

    def _on_started(self, signal: Signal) -> None:
        export_mesh(signal.payload, os.path.join(self._output_dir, INITIAL_MESH_FILE))
        write_csv(self.history_path, HISTORY_HEADER, [])

    def _on_iteration(self, signal: Signal) -> None:
        record: IterationRecord = signal.payload
        append_csv_row(
            self.history_path,
            HISTORY_HEADER,
            record.csv_row(self._settings.record_wall_time),
        )
        if self._settings.snapshots:
            export_mesh(
                signal.metadata["mesh"], get_snapshot_path(self._output_dir, record.t)
            )

    def _on_finished(self, signal: Signal) -> None:
        history: RunHistory = signal.payload
        if history.final_mesh is not None:
            final_path = os.path.join(self._output_dir, FINAL_MESH_FILE)
            export_mesh(history.final_mesh, final_path)
        logger.info("运行产物已写入 %s", self._output_dir)


def write_summary(
    output_dir: str, history: RunHistory, seed: int, backend: str, **extra: Any
) -> str:
    """写出运行摘要 / Write the run summary."""
    path = os.path.join(output_dir, SUMMARY_FILE)
    write_json(path, {**history.summary(seed, backend), **extra})
    return path


def write_shading(output_dir: str, rows: list[ShadingRow]) -> str:
    """写出单元着色表 / Write the per-simplex shading table."""
    path = os.path.join(output_dir, SHADING_FILE)
    write_csv(
        path,
        SHADING_HEADER,
        (
            [str(r.simplex_id), format_float(r.loss), format_float(r.normalized_loss)]
            for r in rows
        ),
    )
    return path


def write_rays(output_dir: str, records: list[RayRecord]) -> str:
    """写出声线追踪表 / Write the ray trace table."""
    path = os.path.join(output_dir, RAYS_FILE)
    write_csv(
        path,
        RAYS_HEADER,
        (
            [
                str(r.ray_id),
                str(r.simplex_id),
                *(format_float(c) for c in r.hit_point),
                *(format_float(c) for c in r.direction),
                "true" if r.hits_mic else "false",
            ]
            for r in records
        ),
    )
    return path
