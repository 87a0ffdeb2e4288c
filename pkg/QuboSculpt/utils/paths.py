"""
路径工具 - 管理运行产物的输出目录
Path utility - manages the output directory of run artifacts.
"""

from __future__ import annotations

import os

from QuboSculpt.kernel.errors import ConfigError


def get_output_path(configured: str | None = None) -> str:
    """
    获取输出目录（配置优先，其次环境变量）
    Get the output directory (configuration first, then environment).
    """
    path = configured or os.environ.get("QUBOSCULPT_OUTPUT_DIR", "runs/latest")
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"output_dir not writable: {path}: {exc}") from exc
    if not os.access(path, os.W_OK):
        raise ConfigError(f"output_dir not writable: {path}")
    return path


def get_snapshot_path(output_dir: str, iteration: int) -> str:
    """迭代快照文件路径 / Path of an iteration snapshot."""
    return os.path.join(output_dir, f"iter_{iteration}.obj")
