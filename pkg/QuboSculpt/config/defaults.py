"""
默认配置 - 实验的全部默认值与预设
Default configuration - every experiment default, plus presets.

默认值即声源位于球体正前方的实验设置。
The defaults are the experiment with the source straight in front of the sphere.
"""

from __future__ import annotations

import copy
from typing import Any

from QuboSculpt.kernel.errors import ConfigError

# 预设：在默认配置之上覆盖的字段
PRESETS: dict[str, dict[str, Any]] = {
    "sphere-front": {},
    "offset-source": {
        "monopole": [0.0, 3.0, 2.0],
        "optimizer": {"beta": 0.3},
    },
}


def build_default_config(preset: str | None = None) -> dict[str, Any]:
    """
    构建默认配置（可选叠加一个预设）
    Build the default configuration, optionally overlaid with a preset.
    """
    config: dict[str, Any] = {
        # 初始球面网格的经纬格点数
        "mesh": {"n_theta": 4, "n_phi": 8},
        "monopole": [2.5, 0.0, 0.0],
        "microphone": {
            "center": [2.0, 0.0, 0.0],
            "half_axis_u": [0.0, 2.0, 0.0],
            "half_axis_v": [0.0, 0.0, 1.15],
        },
        "acoustics": {
            "shadow_test": False,
            # trace 命令投射的声线数
            "trace_rays": 300,
        },
        "optimizer": {
            "K": 3,
            "beta": 0.7,
            "mu": 0.18,
            "iterations": 30,
            "search_mode": "comma",
            "rays_per_simplex": 50,
            "seed": 0,
            "infeasible_retries": 3,
            "convergence_window": 3,
            "workers": 1,
        },
        "solver": {
            "backend": "annealer",
            "num_reads": 10,
            "annealer": {
                "sweeps": 200,
                "restarts": 20,
                "initial_temperature": None,
                "final_temperature": None,
                "block_moves": True,
                "workers": 1,
            },
            "remote": {"endpoint": None, "timeout": 30.0, "attempts": 3},
        },
        # None 时使用 QUBOSCULPT_OUTPUT_DIR 或 runs/latest
        "output_dir": None,
        "output": {"record_wall_time": False, "snapshots": True},
        "log_level": "INFO",
    }
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(
                f"unknown preset: {preset} (available: {', '.join(sorted(PRESETS))})"
            )
        overlay(config, copy.deepcopy(PRESETS[preset]))
    return config


def overlay(base: dict[str, Any], updates: dict[str, Any]) -> dict[str, Any]:
    """
    递归覆盖（updates 中的值优先）
    Recursive overlay; values from `updates` win.
    """
    for key, value in updates.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            overlay(base[key], value)
        else:
            base[key] = value
    return base
