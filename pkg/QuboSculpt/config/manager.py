"""
配置管理器 - 读取、合并、覆盖与校验实验配置
Config manager - reads, merges, overrides and validates experiment configuration.

使用 JSON 文件存储，支持默认值合并和嵌套键访问。
Uses JSON files with default value merging and nested key access.
"""

from __future__ import annotations

import copy
import json
import logging
import os
from typing import Any

from pydantic import ValidationError

from QuboSculpt.config.defaults import build_default_config
from QuboSculpt.config.models import ExperimentConfig
from QuboSculpt.kernel.errors import ConfigError
from QuboSculpt.utils.io import write_json

logger = logging.getLogger(__name__)

RESOLVED_CONFIG_FILE = "resolved_config.json"


class ConfigManager:
    """
    配置管理器
    Config manager.

    支持：
    - 嵌套键访问（如 "optimizer.beta"）
    - 默认值自动合并（不覆盖文件中的值）
    - 校验为 ExperimentConfig，并写出 resolved_config.json
    """

    def __init__(
        self,
        defaults: dict[str, Any] | None = None,
        config_path: str | None = None,
    ) -> None:
        self._defaults = defaults if defaults is not None else build_default_config()
        self._config: dict[str, Any] = {}
        self._config_path = config_path

    def load(self) -> None:
        """
        加载配置文件（未指定文件时只使用默认值）
        Load the configuration file; defaults only when no file is given.
        """
        self._config = {}
        if self._config_path is not None:
            if not os.path.exists(self._config_path):
                raise ConfigError(f"config file not found: {self._config_path}")
            try:
                with open(self._config_path, encoding="utf-8") as f:
                    loaded = json.load(f)
            except (json.JSONDecodeError, OSError) as exc:
                raise ConfigError(
                    f"cannot read config {self._config_path}: {exc}"
                ) from exc
            if not isinstance(loaded, dict):
                raise ConfigError(f"config {self._config_path} must be a JSON object")
            self._config = loaded
            logger.info("配置已从 %s 加载", self._config_path)

        # 合并默认值
        self._merge_defaults(self._config, self._defaults)

    def get(self, key: str, default: Any = None) -> Any:
        """
        获取配置值（支持嵌套键，如 "optimizer.beta"）
        Get a config value (nested keys like "optimizer.beta").
        """
        current: Any = self._config
        for k in key.split("."):
            if isinstance(current, dict):
                current = current.get(k)
            else:
                return default
            if current is None:
                return default
        return current

    def set(self, key: str, value: Any) -> None:
        """
        设置配置值（支持嵌套键）
        Set a config value (nested keys).
        """
        keys = key.split(".")
        current = self._config
        for k in keys[:-1]:
            if k not in current or not isinstance(current[k], dict):
                current[k] = {}
            current = current[k]
        current[keys[-1]] = value

    def as_dict(self) -> dict[str, Any]:
        """获取完整配置字典 / Get the full config dictionary."""
        return dict(self._config)

    def validate(self) -> ExperimentConfig:
        """
        校验为实验配置；失败时抛出 ConfigError
        Validate into an experiment config; raises ConfigError on failure.
        """
        try:
            return ExperimentConfig.model_validate(self._config)
        except ValidationError as exc:
            problems = "; ".join(
                f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}"
                for err in exc.errors()
            )
            raise ConfigError(f"invalid configuration: {problems}") from exc

    @staticmethod
    def save_resolved(config: ExperimentConfig, output_dir: str) -> str:
        """写出生效配置 / Write the effective configuration."""
        path = os.path.join(output_dir, RESOLVED_CONFIG_FILE)
        write_json(path, config.to_dict())
        logger.info("生效配置已写入 %s", path)
        return path

    def _merge_defaults(self, config: dict[str, Any], defaults: dict[str, Any]) -> None:
        """
        递归合并默认值到配置中（不覆盖已有值）
        Recursively merge defaults into config (does not overwrite existing).
        """
        for key, default_value in defaults.items():
            if key not in config:
                config[key] = copy.deepcopy(default_value)
            elif isinstance(default_value, dict) and isinstance(config[key], dict):
                self._merge_defaults(config[key], default_value)
