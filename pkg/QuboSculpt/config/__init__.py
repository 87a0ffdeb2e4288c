"""
配置模块
Configuration module.
"""

from QuboSculpt.config.defaults import PRESETS, build_default_config
from QuboSculpt.config.manager import ConfigManager
from QuboSculpt.config.models import ExperimentConfig

__all__ = ["PRESETS", "ConfigManager", "ExperimentConfig", "build_default_config"]
