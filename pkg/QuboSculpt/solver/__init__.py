"""
求解模块 - 穷举、模拟退火与远程采样三种后端
Solver module - exhaustive, simulated annealing and remote sampler backends.
"""

from QuboSculpt.solver.annealer import IncrementalEnergy, solve_annealer
from QuboSculpt.solver.base import (
    AnnealerParams,
    QuboSolver,
    RemoteSettings,
    Sample,
    SolveRequest,
    SolveResult,
    SolverBackend,
    SolverSettings,
)
from QuboSculpt.solver.exhaustive import MAX_VARIABLES, solve_exhaustive
from QuboSculpt.solver.registry import SolverRegistry, get_registry, solve

__all__ = [
    "MAX_VARIABLES",
    "AnnealerParams",
    "IncrementalEnergy",
    "QuboSolver",
    "RemoteSettings",
    "Sample",
    "SolveRequest",
    "SolveResult",
    "SolverBackend",
    "SolverRegistry",
    "SolverSettings",
    "get_registry",
    "solve",
    "solve_annealer",
    "solve_exhaustive",
]
