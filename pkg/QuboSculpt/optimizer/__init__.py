"""
优化模块 - 变异生成与迭代优化循环
Optimizer module - mutation generation and the iterative optimization loop.
"""

from QuboSculpt.optimizer.history import HISTORY_HEADER, IterationRecord, RunHistory
from QuboSculpt.optimizer.mutation import (
    MutationSet,
    convexity_bound,
    convexity_bounds,
    generate_mutations,
    mutation_radius,
)
from QuboSculpt.optimizer.params import OptimizerParams, SearchMode
from QuboSculpt.optimizer.runner import OptimizationContext, optimize, run_iteration

__all__ = [
    "HISTORY_HEADER",
    "IterationRecord",
    "MutationSet",
    "OptimizationContext",
    "OptimizerParams",
    "RunHistory",
    "SearchMode",
    "convexity_bound",
    "convexity_bounds",
    "generate_mutations",
    "mutation_radius",
    "optimize",
    "run_iteration",
]
