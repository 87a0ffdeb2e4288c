"""
随机流 - 由主种子和整数键路径派生独立的随机数生成器
Seed streams - derive independent generators from a master seed and a key path.

同一路径总是得到同一个生成器，与求值顺序和线程数无关。
The same path always yields the same generator, independent of evaluation order
and thread count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# 各用途的流标签 / Stream tags per purpose
TAG_MUTATION = 1
TAG_LOSS_TABLE = 2
TAG_EVALUATION = 3
TAG_SOLVER = 4
TAG_TRACE = 5


@dataclass(frozen=True)
class SeedStream:
    """
    带键路径的种子流
    Seed stream with a key path.
    """

    seed: int
    path: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.seed < 0 or any(k < 0 for k in self.path):
            raise ValueError("seed and stream keys must be non-negative integers")

    def child(self, *keys: int) -> SeedStream:
        """派生子流 / Derive a child stream."""
        return SeedStream(self.seed, self.path + tuple(int(k) for k in keys))

    def generator(self) -> np.random.Generator:
        """按路径构造生成器 / Build the generator for this path."""
        return np.random.default_rng(np.random.SeedSequence([self.seed, *self.path]))

    def derive_seed(self) -> int:
        """派生一个 32 位整数种子（供下游后端使用） / Derive a 32-bit integer seed."""
        state = np.random.SeedSequence([self.seed, *self.path]).generate_state(1)
        return int(state[0])
