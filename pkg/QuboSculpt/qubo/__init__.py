"""
QUBO 模块 - 由损失表构造 QUBO、求值、Ising 变换与解码
QUBO module - build from the loss table, evaluate, Ising transform and decode.
"""

from QuboSculpt.qubo.builder import (
    add_one_hot_penalty,
    build_loss_qubo,
    build_qubo,
    choose_penalty,
    decode_bitstring,
    feasible_objective,
    loss_objective,
    qubo_objective,
)
from QuboSculpt.qubo.codec import dumps_qubo, dumps_samples, loads_qubo, loads_samples
from QuboSculpt.qubo.ising import ising_energy, qubo_to_ising
from QuboSculpt.qubo.model import (
    Configuration,
    IndexMap,
    IsingInstance,
    QuboInstance,
    bits_rank,
)

__all__ = [
    "Configuration",
    "IndexMap",
    "IsingInstance",
    "QuboInstance",
    "add_one_hot_penalty",
    "bits_rank",
    "build_loss_qubo",
    "build_qubo",
    "choose_penalty",
    "decode_bitstring",
    "dumps_qubo",
    "dumps_samples",
    "feasible_objective",
    "ising_energy",
    "loads_qubo",
    "loads_samples",
    "loss_objective",
    "qubo_objective",
    "qubo_to_ising",
]
