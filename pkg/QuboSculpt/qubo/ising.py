"""
QUBO ↔ Ising 变换（x = (s + 1) / 2）
QUBO ↔ Ising transform (x = (s + 1) / 2).
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from QuboSculpt.kernel.errors import QuboError
from QuboSculpt.qubo.model import IsingInstance, QuboInstance


def qubo_to_ising(q: QuboInstance) -> IsingInstance:
    """
    代入 x = (s+1)/2：
        Q_ii x_i      = Q_ii/2 · s_i + Q_ii/2
        Q_ij x_i x_j  = Q_ij/4 · (s_i s_j + s_i + s_j + 1)
    Substitute x = (s+1)/2 into xᵀQx.
    """
    entries = q.entries
    diag = np.diag(entries)
    upper = np.triu(entries, k=1)
    h = diag / 2.0 + (upper.sum(axis=0) + upper.sum(axis=1)) / 4.0
    rows, cols = np.nonzero(upper)
    couplings = {
        (int(i), int(j)): float(upper[i, j]) / 4.0 for i, j in zip(rows, cols)
    }
    offset = float(diag.sum()) / 2.0 + float(upper.sum()) / 4.0
    return IsingInstance(h=h, J=couplings, offset=offset)


def ising_energy(ising: IsingInstance, spins: Sequence[int] | np.ndarray) -> float:
    """
    E(s) = Σ h_i s_i + Σ J_ij s_i s_j + offset
    """
    s = np.asarray(spins, dtype=np.float64)
    if s.shape != ising.h.shape:
        raise QuboError(f"spin vector length {s.size} does not match {ising.h.size}")
    if not np.all(np.abs(s) == 1.0):
        raise QuboError("spins must be -1 or +1")
    energy = float(ising.h @ s) + ising.offset
    for (i, j), value in ising.J.items():
        energy += value * s[i] * s[j]
    return float(energy)


def bits_to_spins(bits: Sequence[int] | np.ndarray) -> np.ndarray:
    """s = 2x − 1"""
    return 2 * np.asarray(bits, dtype=np.int64) - 1
