"""
QUBO 文本编解码 - 远程采样协议与调试用
QUBO text codec - for the remote sampler protocol and debugging.

实例格式：首行 "NK nnz"，随后每个上三角非零项一行 "i j value"。
样本格式：每行 "energy multiplicity bitstring"。
Instance format: a header "NK nnz" then one "i j value" line per upper-triangular
nonzero. Sample format: one "energy multiplicity bitstring" line per sample.
"""

from __future__ import annotations

from collections.abc import Iterable

import numpy as np

from QuboSculpt.kernel.errors import QuboError
from QuboSculpt.qubo.model import IndexMap, QuboInstance


def dumps_qubo(q: QuboInstance) -> str:
    """序列化实例 / Serialize an instance."""
    items = q.nonzero_items()
    lines = [f"{q.size} {len(items)}"]
    lines.extend(f"{i} {j} {value!r}" for i, j, value in items)
    return "\n".join(lines) + "\n"


def loads_qubo(text: str, index_map: IndexMap | None = None) -> QuboInstance:
    """反序列化实例 / Parse an instance."""
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines:
        raise QuboError("empty QUBO text")
    try:
        size, nnz = (int(p) for p in lines[0].split())
        items = []
        for line in lines[1:]:
            i, j, value = line.split()
            items.append((int(i), int(j), float(value)))
    except ValueError as exc:
        raise QuboError(f"malformed QUBO text: {exc}") from exc
    if len(items) != nnz:
        raise QuboError(f"QUBO header announces {nnz} entries, found {len(items)}")
    return QuboInstance.from_items(size, items, index_map=index_map)


def dumps_samples(samples: Iterable[tuple[np.ndarray, float, int]]) -> str:
    """序列化样本 (bits, energy, multiplicity) / Serialize samples."""
    lines = [
        f"{energy!r} {multiplicity} {''.join(str(int(b)) for b in bits)}"
        for bits, energy, multiplicity in samples
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def loads_samples(text: str, size: int) -> list[tuple[np.ndarray, float, int]]:
    """
    解析样本行，比特串长度必须等于 NK
    Parse sample lines; every bitstring must have length NK.
    """
    samples = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        try:
            energy, multiplicity, bitstring = float(parts[0]), int(parts[1]), parts[2]
        except (IndexError, ValueError) as exc:
            raise QuboError(f"malformed sample line {lineno}: {line!r}") from exc
        if len(parts) != 3 or len(bitstring) != size or set(bitstring) - {"0", "1"}:
            raise QuboError(f"malformed sample line {lineno}: {line!r}")
        if multiplicity < 1:
            raise QuboError(f"sample line {lineno} has multiplicity {multiplicity}")
        bits = np.frombuffer(bitstring.encode("ascii"), dtype=np.uint8) - ord("0")
        samples.append((bits.astype(np.int8), energy, multiplicity))
    return samples
