"""
IO 工具 - CSV 与 JSON 产物写入
IO utility - CSV and JSON artifact writing.

所有文本产物使用 "\\n" 换行和固定的浮点格式，保证同一种子的两次运行字节一致。
Text artifacts use "\\n" line endings and a fixed float format so that two runs
with the same seed are byte-identical.
"""

from __future__ import annotations

import csv
import json
import logging
import os
from collections.abc import Iterable, Sequence
from typing import Any

logger = logging.getLogger(__name__)


def format_float(value: float) -> str:
    """最短可往返的浮点表示 / Shortest round-tripping float repr."""
    return repr(float(value))


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> int:
    """
    写入 CSV 文件，返回行数
    Write a CSV file; returns the row count.
    """
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
            count += 1
    logger.debug("已写入 %s (%d 行)", path, count)
    return count


def append_csv_row(path: str, header: Sequence[str], row: Sequence[Any]) -> None:
    """
    追加一行（文件不存在时先写表头）
    Append one row (writes the header first when the file is new).
    """
    is_new = not os.path.exists(path)
    with open(path, "a", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        if is_new:
            writer.writerow(header)
        writer.writerow(row)


def write_json(path: str, data: Any) -> None:
    """写入 JSON 文件 / Write a JSON file."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(data, f, ensure_ascii=False, indent=2, sort_keys=True)
        f.write("\n")


def read_json(path: str) -> Any:
    """读取 JSON 文件 / Read a JSON file."""
    with open(path, encoding="utf-8") as f:
        return json.load(f)
