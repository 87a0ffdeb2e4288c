"""
信号中枢 - 优化运行期间的类型化事件发布/订阅
Signal hub - typed publish/subscribe for events during an optimization run.

优化器只负责发射信号，快照、历史记录等产物由订阅者写出。
The optimizer only emits signals; snapshots, history rows and other artifacts
are written by subscribers.
"""

from __future__ import annotations

import asyncio
import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

logger = logging.getLogger(__name__)


class SignalPriority(Enum):
    """信号处理器优先级 / Signal handler priority."""

    HIGHEST = 0
    HIGH = 25
    NORMAL = 50
    LOW = 75
    LOWEST = 100


class SignalKind(str, Enum):
    """预定义的信号类型 / Predefined signal kinds."""

    RUN_STARTED = "run.started"
    ITERATION_COMPLETED = "iteration.completed"
    SOLVER_INFEASIBLE = "solver.infeasible"
    RUN_FINISHED = "run.finished"


@dataclass
class Signal:
    """
    信号对象 - 在系统中传递的事件载体
    Signal object - the event carrier.
    """

    kind: SignalKind | str
    payload: Any = None
    source: str = ""
    metadata: dict[str, Any] = field(default_factory=dict)


@dataclass
class SlotBinding:
    """槽绑定 / Slot binding."""

    kind_key: str
    handler: Callable[..., Any]
    priority: SignalPriority = SignalPriority.NORMAL
    slot_id: str = ""
    once: bool = False


def _kind_key(kind: SignalKind | str) -> str:
    return kind.value if isinstance(kind, SignalKind) else kind


class SignalHub:
    """
    信号中枢 - 管理订阅和分发
    Signal hub - manages subscriptions and dispatch.

    处理器可以是同步或异步函数，按优先级依次执行；处理器异常会向上传播。
    Handlers may be sync or async and run in priority order; handler exceptions
    propagate to the emitter.
    """

    def __init__(self) -> None:
        self._slots: dict[str, list[SlotBinding]] = {}
        self._counter = 0

    def connect(
        self,
        kind: SignalKind | str,
        handler: Callable[..., Any],
        priority: SignalPriority = SignalPriority.NORMAL,
        once: bool = False,
    ) -> str:
        """
        连接处理器到信号，返回 slot_id
        Connect a handler to a signal kind; returns the slot id.
        """
        key = _kind_key(kind)
        self._counter += 1
        slot_id = f"slot_{self._counter}"
        bindings = self._slots.setdefault(key, [])
        bindings.append(
            SlotBinding(
                kind_key=key,
                handler=handler,
                priority=priority,
                slot_id=slot_id,
                once=once,
            )
        )
        # 稳定排序，同优先级保持注册顺序
        bindings.sort(key=lambda b: b.priority.value)
        logger.debug("已连接槽 %s 到信号 %s", slot_id, key)
        return slot_id

    def disconnect(self, slot_id: str) -> bool:
        """断开指定槽 / Disconnect a slot."""
        for bindings in self._slots.values():
            for binding in bindings:
                if binding.slot_id == slot_id:
                    bindings.remove(binding)
                    return True
        return False

    async def emit(self, signal: Signal) -> Signal:
        """
        发射信号
        Emit a signal.
        """
        key = _kind_key(signal.kind)
        for binding in list(self._slots.get(key, [])):
            result = binding.handler(signal)
            if asyncio.iscoroutine(result) or asyncio.isfuture(result):
                await result
            if binding.once:
                self._slots[key].remove(binding)
        return signal

    async def emit_new(
        self,
        kind: SignalKind | str,
        payload: Any = None,
        source: str = "",
        **metadata: Any,
    ) -> Signal:
        """便捷方法：创建并发射新信号 / Create and emit a new signal."""
        return await self.emit(
            Signal(kind=kind, payload=payload, source=source, metadata=metadata)
        )

    def slot_count(self, kind: SignalKind | str | None = None) -> int:
        """获取槽数量 / Number of slot bindings."""
        if kind is None:
            return sum(len(b) for b in self._slots.values())
        return len(self._slots.get(_kind_key(kind), []))

    def clear(self) -> None:
        """清除所有槽 / Clear all slots."""
        self._slots.clear()
