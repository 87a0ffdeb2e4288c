"""
内核模块 - 错误体系、随机流与信号中枢
Kernel module - error hierarchy, seeded streams and the signal hub.
"""

from QuboSculpt.kernel.errors import QuboSculptError
from QuboSculpt.kernel.seeding import SeedStream
from QuboSculpt.kernel.signal_hub import Signal, SignalHub, SignalKind

__all__ = ["QuboSculptError", "SeedStream", "Signal", "SignalHub", "SignalKind"]
