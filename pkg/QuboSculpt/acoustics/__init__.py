"""
声学模块 - 声线近似下的散射与局部损失
Acoustics module - ray-approximated scattering and partial losses.

声波被近似为直线声线：从单极子声源射向单元，镜面反射一次，统计命中麦克风矩形的比例。
Sound waves are approximated as straight rays: cast from the monopole at a simplex,
reflected specularly once, and counted when they cross the microphone rectangle.
"""

from QuboSculpt.acoustics.loss import (
    PartialLossTable,
    ShadingRow,
    build_partial_loss_table,
    ensure_source_outside,
    partial_loss,
    shade_partial_loss,
    simplex_losses,
    total_loss,
)
from QuboSculpt.acoustics.scene import Microphone, Monopole, Ray
from QuboSculpt.acoustics.tracer import (
    RayRecord,
    ray_hits_microphone,
    ray_triangle_intersect,
    reflect,
    sample_rays,
    trace_rays,
)

__all__ = [
    "Microphone",
    "Monopole",
    "PartialLossTable",
    "Ray",
    "RayRecord",
    "ShadingRow",
    "build_partial_loss_table",
    "ensure_source_outside",
    "partial_loss",
    "ray_hits_microphone",
    "ray_triangle_intersect",
    "reflect",
    "sample_rays",
    "shade_partial_loss",
    "simplex_losses",
    "total_loss",
    "trace_rays",
]
