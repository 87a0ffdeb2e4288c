"""
声学场景 - 声源、麦克风与声线
Acoustic scene - source, microphone and rays.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from QuboSculpt.kernel.errors import AcousticsError

Vector = Sequence[float] | np.ndarray

ORTHOGONALITY_TOLERANCE = 1e-9
UNIT_TOLERANCE = 1e-12


def as_vector(value: Vector, name: str) -> np.ndarray:
    """转换并校验三维向量 / Convert and validate a 3-vector."""
    array = np.asarray(value, dtype=np.float64)
    if array.shape != (3,):
        raise AcousticsError(f"{name} must be a 3-vector, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise AcousticsError(f"{name} must be finite")
    array = array.copy()
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Monopole:
    """点声源 / Acoustic point source."""

    position: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", as_vector(self.position, "monopole"))


@dataclass(frozen=True, eq=False)
class Microphone:
    """
    矩形麦克风平面：center ± u ± v
    Rectangular microphone plane: center ± u ± v.
    """

    center: np.ndarray
    half_axis_u: np.ndarray
    half_axis_v: np.ndarray

    def __post_init__(self) -> None:
        center = as_vector(self.center, "microphone center")
        u = as_vector(self.half_axis_u, "microphone half_axis_u")
        v = as_vector(self.half_axis_v, "microphone half_axis_v")
        if not np.any(u) or not np.any(v):
            raise AcousticsError("microphone half axes must be non-zero")
        if abs(float(u @ v)) > ORTHOGONALITY_TOLERANCE:
            raise AcousticsError(
                f"microphone half axes are not orthogonal (u.v={float(u @ v):.3e})"
            )
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "half_axis_u", u)
        object.__setattr__(self, "half_axis_v", v)

    @property
    def normal(self) -> np.ndarray:
        cross = np.cross(self.half_axis_u, self.half_axis_v)
        return cross / np.linalg.norm(cross)


@dataclass(frozen=True, eq=False)
class Ray:
    """单位方向的声线 / Ray with a unit direction."""

    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self) -> None:
        origin = as_vector(self.origin, "ray origin")
        direction = as_vector(self.direction, "ray direction")
        if abs(float(np.linalg.norm(direction)) - 1.0) > UNIT_TOLERANCE:
            raise AcousticsError("ray direction must have unit length")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "direction", direction)

    @classmethod
    def toward(cls, origin: Vector, target: Vector) -> Ray:
        """从 origin 指向 target 的声线 / Ray from origin toward target."""
        origin = np.asarray(origin, dtype=np.float64)
        delta = np.asarray(target, dtype=np.float64) - origin
        length = float(np.linalg.norm(delta))
        if length == 0.0:
            raise AcousticsError("ray target coincides with its origin")
        return cls(origin=origin, direction=delta / length)
