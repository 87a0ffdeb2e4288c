"""
测试夹具 - 常用网格与声学场景
Test fixtures - common meshes and the acoustic scene.
"""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from QuboSculpt.acoustics import Microphone, Monopole
from QuboSculpt.geometry import Mesh, build_mesh, generate_sphere_mesh

TETRA_FACES = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]


def tetrahedron_points(edge: float = 1.0) -> np.ndarray:
    """以原点为中心的正四面体顶点 / Regular tetrahedron centred on the origin."""
    corners = np.array(
        [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]
    )
    return corners * edge / (2.0 * np.sqrt(2.0))


@pytest.fixture
def tetrahedron() -> Mesh:
    return build_mesh(tetrahedron_points(), TETRA_FACES)


@pytest.fixture
def octahedron() -> Mesh:
    points = [
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ]
    faces = [list(f) for f in itertools.product((0, 1), (2, 3), (4, 5))]
    return build_mesh(points, faces)


@pytest.fixture
def sphere() -> Mesh:
    return generate_sphere_mesh(4, 8)


@pytest.fixture
def monopole() -> Monopole:
    return Monopole(position=(2.5, 0.0, 0.0))


@pytest.fixture
def mic() -> Microphone:
    return Microphone(
        center=(2.0, 0.0, 0.0),
        half_axis_u=(0.0, 2.0, 0.0),
        half_axis_v=(0.0, 0.0, 1.15),
    )


@pytest.fixture
def silent_mic() -> Microphone:
    """远处极小的麦克风，实际上收不到反射 / A tiny, distant mic no ray reaches."""
    return Microphone(
        center=(0.0, 0.0, -1000.0),
        half_axis_u=(1e-3, 0.0, 0.0),
        half_axis_v=(0.0, 1e-3, 0.0),
    )
