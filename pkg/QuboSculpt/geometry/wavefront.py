"""
Wavefront 文本网格 - 迭代快照的导出与导入
Wavefront text meshes - export and import of iteration snapshots.

格式："v x y z" 顶点行与 "f i j k" 面行（索引从 1 开始）。
Format: "v x y z" vertex lines and "f i j k" face lines (1-based indices).
"""

from __future__ import annotations

import logging
import os

import numpy as np

from QuboSculpt import __app_name__
from QuboSculpt.geometry.mesh import Mesh, build_mesh
from QuboSculpt.kernel.errors import MeshError

logger = logging.getLogger(__name__)


def export_mesh(mesh: Mesh, path: str) -> str:
    """
    导出网格为 Wavefront 文本
    Export a mesh as Wavefront text.

    坐标使用 repr 格式，重新导入后逐位一致。
    Coordinates use repr formatting so a re-import is bit-identical.
    """
    if mesh.n_vertices == 0 or mesh.n_simplices == 0:
        raise MeshError(f"refusing to export an empty mesh to {path}")

    lines = [f"# {__app_name__} mesh V={mesh.n_vertices} S={mesh.n_simplices}"]
    lines.extend(f"v {x!r} {y!r} {z!r}" for x, y, z in mesh.vertices.tolist())
    lines.extend(f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.simplices.tolist())

    try:
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise MeshError(f"cannot write mesh to {path}: {exc}") from exc

    logger.debug("网格已导出: %s", path)
    return path


def load_mesh(path: str, require_closed: bool = True) -> Mesh:
    """
    读取 Wavefront 文本网格（保持文件中的绕向）
    Read a Wavefront text mesh, keeping the file's winding.
    """
    vertices: list[list[float]] = []
    faces: list[list[int]] = []
    try:
        with open(path, encoding="utf-8") as f:
            for lineno, raw in enumerate(f, start=1):
                parts = raw.split()
                if not parts or parts[0].startswith("#"):
                    continue
                try:
                    if parts[0] == "v":
                        vertices.append([float(p) for p in parts[1:4]])
                    elif parts[0] == "f":
                        # 兼容 "f 1/1/1 2/2/2 3/3/3" 形式
                        face = [int(p.split("/")[0]) - 1 for p in parts[1:]]
                        if len(face) != 3:
                            raise MeshError(
                                f"{path}:{lineno}: only triangular faces are supported"
                            )
                        faces.append(face)
                except ValueError as exc:
                    raise MeshError(f"{path}:{lineno}: malformed line: {exc}") from exc
    except OSError as exc:
        raise MeshError(f"cannot read mesh from {path}: {exc}") from exc

    if not vertices or not faces:
        raise MeshError(f"{path} contains no mesh")
    return build_mesh(
        np.array(vertices),
        np.array(faces),
        require_closed=require_closed,
        reorient=False,
    )
