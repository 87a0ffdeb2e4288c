"""
几何模块 - 三角网格的生成、拓扑与变形
Geometry module - triangle mesh generation, topology and deformation.
"""

from QuboSculpt.geometry.hull import triangulate
from QuboSculpt.geometry.mesh import (
    AREA_TOLERANCE,
    Mesh,
    Simplex,
    Vertex,
    apply_configuration,
    build_edge_adjacency,
    build_mesh,
    compute_normals,
    generate_sphere_mesh,
    winding_number,
)
from QuboSculpt.geometry.wavefront import export_mesh, load_mesh

__all__ = [
    "AREA_TOLERANCE",
    "Mesh",
    "Simplex",
    "Vertex",
    "apply_configuration",
    "build_edge_adjacency",
    "build_mesh",
    "compute_normals",
    "export_mesh",
    "generate_sphere_mesh",
    "load_mesh",
    "triangulate",
    "winding_number",
]
