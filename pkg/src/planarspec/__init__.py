"""Discrete curvature, sphere structure, surgery and spectral checks on planar graphs."""

__version__ = "0.1.0"

from .errors import PlanarSpecError  # noqa: E402
from .graph import RotationGraph, gauss_bonnet, trace_faces, vertex_curvature  # noqa: E402
from .generators import (  # noqa: E402
    DegreeProfile, counterexample_graph, growing_triangulation, perturb_ball, tessellation_ball,
)
from .spheres import Hypothesis, bfs_spheres, sigma_decomposition, theorem_main_check  # noqa: E402

__all__ = [
    "PlanarSpecError", "RotationGraph", "trace_faces", "vertex_curvature", "gauss_bonnet",
    "DegreeProfile", "tessellation_ball", "growing_triangulation", "counterexample_graph", "perturb_ball",
    "Hypothesis", "bfs_spheres", "sigma_decomposition", "theorem_main_check", "__version__",
]
