"""Voronoi diagrams via incircle raycasting, with three integration schemes."""

from .core import (Mesh, NodeSet, VertexRecord, BoundaryRay, build_node_set,
                   nearest_neighbor, verify_vertex, TOL_VERTEX)
from .raycast import (RayQuery, RaycastStats, project_t, initial_heuristic,
                      raycast_incircle, raycast_bisection, search_direction)
from .graph import (edge_set, descent, voronoi_graph, verify_mesh,
                    brute_force_vertices)
from .integrate_mc import (CellIntegrals, Integrand, sample_unit_sphere,
                           sphere_surface_area, mc_integrate_cell, mc_areas_only)
from .integrate_poly import (MinorTable, update_minors, integrate_cell_poly,
                             poly_error_bounds)
from .integrate_hmc import hmc_volume, hmc_interface_integral, hmc_cell_integral
from .analysis import expected_vertices_lower_bound, empirical_scaling
from . import errors

__version__ = "0.1.0"

__all__ = [
    "Mesh", "NodeSet", "VertexRecord", "BoundaryRay", "build_node_set",
    "nearest_neighbor", "verify_vertex", "TOL_VERTEX",
    "RayQuery", "RaycastStats", "project_t", "initial_heuristic",
    "raycast_incircle", "raycast_bisection", "search_direction",
    "edge_set", "descent", "voronoi_graph", "verify_mesh",
    "brute_force_vertices",
    "CellIntegrals", "Integrand", "sample_unit_sphere", "sphere_surface_area",
    "mc_integrate_cell", "mc_areas_only",
    "MinorTable", "update_minors", "integrate_cell_poly", "poly_error_bounds",
    "hmc_volume", "hmc_interface_integral", "hmc_cell_integral",
    "expected_vertices_lower_bound", "empirical_scaling",
    "errors",
]
