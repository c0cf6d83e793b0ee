"""Heuristic Monte-Carlo integration: MC areas plus vertex-averaged values.

Face areas (typically Monte-Carlo estimates) feed a pyramid sum for the
volume and a two-term quadrature for interface integrals: the average of
the integrand over the interface vertices weighted d/(d+1), plus the value
at the vertex centroid weighted 1/(d+1). Cheap in high dimensions, but
without an error estimate.
"""

from __future__ import annotations

import math

import numpy as np

from .core import Mesh, NodeSet
from .errors import MissingNeighbor, UnboundedCell, UnboundedFace
from .integrate_mc import Integrand


def hmc_volume(ns: NodeSet, i: int, areas: dict, mesh: Mesh = None) -> float:
    """Pyramid-sum volume of cell i from its face areas.

    volume = (1/d) * sum_j (|x_i - x_j| / 2) * A_ij; exact whenever the
    areas are exact.

    Raises:
        MissingNeighbor: ``mesh`` was given and reports a neighbor that is
            absent from ``areas``.
    """
    if mesh is not None:
        missing = [j for j in mesh.neighbors(i) if j not in areas]
        if missing:
            raise MissingNeighbor(f"areas for cell {i} lack neighbors {missing}")
    xi = ns.points[i]
    acc = 0.0
    for j, a in areas.items():
        acc += 0.5 * float(np.linalg.norm(ns.points[j] - xi)) * a
    return acc / ns.dim


def hmc_interface_integral(mesh: Mesh, i: int, j: int, A_ij: float,
                           f: Integrand) -> float:
    """Two-term estimate of the integral of f over the (i, j) interface.

    Uses the K interface vertices nu_k and their centroid y:

        d/(d+1) * (1/K) * sum_k f(nu_k) * A + 1/(d+1) * f(y) * A

    The weights sum to one, so a constant integrand is reproduced exactly.

    Raises:
        UnboundedFace: the interface touches a boundary ray.
    """
    if mesh.face_is_unbounded(i, j):
        raise UnboundedFace(f"interface ({i}, {j}) is unbounded")
    verts = mesh.face_vertices(i, j)
    d = mesh.nodes.dim
    if len(verts) < d:
        raise UnboundedFace(f"interface ({i}, {j}) has only {len(verts)} vertices")
    coords = np.array([v.r for v in verts])
    centroid = coords.mean(axis=0)
    vertex_mean = math.fsum(f(v.r) for v in verts) / len(verts)
    return (d * vertex_mean + f(centroid)) * A_ij / (d + 1)


def hmc_cell_integral(mesh: Mesh, i: int, f: Integrand, areas: dict,
                      volume: float) -> float:
    """Cell integral from interface integrals via one more cone-rule step.

    Applies the cone rule with apex x_i to the interface estimates:

        sum_j (h_j / d) * [ d/(d+1) * F_ij + 1/(d+1) * f(x_i) * A_ij ]

    with h_j the bisector distance |x_i - x_j| / 2; the apex terms combine
    to f(x_i) * volume / (d+1) with the supplied pyramid-sum volume, so a
    constant integrand yields exactly that constant times the volume.

    Raises:
        UnboundedCell: the cell has an unbounded face.
    """
    ns = mesh.nodes
    d = ns.dim
    if i in mesh.unbounded_cells():
        raise UnboundedCell(f"cell {i} is unbounded")
    xi = ns.points[i]
    base = 0.0
    for j, a in areas.items():
        h = 0.5 * float(np.linalg.norm(ns.points[j] - xi))
        base += h * hmc_interface_integral(mesh, i, j, a, f) / d
    return (d * base + f(xi) * volume) / (d + 1)
