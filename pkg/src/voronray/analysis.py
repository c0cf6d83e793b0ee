"""Closed-form complexity bound and empirical per-cell statistics."""

from __future__ import annotations

from dataclasses import dataclass
from math import exp, lgamma, log, pi

from .core import Mesh


def expected_vertices_lower_bound(d: int) -> float:
    """Lower-bound constant for expected Voronoi vertices per cell.

    Evaluates, in log-gamma arithmetic to avoid overflow,

        C(k) = 2 pi^(k/2) k^(k-1) / (k (k+1))
               * Beta(k^2/2, 1/2)^(-1) * (Gamma(k/2) / Gamma((k+1)/2))^k

    at k = d + 1; the standard tabulated values for uniformly random nodes
    index the constant from the next dimension up, and this function
    matches that printed table.
    """
    if not 2 <= d <= 30:
        raise ValueError("d must be between 2 and 30")
    k = d + 1
    ln_beta = lgamma(k * k / 2.0) + lgamma(0.5) - lgamma(k * k / 2.0 + 0.5)
    ln = (log(2.0) + (k / 2.0) * log(pi) + (k - 1) * log(k)
          - log(k) - log(k + 1) - ln_beta
          + k * (lgamma(k / 2.0) - lgamma((k + 1) / 2.0)))
    return exp(ln)


@dataclass
class ScalingStats:
    """Mean vertices and neighbors per cell, over all and bounded cells."""

    vertices_per_cell: float
    neighbors_per_cell: float
    bounded_vertices_per_cell: float
    bounded_neighbors_per_cell: float
    n_cells: int
    n_bounded: int


def empirical_scaling(mesh: Mesh) -> ScalingStats:
    """Per-cell vertex and neighbor counts of a computed mesh.

    The all-cells averages divide by N as the raw diagram statistic; cells
    on the hull are unbounded and carry fewer vertices, which biases those
    averages low compared to periodic or cube-clipped reference setups, so
    the bounded-cell averages are reported alongside.
    """
    n = mesh.nodes.n
    bounded = set(mesh.bounded_cells())
    v_all = sum(len(mesh.cell_vertices(i)) for i in range(n))
    e_all = sum(len(mesh.neighbors(i)) for i in range(n))
    v_b = sum(len(mesh.cell_vertices(i)) for i in bounded)
    e_b = sum(len(mesh.neighbors(i)) for i in bounded)
    nb = max(len(bounded), 1)
    return ScalingStats(
        vertices_per_cell=v_all / n,
        neighbors_per_cell=e_all / n,
        bounded_vertices_per_cell=v_b / nb,
        bounded_neighbors_per_cell=e_b / nb,
        n_cells=n,
        n_bounded=len(bounded),
    )
