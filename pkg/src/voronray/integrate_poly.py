"""Exact polytopal integration via recursive simplex decomposition.

Each bounded cell is fanned into pyramids over its faces, faces into cones
over their sub-faces, down to edges spanned by two vertices. Every chain
(cell center, face centroid, ..., edge endpoints) is a simplex whose
volume comes from one determinant, evaluated through a table of minors so
that sibling chains share all work above their split point. The same
recursion integrates the piecewise-linear interpolant of an integrand
exactly, using the cone rule

    integral over cone = V * ( k/(k+1) * mean over base + 1/(k+1) * f(apex) )

applied once per level with the apex at the centroid (the cell center at
the top, averaged edge endpoints at the bottom).
"""

from __future__ import annotations

import math
import numpy as np

from .core import Mesh
from .errors import MissingCache, OrderViolation, UnboundedCell
from .integrate_mc import CellIntegrals, Integrand

# Minor storage is O(2^d * d); beyond this the scheme is hopeless anyway.
MAX_DIM = 10

_LEVEL_CACHE = {}


def _levels(dim):
    """Per-level (mask, surviving-rows) lists for the minor recursion."""
    if dim not in _LEVEL_CACHE:
        by_level = [[] for _ in range(dim + 1)]
        for mask in range(1 << dim):
            k = bin(mask).count("1") + 1
            if k <= dim:
                rows = tuple(j for j in range(dim) if not mask >> j & 1)
                by_level[k].append((mask, rows))
        _LEVEL_CACHE[dim] = by_level
    return _LEVEL_CACHE[dim]


class MinorTable:
    """Triangular store of minors for the column-by-column determinant.

    ``minors[mask]`` holds the determinant of the submatrix using columns
    k..d and the rows not in ``mask``, where k - 1 is the popcount of
    ``mask``. A minor therefore depends only on columns >= k, so reloading
    a low column leaves all higher levels intact, which is exactly the
    sharing the simplex recursion exploits.
    """

    def __init__(self, dim):
        if not 2 <= dim <= MAX_DIM:
            raise ValueError(f"dimension must be in [2, {MAX_DIM}]")
        self.dim = dim
        self.minors = {}
        self.columns = [None] * (dim + 1)  # 1-based; the loaded vectors
        self.loaded = [False] * (dim + 1)


def update_minors(table: MinorTable, v, k: int):
    """Load ``v`` as column ``k`` and refresh the level-k minors.

    Columns must be loaded from d down to 1; the call with k = 1 returns
    the full determinant.

    Raises:
        OrderViolation: a column above ``k`` was never loaded.
    """
    d = table.dim
    if not 1 <= k <= d:
        raise ValueError(f"column index {k} out of range 1..{d}")
    if not all(table.loaded[k + 1:]):
        raise OrderViolation(f"columns {k + 1}..{d} must be loaded before {k}")
    v = np.asarray(v, dtype=float)
    minors = table.minors
    if k == d:
        for mask, rows in _levels(d)[d]:
            minors[mask] = v[rows[0]]
    else:
        for mask, rows in _levels(d)[k]:
            acc = 0.0
            sign = 1.0
            for j in rows:
                acc += sign * v[j] * minors[mask | (1 << j)]
                sign = -sign
            minors[mask] = acc
    table.columns[k] = v
    table.loaded[k] = True
    for kk in range(1, k):
        table.loaded[kk] = False
    if k == 1:
        return minors[0]
    return None


def _candidate_splits(verts, avail):
    keys = set()
    for v in verts:
        keys.update(v.sigma)
    return sorted(keys & avail)


def _face_term(mesh, verts, avail, depth, table, f, xi, fvals):
    """Recurse one face level; returns (sum |det|, f-weighted sum)."""
    d = mesh.nodes.dim
    if depth == d:
        if len(verts) != 2:
            raise UnboundedCell(
                f"edge with {len(verts)} vertices; cell is not a bounded polytope")
        va, vb = verts
        update_minors(table, va.r - xi, 2)
        det = update_minors(table, vb.r - xi, 1)
        vol = abs(det)
        return vol, 0.5 * (fvals(va) + fvals(vb)) * vol

    rm = np.mean([v.r for v in verts], axis=0)
    update_minors(table, rm - xi, d - depth + 2)
    fm = f(rm)
    total_v = 0.0
    total_f = 0.0
    for k in _candidate_splits(verts, avail):
        sub = [v for v in verts if k in v.sigma]
        if len(sub) < 2:
            raise UnboundedCell(
                f"face keyed by generator {k} has {len(sub)} vertices")
        vk, fk = _face_term(mesh, sub, avail - {k}, depth + 1, table, f, xi, fvals)
        total_v += vk
        total_f += fk
    face_dim = d - depth + 1
    w = 1.0 / (face_dim + 1)
    return total_v, face_dim * w * total_f + w * fm * total_v


def integrate_cell_poly(mesh: Mesh, i: int, f: Integrand, cache: dict = None,
                        use_cache: bool = True, strict_cache: bool = False) -> CellIntegrals:
    """Exact volume, face areas, and linear-interpolant integrals of cell i.

    Faces toward lower-indexed neighbors are reused from ``cache`` when
    present (cells are meant to be processed in ascending order); absent
    entries are recomputed from this side, which covers neighbors whose own
    cell is unbounded and was never integrated.

    Args:
        mesh: complete mesh.
        i: bounded cell index.
        f: integrand, evaluated at vertices, centroids, and the generator.
        cache: dict keyed by (min(i,j), max(i,j)) holding (area, face
            integral); filled as a side effect.
        use_cache: disable to recompute every face from this cell's side
            (symmetry test mode).
        strict_cache: raise :class:`MissingCache` instead of recomputing
            when a lower-indexed face is absent.

    Raises:
        UnboundedCell: the cell has an unbounded edge.
    """
    ns = mesh.nodes
    d = ns.dim
    if i in mesh.unbounded_cells() or not mesh.cell_vertices(i):
        raise UnboundedCell(f"cell {i} is unbounded or empty")
    if cache is None:
        cache = {}
    xi = ns.points[i]
    table = MinorTable(d)
    fact = math.factorial(d)
    fcache = {}

    def fvals(v):
        val = fcache.get(v.sigma)
        if val is None:
            val = f(v.r)
            fcache[v.sigma] = val
        return val

    volume = 0.0
    base_integral = 0.0
    areas = {}
    fints = {}
    for j in mesh.neighbors(i):
        dx = ns.points[j] - xi
        h = 0.5 * math.sqrt(float(dx @ dx))  # bisector plane distance
        key = (i, j) if i < j else (j, i)
        hit = cache.get(key) if use_cache else None
        if hit is None:
            if strict_cache and j < i:
                raise MissingCache(f"face {key} was never produced")
            face_verts = mesh.face_vertices(i, j)
            avail = frozenset().union(*(v.sigma for v in face_verts)) - {i, j}
            raw_v, raw_f = _face_term(mesh, face_verts, avail, 2, table, f, xi, fvals)
            pyr_v = raw_v / fact
            pyr_f = raw_f / fact
            area = pyr_v * d / h
            fint = pyr_f * d / h
            if use_cache:
                cache[key] = (area, fint)
        else:
            area, fint = hit
        areas[j] = area
        fints[j] = fint
        volume += h * area / d
        base_integral += h * fint / d
    cell_integral = (d * base_integral + f(xi) * volume) / (d + 1)
    return CellIntegrals(volume=volume, area=areas, surface_integral=fints,
                         volume_integral=cell_integral)


def poly_error_bounds(mesh: Mesh, i: int, f_second_derivative_bound: float,
                      f_inf: float):
    """Taylor bounds for the interpolation error of the exact scheme.

    Returns:
        (absolute, relative): |C_i| sup|f''| diam^2 and
        inf|f|^-1 sup|f''| diam^2, with the diameter taken over the cell's
        vertices.
    """
    if i in mesh.unbounded_cells() or not mesh.cell_vertices(i):
        raise UnboundedCell(f"cell {i} is unbounded or empty")
    coords = np.array([v.r for v in mesh.cell_vertices(i)])
    diff = coords[:, None, :] - coords[None, :, :]
    diam = float(np.sqrt((diff ** 2).sum(axis=2)).max())
    vol = integrate_cell_poly(mesh, i, lambda x: 0.0, use_cache=False).volume
    absolute = vol * f_second_derivative_bound * diam ** 2
    relative = f_second_derivative_bound * diam ** 2 / f_inf
    return absolute, relative
