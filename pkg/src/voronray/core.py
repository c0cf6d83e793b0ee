"""Node storage, filtered nearest-neighbor queries, and the Voronoi mesh.

The mesh follows the usual duality conventions: a vertex is equidistant to
d+1 generators (stored as the sorted index tuple ``sigma`` plus the
coordinate ``r``), an edge is the d-subset ``eta`` shared by its incident
vertices, and unbounded edges are kept as rays anchored at their single
vertex. Indices are 0-based everywhere, including serialized output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Optional

import numpy as np
from scipy.spatial import cKDTree

from .errors import DimensionMismatch, DuplicatePoint

# Relative tolerance for the two vertex invariants (equidistance and
# incircle).  Double precision leaves ~1e-12 of headroom; 1e-8 absorbs
# accumulation across a few projections.
TOL_VERTEX = 1e-8
# Relative band around the circumsphere inside which a foreign generator
# counts as degenerate rather than merely close.
TOL_DEGENERATE = 1e-10
# Slack added to halfspace thresholds so edge generators are never returned.
HALFSPACE_SLACK = 1e-12

# Below this size a vectorized scan beats tree traversal by a wide margin.
_SCAN_MAX = 2048


class NodeSet:
    """Immutable generator points with a skip-aware nearest-neighbor query.

    The query contract is exact equivalence with a brute-force linear scan
    (ties broken by smallest index); the kd-tree backend is an accelerator,
    not a semantic change. ``backend`` is one of ``"scan"``, ``"kdtree"``
    or ``"auto"``.
    """

    def __init__(self, points, backend="auto"):
        pts = np.array(points, dtype=float, copy=True)
        if pts.ndim != 2:
            raise DimensionMismatch("points must form a 2-d array of shape (n, d)")
        self.points = np.ascontiguousarray(pts)
        self.points.setflags(write=False)
        self.n, self.dim = self.points.shape
        self._sq = np.einsum("ij,ij->i", self.points, self.points)
        if backend == "auto":
            backend = "scan" if self.n <= _SCAN_MAX else "kdtree"
        if backend not in ("scan", "kdtree"):
            raise ValueError(f"unknown backend {backend!r}")
        self.backend = backend
        self._tree = cKDTree(self.points) if backend == "kdtree" else None

    def __len__(self):
        return self.n

    def nearest(self, q, skip=None):
        """Index and distance of the nearest point, honoring a skip filter.

        Args:
            q: query coordinate of length ``dim``.
            skip: ``None``, a boolean array marking indices to exclude, or a
                predicate ``index -> bool`` (True means exclude).

        Returns:
            ``(index, distance)`` for the non-skipped minimizer with the
            smallest index on exact ties, or ``None`` if every index is
            skipped.
        """
        if self._tree is not None and callable(skip):
            return self._nearest_tree(q, skip)
        if callable(skip):
            skip = np.fromiter((skip(i) for i in range(self.n)), dtype=bool, count=self.n)
        return self._nearest_scan(q, skip)

    def _nearest_scan(self, q, skip_mask):
        q = np.asarray(q, dtype=float)
        d2 = self._sq - 2.0 * (self.points @ q) + q @ q
        if skip_mask is not None:
            d2 = np.where(skip_mask, np.inf, d2)
        i = int(np.argmin(d2))
        if skip_mask is not None and skip_mask[i]:
            return None
        # recompute cleanly; the expanded form can go slightly negative
        return i, float(np.linalg.norm(self.points[i] - q))

    def _nearest_tree(self, q, skip):
        q = np.asarray(q, dtype=float)
        k = 4
        while True:
            kk = min(k, self.n)
            dist, idx = self._tree.query(q, k=kk)
            for dd, ii in zip(np.atleast_1d(dist), np.atleast_1d(idx)):
                if ii < self.n and not skip(int(ii)):
                    return int(ii), float(dd)
            if kk == self.n:
                return None
            k *= 4

    def nearest2(self, q, skip=None):
        """First and second nearest non-skipped points in one lookup.

        Returns ``((i, dist_i), dist_second)`` with ``dist_second`` infinite
        when fewer than two candidates remain, or ``None`` when all are
        skipped. One logical query; not a second nearest-neighbor call.
        """
        q = np.asarray(q, dtype=float)
        if self._tree is not None and callable(skip):
            k = 8
            while True:
                kk = min(k, self.n)
                dist, idx = self._tree.query(q, k=kk)
                found = []
                for dd, ii in zip(np.atleast_1d(dist), np.atleast_1d(idx)):
                    if ii < self.n and not skip(int(ii)):
                        found.append((int(ii), float(dd)))
                        if len(found) == 2:
                            return found[0], found[1][1]
                if kk == self.n:
                    if not found:
                        return None
                    return found[0], np.inf
                k *= 4
        if callable(skip):
            skip = np.fromiter((skip(i) for i in range(self.n)), dtype=bool, count=self.n)
        d2 = self._sq - 2.0 * (self.points @ q) + q @ q
        if skip is not None:
            d2 = np.where(skip, np.inf, d2)
        order = np.argpartition(d2, min(1, self.n - 1))[:2]
        order = order[np.argsort(d2[order])]
        i = int(order[0])
        if skip is not None and skip[i]:
            return None
        first = (i, float(np.linalg.norm(self.points[i] - q)))
        if len(order) < 2 or not np.isfinite(d2[order[1]]):
            return first, np.inf
        return first, float(np.linalg.norm(self.points[int(order[1])] - q))


def build_node_set(points, backend="auto"):
    """Validate raw coordinates and build a queryable :class:`NodeSet`.

    Raises:
        DimensionMismatch: rows of differing length, or fewer than d+1 points.
        DuplicatePoint: two rows with exactly identical coordinates.
    """
    rows = [np.asarray(p, dtype=float) for p in points]
    if not rows:
        raise DimensionMismatch("empty point set")
    d = rows[0].shape[-1] if rows[0].ndim else 0
    for p in rows:
        if p.ndim != 1 or p.shape[0] != d:
            raise DimensionMismatch("all points must share one dimension")
    if d < 2:
        raise DimensionMismatch("dimension must be at least 2")
    if len(rows) < d + 1:
        raise DimensionMismatch(f"need at least d+1={d + 1} points, got {len(rows)}")
    seen = set()
    for p in rows:
        key = p.tobytes()
        if key in seen:
            raise DuplicatePoint(f"duplicate coordinates {p.tolist()}")
        seen.add(key)
    return NodeSet(np.vstack(rows), backend=backend)


def nearest_neighbor(ns: NodeSet, q, skip: Optional[Callable[[int], bool]] = None):
    """Nearest node to ``q`` among indices where ``skip`` is false.

    Thin public wrapper over :meth:`NodeSet.nearest`; an absent result is a
    valid outcome signalling that every candidate was skipped.
    """
    q = np.asarray(q, dtype=float)
    if q.shape != (ns.dim,):
        raise DimensionMismatch(f"query must have length {ns.dim}")
    return ns.nearest(q, skip)


@dataclass(frozen=True)
class VertexRecord:
    """A Voronoi vertex: sorted generator indices plus its coordinate."""

    sigma: tuple
    r: np.ndarray


@dataclass(frozen=True)
class BoundaryRay:
    """An unbounded edge, anchored at the vertex ``sigma`` with direction ``u``."""

    sigma: tuple
    u: np.ndarray


def edge_keys(sigma):
    """All d-subsets of the sorted (d+1)-tuple ``sigma``, each a sorted tuple."""
    return [sigma[:k] + sigma[k + 1:] for k in range(len(sigma))]


@dataclass
class Mesh:
    """Complete traversal output: vertices, edge visit counts, boundary rays.

    ``edge_counts[eta]`` is the number of discovered vertices incident to the
    edge ``eta``; 2 marks an interior edge, 1 an unbounded one (which then
    also appears in ``boundary``).
    """

    nodes: NodeSet
    vertices: dict
    edge_counts: dict
    boundary: list
    _cell_vertices: dict = field(default=None, repr=False, compare=False)
    _neighbors: dict = field(default=None, repr=False, compare=False)
    _unbounded: frozenset = field(default=None, repr=False, compare=False)
    _unbounded_faces: frozenset = field(default=None, repr=False, compare=False)

    def _build_cell_maps(self):
        cells = {}
        neigh = {}
        for v in self.vertices.values():
            for i in v.sigma:
                cells.setdefault(i, []).append(v)
                s = neigh.setdefault(i, set())
                s.update(v.sigma)
        for i, s in neigh.items():
            s.discard(i)
        self._cell_vertices = cells
        self._neighbors = {i: tuple(sorted(s)) for i, s in neigh.items()}

    def cell_vertices(self, i):
        """Vertices whose generator set contains cell ``i``."""
        if self._cell_vertices is None:
            self._build_cell_maps()
        return self._cell_vertices.get(i, [])

    def neighbors(self, i):
        """Sorted indices of the cells sharing a face with cell ``i``."""
        if self._neighbors is None:
            self._build_cell_maps()
        return self._neighbors.get(i, ())

    def unbounded_cells(self):
        """Cells incident to at least one unbounded edge."""
        if self._unbounded is None:
            out = set()
            for eta, c in self.edge_counts.items():
                if c == 1:
                    out.update(eta)
            self._unbounded = frozenset(out)
        return self._unbounded

    def bounded_cells(self):
        """Cells whose every incident edge is interior."""
        unb = self.unbounded_cells()
        return [i for i in range(self.nodes.n) if i not in unb and self.cell_vertices(i)]

    def face_vertices(self, i, j):
        """Vertices of the interface between cells ``i`` and ``j``."""
        return [v for v in self.cell_vertices(i) if j in v.sigma]

    def face_is_unbounded(self, i, j):
        """True when the (i, j) interface touches an unbounded edge."""
        if self._unbounded_faces is None:
            pairs = set()
            for eta, c in self.edge_counts.items():
                if c == 1:
                    pairs.update(combinations(eta, 2))
            self._unbounded_faces = frozenset(pairs)
        key = (i, j) if i < j else (j, i)
        return key in self._unbounded_faces


def verify_vertex(mesh: Mesh, v: VertexRecord, tol: float = TOL_VERTEX) -> bool:
    """Check the two vertex invariants against the full node set.

    Equidistance: all ``sigma`` generators lie at a common distance from
    ``r`` within ``tol`` (relative). Incircle: no foreign node is closer
    than ``(1 - tol)`` times that distance.
    """
    pts = mesh.nodes.points
    sig = list(v.sigma)
    if len(sig) != mesh.nodes.dim + 1 or len(set(sig)) != len(sig):
        return False
    dists = np.linalg.norm(pts[sig] - v.r, axis=1)
    rad = dists[0]
    if rad <= 0.0 or np.max(np.abs(dists - rad)) > tol * rad:
        return False
    d2 = np.linalg.norm(pts - v.r, axis=1)
    d2[sig] = np.inf
    return bool(np.min(d2) >= rad * (1.0 - tol))
