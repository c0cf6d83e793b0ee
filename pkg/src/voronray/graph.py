"""Exhaustive depth-first traversal of the Voronoi vertex graph.

Starting from one vertex found by a randomized descent, the traversal
explores every edge whose visit counter is below two. Each discovered
vertex bumps the counter of all its d+1 edges, so an interior edge whose
two vertices were both found from elsewhere is never raycast at all, and
every vertex is discovered exactly once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import rng as _rng
from .core import Mesh, NodeSet, VertexRecord, BoundaryRay, edge_keys, verify_vertex, TOL_VERTEX
from .errors import RetryExhausted
from .raycast import (RayQuery, RaycastStats, raycast_incircle,
                      raycast_bisection, _orthonormal_rows, _project_out,
                      _vertex_directions)

# Consecutive escaped rays tolerated during descent before giving up.
DESCENT_RETRIES = 100


def edge_set(sigma):
    """The d+1 edges of a vertex: all subsets omitting exactly one generator."""
    sigma = tuple(sigma)
    return set(edge_keys(sigma))


def _resolve_raycaster(method, eps):
    if method == "incircle_heuristic":
        return lambda ns, q, stats: raycast_incircle(ns, q, stats, heuristic=True)
    if method == "incircle":
        return lambda ns, q, stats: raycast_incircle(ns, q, stats, heuristic=False)
    if method == "bisection":
        if eps is None:
            raise ValueError("bisection needs an eps")
        return lambda ns, q, stats: raycast_bisection(ns, q, eps, stats)
    raise ValueError(f"unknown raycast method {method!r}")


def descent(ns: NodeSet, start_index: int, rng=None, stats: RaycastStats = None,
            raycaster=None) -> VertexRecord:
    """Find one Voronoi vertex by raycasting onto successively lower faces.

    From sigma = {start}, draw a uniform direction, project it orthogonal
    to the current generators' differences, and raycast; every success
    grows sigma by one generator until a full vertex is reached.

    Raises:
        RetryExhausted: after 100 consecutive escaped rays at one level.
    """
    if rng is None:
        rng = _rng.stream(0, "descent", start_index)
    if stats is None:
        stats = RaycastStats()
    if raycaster is None:
        raycaster = _resolve_raycaster("incircle_heuristic", None)
    pts = ns.points
    d = ns.dim
    sigma = (int(start_index),)
    r = np.array(pts[start_index], dtype=float)
    failures = 0
    basis = []
    while len(sigma) < d + 1:
        u = rng.standard_normal(d)
        u = _project_out(u, basis)
        norm = np.linalg.norm(u)
        if norm < 1e-9:
            continue  # draw fell into the generator span; free redraw
        res = raycaster(ns, RayQuery(sigma, r, u / norm), stats)
        if res is None:
            failures += 1
            if failures >= DESCENT_RETRIES:
                raise RetryExhausted(
                    f"descent from node {start_index} stuck at level {len(sigma)}")
            continue
        sigma, r = res
        failures = 0
        basis = _orthonormal_rows(pts[list(sigma[1:])] - pts[sigma[0]])
    return VertexRecord(sigma, r)


def voronoi_graph(ns: NodeSet, seed: int = 0, *, method: str = "incircle_heuristic",
                  eps: float = None, stats: RaycastStats = None) -> Mesh:
    """Compute the full Voronoi mesh by exhaustive edge-tracked traversal.

    The queue is a stack (depth-first). Edge counters equal the number of
    discovered incident vertices, so an edge is explored only while some
    endpoint is still unknown; with the exact raycast each vertex is
    therefore discovered once and interior edges trigger at most one
    raycast beyond their first discovery.

    Args:
        ns: node set in general position, N >= d+1.
        seed: seed for the descent direction stream.
        method: "incircle_heuristic", "incircle" or "bisection".
        eps: tolerance for the bisection baseline.
        stats: optional shared counters.
    """
    if stats is None:
        stats = RaycastStats()
    raycaster = _resolve_raycaster(method, eps)
    pts = ns.points

    vertices = {}
    edge_counts = {}
    boundary = []
    stack = []

    def discover(sig, r):
        vertices[sig] = VertexRecord(sig, r)
        for k in range(len(sig)):
            e = sig[:k] + sig[k + 1:]
            edge_counts[e] = edge_counts.get(e, 0) + 1
        stack.append((sig, r))

    first = descent(ns, 0, _rng.stream(seed, "descent", 0), stats, raycaster)
    discover(first.sigma, first.r)

    while stack:
        sig, r = stack.pop()
        open_ks = [k for k in range(len(sig))
                   if edge_counts.get(sig[:k] + sig[k + 1:], 0) < 2]
        if not open_ks:
            continue
        directions = _vertex_directions(pts, sig, open_ks)
        for k in open_ks:
            eta = sig[:k] + sig[k + 1:]
            if edge_counts.get(eta, 0) >= 2:
                continue  # resolved by a discovery earlier in this loop
            u = directions[k]
            res = raycaster(ns, RayQuery(eta, r, u), stats)
            if res is None:
                boundary.append(BoundaryRay(sig, u))
            else:
                sig2, r2 = res
                if sig2 not in vertices:
                    discover(sig2, r2)
                # A known result can only occur with approximate raycasts;
                # counters are left untouched so bookkeeping stays consistent.
    return Mesh(ns, vertices, edge_counts, boundary)


def brute_force_vertices(ns: NodeSet, tol: float = TOL_VERTEX, chunk: int = 8192):
    """Oracle: circumcenters of all (d+1)-subsets that pass the incircle scan.

    Enumerates every candidate generator set, solves the circumcenter
    system in a vectorized batch, and keeps centers whose nearest foreign
    node is no closer than (1 - tol) times the circumradius. Only feasible
    for small instances; used to validate the traversal.
    """
    pts = ns.points
    n, d = ns.n, ns.dim
    combos = np.array(list(combinations(range(n), d + 1)), dtype=np.intp)
    out = {}
    for lo in range(0, len(combos), chunk):
        sub = combos[lo:lo + chunk]
        p = pts[sub]                      # (m, d+1, d)
        a = 2.0 * (p[:, 1:, :] - p[:, :1, :])   # (m, d, d)
        sq = np.einsum("mkd,mkd->mk", p, p)
        b = sq[:, 1:] - sq[:, :1]
        det = np.linalg.det(a)
        ok = np.abs(det) > 1e-12
        centers = np.full((len(sub), d), np.nan)
        if ok.any():
            centers[ok] = np.linalg.solve(a[ok], b[ok][..., None])[..., 0]
        rad = np.linalg.norm(centers - p[:, 0, :], axis=1)
        dist = np.linalg.norm(pts[None, :, :] - centers[:, None, :], axis=2)
        rows = np.arange(len(sub))[:, None]
        dist[rows, sub] = np.inf
        keep = ok & np.isfinite(rad) & (np.min(dist, axis=1) >= rad * (1.0 - tol))
        for row in np.nonzero(keep)[0]:
            sig = tuple(int(x) for x in sub[row])
            out[sig] = centers[row].copy()
    return out


@dataclass
class VerifyReport:
    """Outcome of mesh verification; failures carry human-readable details."""

    vertices_total: int = 0
    vertex_failures: list = field(default_factory=list)
    edge_failures: list = field(default_factory=list)
    oracle_checked: bool = False
    oracle_missing: list = field(default_factory=list)
    oracle_extra: list = field(default_factory=list)
    oracle_coord_failures: list = field(default_factory=list)

    @property
    def passed(self):
        return not (self.vertex_failures or self.edge_failures or
                    self.oracle_missing or self.oracle_extra or
                    self.oracle_coord_failures)


def verify_mesh(mesh: Mesh, oracle: bool = None, coord_tol: float = 1e-8) -> VerifyReport:
    """Run vertex, edge-consistency, and (small instances) oracle checks.

    The oracle comparison re-derives the whole vertex set by subset
    enumeration; it is enabled automatically for d <= 3 and N <= 200.
    """
    ns = mesh.nodes
    report = VerifyReport(vertices_total=len(mesh.vertices))
    for sig, v in mesh.vertices.items():
        if not verify_vertex(mesh, v):
            report.vertex_failures.append(sig)

    by_edge = {}
    for sig in mesh.vertices:
        for e in edge_keys(sig):
            by_edge.setdefault(e, []).append(sig)
    for eta, count in mesh.edge_counts.items():
        incident = by_edge.get(eta, [])
        if count == 2:
            if len(incident) != 2:
                report.edge_failures.append((eta, f"count 2 but {len(incident)} vertices"))
                continue
            shared = set(incident[0]) & set(incident[1])
            if shared != set(eta):
                report.edge_failures.append((eta, "incident sigmas do not intersect in eta"))
        elif count == 1:
            if len(incident) != 1:
                report.edge_failures.append((eta, f"count 1 but {len(incident)} vertices"))
        else:
            report.edge_failures.append((eta, f"invalid count {count}"))

    if oracle is None:
        oracle = ns.dim <= 3 and ns.n <= 200
    if oracle:
        report.oracle_checked = True
        truth = brute_force_vertices(ns)
        ours = {sig: v.r for sig, v in mesh.vertices.items()}
        report.oracle_missing = sorted(set(truth) - set(ours))
        report.oracle_extra = sorted(set(ours) - set(truth))
        for sig in set(truth) & set(ours):
            if np.linalg.norm(truth[sig] - ours[sig]) > coord_tol * max(
                    1.0, float(np.linalg.norm(truth[sig]))):
                report.oracle_coord_failures.append(sig)
    return report
