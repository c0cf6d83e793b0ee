"""Incircle raycasting along Voronoi edges, plus the bisection baseline.

A ray query starts at a point ``r`` equidistant to the generators ``eta``
and travels along a unit direction ``u`` orthogonal to the affine span of
those generators. The incircle variant projects each nearest-neighbor
candidate onto the ray, giving the exact equidistant point, and terminates
as soon as the nearest neighbor of the candidate confirms it. The search
is restricted to the forward halfspace, which both enforces t > 0 and
makes the candidate crossing parameter t shrink strictly every iteration,
so the loop terminates after finitely many candidates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import HALFSPACE_SLACK, TOL_DEGENERATE, NodeSet
from .errors import DegenerateConfiguration, NoBracket, ParallelGenerator

# A generator closer to the ray plane than this (relative) is treated as
# lying inside it.
PARALLEL_TOL = 1e-14
# Conditioning floor for Gram-Schmidt; below this the generators are
# affinely dependent for our purposes.
RANK_TOL = 1e-10


@dataclass(slots=True)
class RayQuery:
    """Edge/face ray: generator indices ``eta``, anchor ``r``, direction ``u``."""

    eta: tuple
    r: np.ndarray
    u: np.ndarray


@dataclass
class RaycastStats:
    """Counters for benchmark accounting; one nn_call per nearest query."""

    nn_calls: int = 0
    iterations: int = 0
    raycasts: int = 0


def project_t(r, u, x0, x):
    """Ray parameter of the point equidistant to ``x0`` and ``x``.

    Solves |r + t u - x0|^2 = |r + t u - x|^2 for t.

    Raises:
        ParallelGenerator: ``x`` lies in the hyperplane through ``x0``
            orthogonal to ``u``, so no finite crossing exists.
    """
    dx = x - x0
    denom = float(np.dot(u, dx))
    scale = float(np.linalg.norm(dx))
    if abs(denom) < PARALLEL_TOL * scale:
        raise ParallelGenerator("candidate generator lies in the search hyperplane")
    a = r - x
    b = r - x0
    return (float(a @ a) - float(b @ b)) / (2.0 * denom)


def initial_heuristic(q: RayQuery, x):
    """Warm-start point assuming the target vertex caps a regular simplex.

    Projects ``r`` onto the face plane along ``u`` and walks the height a
    regular d-simplex would add over a regular (d-1)-simplex of the
    projected circumradius. Stays on the ray, so equidistance to the
    ``eta`` generators is preserved; only the first probe anchor changes.
    """
    k = len(q.eta)
    if k < 2:
        raise ValueError("heuristic needs at least two known generators")
    rp = q.r + q.u * float(q.u @ (x - q.r))
    rx = rp - x
    radius = math.sqrt(float(rx @ rx))
    return rp + q.u * (radius / math.sqrt((k - 1) * (k + 1)))


class _Probe:
    """Per-raycast nearest-neighbor context restricted to the forward halfspace.

    The halfspace threshold is the common projection of the ``eta``
    generators onto ``u``; candidates need a strictly larger projection
    (with a small slack) so edge generators are never returned.
    """

    def __init__(self, ns: NodeSet, eta, u, candidates=None):
        pts = ns.points
        thr = float(np.max(pts[list(eta)] @ u)) if len(eta) > 1 else float(pts[eta[0]] @ u)
        thr += HALFSPACE_SLACK * max(1.0, abs(thr))
        self.ns = ns
        self.u = u
        self.thr = thr
        if candidates is not None:
            self.idx = np.asarray(candidates, dtype=np.intp)
            self._setup_scan(pts[self.idx], None)
        elif ns.backend == "scan" or ns._tree is None:
            self.idx = None
            self._setup_scan(pts, ns._sq)
        else:
            self.idx = None
            self.cpts = None  # lazy tree path

    def _setup_scan(self, cpts, csq):
        self.cpts = cpts
        if csq is None:
            csq = np.einsum("ij,ij->i", cpts, cpts)
        invalid = (cpts @ self.u) <= self.thr
        self.all_invalid = bool(invalid.all())
        # masked copy: skipped candidates can never win the argmin
        self.csq = np.where(invalid, np.inf, csq)

    def __call__(self, q):
        if self.cpts is not None:
            if self.all_invalid:
                return None
            # q@q is a constant shift and does not move the argmin;
            # it is added back only for the returned distance.
            d2 = self.csq - 2.0 * (self.cpts @ q)
            k = int(np.argmin(d2))
            i = int(self.idx[k]) if self.idx is not None else k
            self._d2 = d2
            self._qq = float(q @ q)
            return i, math.sqrt(max(d2[k] + self._qq, 0.0))
        pts = self.ns.points
        skip = lambda i: float(pts[i] @ self.u) <= self.thr
        self._q = q
        return self.ns.nearest(q, skip)

    def runner_up(self):
        """Distance to the second-nearest candidate of the last probe.

        Reuses the distance vector already computed by the probe, so it
        does not count as a nearest-neighbor call; used only for the
        degeneracy check at confirmation time.
        """
        if self.cpts is not None:
            if len(self._d2) < 2:
                return math.inf
            second = float(np.partition(self._d2, 1)[1])
            return math.sqrt(max(second + self._qq, 0.0))
        pts = self.ns.points
        skip = lambda i: float(pts[i] @ self.u) <= self.thr
        res = self.ns.nearest2(self._q, skip)
        return res[1] if res is not None else math.inf


def raycast_incircle(ns: NodeSet, q: RayQuery, stats: RaycastStats = None,
                     heuristic: bool = True, candidates=None):
    """Exact first Voronoi object hit by the ray, or None if it escapes.

    Iterates nearest-neighbor search and equidistant projection from the
    fixed reference point ``q.r`` until the nearest neighbor of the
    candidate equals the candidate's own generator, which is the incircle
    criterion. Grows ``eta`` by exactly one index.

    Args:
        ns: node set.
        q: valid ray query (equidistant anchor, orthonormal direction).
        stats: optional counters, incremented per nearest-neighbor call.
        heuristic: use the regular-simplex warm start for the first probe
            (only applies to full vertex searches, len(eta) == dim).
        candidates: optional index array restricting the search, e.g. the
            known neighbors of a cell.

    Raises:
        DegenerateConfiguration: a foreign generator sits on the candidate
            circumsphere within the degeneracy band, or the crossing
            parameter fails to shrink.
    """
    if stats is None:
        stats = RaycastStats()
    stats.raycasts += 1
    eta, r, u = q.eta, q.r, q.u
    pts = ns.points
    x0 = pts[eta[0]]
    probe = _Probe(ns, eta, u, candidates)

    anchor = r
    if heuristic and len(eta) == ns.dim and ns.dim >= 2:
        anchor = initial_heuristic(q, x0)
    hit = probe(anchor)
    stats.nn_calls += 1
    if hit is None:
        return None
    i = hit[0]

    b = r - x0
    base = float(b @ b)
    b_u = float(u @ b)
    ux0 = float(u @ x0)
    prev_t = math.inf
    while True:
        stats.iterations += 1
        x = pts[i]
        a = r - x
        t = (float(a @ a) - base) / (2.0 * (float(u @ x) - ux0))
        # Strictly decreasing t is the termination witness: each candidate
        # crossing lies before the previous one, and no candidate repeats.
        if not t < prev_t:
            raise DegenerateConfiguration(
                f"ray parameter stalled at t={t!r} for eta={eta}")
        prev_t = t
        rp = r + t * u
        # |rp - x0| from the ray quadratic; |u| = 1
        radius = math.sqrt(max(base + t * (2.0 * b_u + t), 0.0))
        j, dist_j = probe(rp)
        stats.nn_calls += 1
        if j == i:
            second = probe.runner_up()
            if second < radius * (1.0 + TOL_DEGENERATE):
                raise DegenerateConfiguration(
                    f"a foreign generator lies on the circumsphere of {(*eta, i)}")
            return tuple(sorted((*eta, i))), rp
        if dist_j >= radius * (1.0 - TOL_DEGENERATE):
            raise DegenerateConfiguration(
                f"generator {j} lies on the circumsphere of {(*eta, i)}")
        i = j


def raycast_bisection(ns: NodeSet, q: RayQuery, eps: float,
                      stats: RaycastStats = None, candidates=None):
    """Approximate raycast in the style of the earlier search methods.

    The first nearest neighbor seeds an upper bound through its exact
    crossing; plain bisection then narrows the bracket until it is shorter
    than ``eps``. Every probe costs one nearest-neighbor call. The result
    carries an absolute error on t of at most ``eps``.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if stats is None:
        stats = RaycastStats()
    stats.raycasts += 1
    eta, r, u = q.eta, q.r, q.u
    pts = ns.points
    x0 = pts[eta[0]]
    probe = _Probe(ns, eta, u, candidates)

    hit = probe(r)
    stats.nn_calls += 1
    if hit is None:
        return None
    j_cross, dist0 = hit

    b = r - x0
    base = float(b @ b)
    b_u = float(u @ b)
    radius0 = math.sqrt(base)
    # any crossing satisfies t >= (|r - z| - |r - x0|) / 2 for every
    # forward generator z, so the nearest one bounds the bracket below
    t_lo = max(0.0, 0.5 * (dist0 - radius0))
    try:
        t_hi = project_t(r, u, x0, pts[j_cross])
    except ParallelGenerator:
        t_hi = -1.0
    if not (t_hi > t_lo and math.isfinite(t_hi)):
        # Inexact anchors (vertices produced by earlier approximate casts)
        # can push the projected seed behind the start; fall back to
        # exponential bracketing from the nearest-candidate distance.
        t_lo = 0.0
        t_hi = dist0
        while True:
            j, dist_j = probe(r + t_hi * u)
            stats.nn_calls += 1
            if dist_j < math.sqrt(max(base + t_hi * (2.0 * b_u + t_hi), 0.0)):
                j_cross = j
                break
            t_lo = t_hi
            t_hi *= 2.0
            if t_hi > dist0 * 2.0 ** 60:
                raise NoBracket(f"no crossing within 2^60 steps for eta={eta}")
    while t_hi - t_lo > eps:
        mid = 0.5 * (t_lo + t_hi)
        j, dist_j = probe(r + mid * u)
        stats.nn_calls += 1
        if dist_j < math.sqrt(max(base + mid * (2.0 * b_u + mid), 0.0)):
            # the exact crossing of j tightens the bracket beyond the probe
            try:
                t_hi = min(mid, max(project_t(r, u, x0, pts[j]), t_lo))
            except ParallelGenerator:
                t_hi = mid
            j_cross = j
        else:
            t_lo = mid
    return tuple(sorted((*eta, j_cross))), r + t_hi * u


def _orthonormal_rows(diffs):
    """Orthonormalize row vectors by modified Gram-Schmidt (two passes)."""
    out = []
    for row in diffs:
        v = np.array(row, dtype=float)
        norm0 = math.sqrt(float(v @ v))
        for _ in range(2):
            for qv in out:
                v -= (qv @ v) * qv
        norm = math.sqrt(float(v @ v))
        if norm < RANK_TOL * max(norm0, 1.0):
            raise DegenerateConfiguration("generators are affinely dependent")
        out.append(v / norm)
    return out


def _project_out(w, basis):
    """Component of ``w`` orthogonal to the given orthonormal rows."""
    v = np.array(w, dtype=float)
    for _ in range(2):
        for qv in basis:
            v -= (qv @ v) * qv
    return v


def _search_direction(pts, eta, missing):
    """Unit direction along the edge ``eta``, pointing away from ``missing``."""
    sub = pts[list(eta)]
    basis = _orthonormal_rows(sub[1:] - sub[0]) if len(eta) > 1 else []
    w = sub.sum(axis=0) * (1.0 / len(eta)) - pts[missing]
    v = _project_out(w, basis)
    norm = math.sqrt(float(v @ v))
    if norm < RANK_TOL * max(math.sqrt(float(w @ w)), 1.0):
        raise DegenerateConfiguration(
            f"generator {missing} lies in the affine span of {eta}")
    return v / norm


def search_direction(ns: NodeSet, sigma, eta):
    """Outward search direction for the edge ``eta`` of the vertex ``sigma``.

    The result is orthogonal to the differences of the ``eta`` generators
    and points away from the single generator in ``sigma`` minus ``eta``.
    """
    extra = set(sigma) - set(eta)
    if len(extra) != 1 or not set(eta) <= set(sigma):
        raise ValueError("eta must be sigma minus exactly one generator")
    return _search_direction(ns.points, tuple(eta), extra.pop())


def _vertex_directions(pts, sigma, positions):
    """Outward directions for several edges of one vertex at once.

    With D the matrix of rows x_i - x_s0 over sigma, column j of D^-1 is
    orthogonal to every other row, so a single inverse yields the normal
    of each facet of the generator simplex. Agrees with
    :func:`search_direction` up to floating-point roundoff but costs one
    O(d^3) factorization per vertex instead of one per edge.

    Args:
        pts: full coordinate array.
        sigma: sorted generator tuple of the vertex.
        positions: iterable of positions k; each requests the direction of
            the edge omitting sigma[k].

    Returns:
        dict position -> unit direction.
    """
    sub = pts[list(sigma)]
    diffs = sub[1:] - sub[0]
    try:
        inv = np.linalg.inv(diffs)
    except np.linalg.LinAlgError:
        raise DegenerateConfiguration(
            f"generators of {sigma} are affinely dependent") from None
    out = {}
    for k in positions:
        v = inv.sum(axis=1) if k == 0 else -inv[:, k - 1]
        norm = math.sqrt(float(v @ v))
        if not norm > 0.0 or not math.isfinite(norm):
            raise DegenerateConfiguration(
                f"generators of {sigma} are affinely dependent")
        out[k] = v / norm
    return out
