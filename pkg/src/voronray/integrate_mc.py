"""Monte-Carlo estimation of cell volumes, face areas, and integrals.

Directions are sampled uniformly on the sphere; a raycast from the cell
generator finds the boundary distance l and the neighbor across the hit
face. The change of variables from sphere to boundary weighs each hit by
l^(d-1) / <n_ij, y>, and sampling along the ray extends the estimator to
volume integrals. No variance reduction is attempted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import NodeSet
from .errors import UnboundedRay
from .raycast import RayQuery, RaycastStats, raycast_incircle

# An integrand maps one coordinate vector to a float and must be
# deterministic; the built-ins used by the CLI live in `integrands`.
Integrand = Callable[[np.ndarray], float]


@dataclass
class CellIntegrals:
    """Per-cell results shared by all three integration schemes.

    ``area`` and ``surface_integral`` are keyed by neighbor index; the keys
    always agree. Monte-Carlo fills ``n_rays``/``m_subsamples``; the exact
    scheme leaves them zero.
    """

    volume: float = 0.0
    area: dict = field(default_factory=dict)
    surface_integral: dict = field(default_factory=dict)
    volume_integral: float = 0.0
    n_rays: int = 0
    m_subsamples: int = 0


def sphere_surface_area(d: int) -> float:
    """Surface area of the unit sphere in R^d: 2 pi^(d/2) / Gamma(d/2)."""
    if d < 1:
        raise ValueError("dimension must be positive")
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def sample_unit_sphere(d: int, rng) -> np.ndarray:
    """Uniform direction on S^(d-1) by normalizing a Gaussian draw."""
    while True:
        y = rng.standard_normal(d)
        norm = math.sqrt(float(y @ y))
        if norm > 0.0:
            return y / norm


def _cast(ns, i, xi, y, stats, candidates):
    res = raycast_incircle(ns, RayQuery((i,), xi, y), stats,
                           heuristic=False, candidates=candidates)
    if res is None:
        raise UnboundedRay(i, y)
    sig, rp = res
    j = sig[1] if sig[0] == i else sig[0]
    return j, rp


def mc_integrate_cell(ns: NodeSet, i: int, f: Integrand, n: int, m: int, rng,
                      neighbors=None, stats: RaycastStats = None) -> CellIntegrals:
    """Estimate volume, face areas, and surface/volume integrals of cell i.

    Args:
        ns: node set.
        i: cell index; must be bounded in every sampled direction.
        f: integrand.
        n: number of rays.
        m: number of uniform samples along each ray for the volume integral.
        rng: random stream for this cell.
        neighbors: optional index array restricting the nearest-neighbor
            search to the cell's known neighbors.
        stats: optional raycast counters.

    Raises:
        UnboundedRay: a ray escaped; the offending direction is attached.
    """
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 rays and m >= 1 subsamples")
    d = ns.dim
    xi = ns.points[i]
    area = {}
    fsurf = {}
    vol = 0.0
    fvol = 0.0
    for _ in range(n):
        y = sample_unit_sphere(d, rng)
        j, rp = _cast(ns, i, xi, y, stats, neighbors)
        seg = rp - xi
        length = math.sqrt(float(seg @ seg))
        nij = ns.points[j] - xi
        cosang = float(nij @ y) / math.sqrt(float(nij @ nij))
        w = length ** (d - 1) / cosang
        area[j] = area.get(j, 0.0) + w
        fsurf[j] = fsurf.get(j, 0.0) + f(rp) * w
        vol += length ** d
        acc = 0.0
        for _ in range(m):
            t = rng.random()
            acc += f(xi + t * seg) * t ** (d - 1)
        fvol += acc * length ** d
    surf = sphere_surface_area(d)
    scale = surf / n
    return CellIntegrals(
        volume=vol * surf / (d * n),
        area={j: a * scale for j, a in area.items()},
        surface_integral={j: s * scale for j, s in fsurf.items()},
        volume_integral=fvol * surf / (n * m),
        n_rays=n,
        m_subsamples=m,
    )


def mc_areas_only(ns: NodeSet, i: int, n: int, rng, neighbors=None,
                  stats: RaycastStats = None, return_samples: bool = False):
    """Face areas and volume of cell i without any integrand evaluation.

    With ``neighbors`` supplied the boundary distance reduces to the first
    bisector crossing among them, which is evaluated for all rays at once;
    without it each ray runs a full raycast. Both paths draw directions
    from ``rng`` in the same order and agree to floating-point roundoff.

    Returns:
        (areas, volume), plus the per-ray l^d samples when
        ``return_samples`` is set (useful for error estimates).
    """
    if n < 1:
        raise ValueError("need n >= 1 rays")
    d = ns.dim
    xi = ns.points[i]
    if neighbors is not None and len(neighbors) > 0:
        out = _mc_areas_batch(ns, i, np.asarray(neighbors, dtype=np.intp), n, rng)
        return out if return_samples else out[:2]
    area = {}
    vol = 0.0
    samples = np.empty(n)
    for k in range(n):
        y = sample_unit_sphere(d, rng)
        j, rp = _cast(ns, i, xi, y, stats, neighbors)
        seg = rp - xi
        length = math.sqrt(float(seg @ seg))
        nij = ns.points[j] - xi
        cosang = float(nij @ y) / math.sqrt(float(nij @ nij))
        area[j] = area.get(j, 0.0) + length ** (d - 1) / cosang
        samples[k] = length ** d
        vol += length ** d
    surf = sphere_surface_area(d)
    scale = surf / n
    areas = {j: a * scale for j, a in area.items()}
    volume = vol * surf / (d * n)
    return (areas, volume, samples) if return_samples else (areas, volume)


def _mc_areas_batch(ns: NodeSet, i: int, neighbors, n: int, rng):
    """Vectorized area/volume pass: first bisector crossing per ray.

    For eta = {i} the raycast's converged parameter is exactly
    t_j = |x_j - x_i|^2 / (2 <y, x_j - x_i>) minimized over neighbors with
    positive denominator, so a whole ray batch collapses to one matrix
    product per quantity.
    """
    d = ns.dim
    xi = ns.points[i]
    diffs = ns.points[neighbors] - xi
    dist2 = np.einsum("kd,kd->k", diffs, diffs)
    y = rng.standard_normal((n, d))
    y /= np.linalg.norm(y, axis=1, keepdims=True)
    denom = 2.0 * (y @ diffs.T)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(denom > 0.0, dist2[None, :] / denom, np.inf)
    k = np.argmin(t, axis=1)
    rows = np.arange(n)
    length = t[rows, k]
    escaped = ~np.isfinite(length)
    if escaped.any():
        bad = int(np.nonzero(escaped)[0][0])
        raise UnboundedRay(i, y[bad])
    cos = 0.5 * denom[rows, k] / np.sqrt(dist2[k])
    w = length ** (d - 1) / cos
    samples = length ** d
    surf = sphere_surface_area(d)
    acc = np.zeros(len(neighbors))
    np.add.at(acc, k, w)
    areas = {int(j): float(a) * surf / n
             for j, a in zip(neighbors, acc) if a > 0.0}
    volume = float(samples.sum()) * surf / (d * n)
    return areas, volume, samples
