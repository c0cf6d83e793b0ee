"""Benchmark harness: NN-call counting, wall-clock scaling, accuracy studies.

All generators are drawn from seeded streams so every run is reproducible;
results come back as plain lists of dicts ready for CSV or JSON emission.
"""

from __future__ import annotations

import math
import time
import warnings

import numpy as np

from . import rng as _rng
from .core import NodeSet, build_node_set
from .errors import SpuriousVertices
from .graph import voronoi_graph
from .integrands import sinx2
from .integrate_mc import mc_areas_only, mc_integrate_cell
from .integrate_poly import integrate_cell_poly
from .integrate_hmc import hmc_interface_integral
from .raycast import RaycastStats


def _uniform_nodes(d, n, seed, backend="auto"):
    pts = _rng.stream(seed, "bench", d).random((n, d))
    return build_node_set(pts, backend=backend)


def bench_raycast(d: int, n_points: int, method: str, seed: int,
                  eps: float = None, check_spurious: bool = False) -> dict:
    """Mean nearest-neighbor calls per vertex for one raycast method.

    Runs the full traversal and divides total NN calls (descent, interior
    and boundary raycasts, bracketing probes) by the number of vertices
    found. With ``check_spurious`` a bisection run is compared against the
    exact vertex count and a :class:`SpuriousVertices` warning is emitted
    on mismatch.
    """
    ns = _uniform_nodes(d, n_points, seed)
    stats = RaycastStats()
    mesh = voronoi_graph(ns, seed=seed, method=method, eps=eps, stats=stats)
    result = {
        "dim": d,
        "n_points": n_points,
        "method": method if eps is None else f"{method}({eps:g})",
        "n_vertices": len(mesh.vertices),
        "nn_calls": stats.nn_calls,
        "raycasts": stats.raycasts,
        "nn_calls_per_vertex": stats.nn_calls / len(mesh.vertices),
    }
    if check_spurious and method == "bisection":
        exact = voronoi_graph(ns, seed=seed, method="incircle_heuristic")
        result["n_vertices_exact"] = len(exact.vertices)
        if len(exact.vertices) != len(mesh.vertices):
            warnings.warn(
                f"bisection({eps:g}) found {len(mesh.vertices)} vertices, "
                f"exact search found {len(exact.vertices)}", SpuriousVertices)
    return result


def bench_scaling(d: int, sizes, seed: int, method: str = "incircle_heuristic",
                  backend: str = "kdtree", repeats: int = 1):
    """Wall-clock seconds of the full traversal for each input size.

    One backend for the whole sweep; mixing the scan and tree paths across
    sizes would fold the backend switch into the scaling exponent. With
    ``repeats`` > 1 the fastest run is reported, which filters scheduler
    noise out of exponent fits.
    """
    rows = []
    for n in sizes:
        pts = _rng.stream(seed, "bench", n).random((n, d))
        ns = NodeSet(pts, backend=backend)
        best = math.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            mesh = voronoi_graph(ns, seed=seed, method=method)
            best = min(best, time.perf_counter() - t0)
        rows.append({"n": n, "seconds": best, "n_vertices": len(mesh.vertices)})
    return rows


def fit_loglog_slope(xs, ys):
    """Least-squares slope of log(y) against log(x)."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    lx = lx - lx.mean()
    return float((lx @ (ly - ly.mean())) / (lx @ lx))


def bench_area_accuracy(d: int, n_points: int, rays_list, bins: int, seed: int,
                        max_cells: int = None):
    """MC-vs-exact relative area deviation, binned by face area fraction.

    For every bounded cell the exact face areas define each face's share I
    of the cell surface; faces land in ``bins`` one-percent bins for
    1% <= I. Per ray count and bin the mean and standard deviation of the
    relative deviation (A_mc - A_exact) / A_exact are reported.

    Returns:
        (records, summary): raw per-face records and aggregated rows.
    """
    ns = _uniform_nodes(d, n_points, seed)
    mesh = voronoi_graph(ns, seed=seed)
    cells = mesh.bounded_cells()
    if max_cells is not None:
        cells = cells[:max_cells]
    records = []
    for ci, i in enumerate(cells):
        exact = integrate_cell_poly(mesh, i, lambda x: 0.0, use_cache=False)
        total = sum(exact.area.values())
        neighbors = np.asarray(mesh.neighbors(i), dtype=np.intp)
        for ri, rays in enumerate(rays_list):
            stream = _rng.stream(seed, "mc", ci * len(rays_list) + ri)
            est, _ = mc_areas_only(ns, i, rays, stream, neighbors=neighbors)
            for j, a_exact in exact.area.items():
                frac = a_exact / total
                bin_idx = int(frac * 100)
                if not 1 <= bin_idx <= bins:
                    continue
                dev = (est.get(j, 0.0) - a_exact) / a_exact
                records.append({"cell": i, "neighbor": j, "rays": rays,
                                "fraction": frac, "bin": bin_idx, "deviation": dev})
    summary = []
    for rays in rays_list:
        for b in range(1, bins + 1):
            devs = [r["deviation"] for r in records
                    if r["rays"] == rays and r["bin"] == b]
            if len(devs) >= 2:
                arr = np.asarray(devs)
                summary.append({"rays": rays, "bin": b, "count": len(devs),
                                "mean": float(arr.mean()),
                                "std": float(arr.std(ddof=1))})
    return records, summary


def _poly_interface_integrals(mesh, cells, f):
    """Exact per-interface integrals and areas keyed by (min, max)."""
    cache = {}
    out = {}
    areas = {}
    for i in sorted(cells):
        res = integrate_cell_poly(mesh, i, f, cache=cache)
        for j, val in res.surface_integral.items():
            key = (i, j) if i < j else (j, i)
            out[key] = val
            areas[key] = res.area[j]
    return out, areas


def _mc_interface_integrals(mesh, cells, f, rays, m, seed):
    """MC per-interface integrals/areas, estimated from the lower cell."""
    ns = mesh.nodes
    out = {}
    areas = {}
    for ci, i in enumerate(sorted(cells)):
        neighbors = np.asarray(mesh.neighbors(i), dtype=np.intp)
        res = mc_integrate_cell(ns, i, f, rays, m, _rng.stream(seed, "mc", ci),
                                neighbors=neighbors)
        for j, val in res.surface_integral.items():
            key = (i, j) if i < j else (j, i)
            if key not in out:
                out[key] = val
                areas[key] = res.area[j]
    return out, areas


def _hmc_interface_integrals(mesh, cells, f, rays, seed):
    """HMC per-interface integrals: MC areas plus vertex-averaged values."""
    ns = mesh.nodes
    out = {}
    areas = {}
    for ci, i in enumerate(sorted(cells)):
        neighbors = np.asarray(mesh.neighbors(i), dtype=np.intp)
        est, _ = mc_areas_only(ns, i, rays, _rng.stream(seed, "mc", ci),
                               neighbors=neighbors)
        for j, a in est.items():
            key = (i, j) if i < j else (j, i)
            if key not in out:
                out[key] = hmc_interface_integral(mesh, i, j, a, f)
                areas[key] = a
    return out, areas


def bench_integral_comparison(d: int, n_points: int, methods, seed: int,
                              rays: int = 1000, subsamples: int = 2, f=sinx2,
                              max_cells: int = None):
    """Pairwise deviation 1 + 2 (I1 - I2) / (I1 + I2) of interface integrals.

    ``methods`` is a pair from {"P", "MC", "HMC"}. Both methods run on the
    same mesh; interfaces are compared where both produced a value, with
    the first method's area defining the face's area fraction.
    """
    ns = _uniform_nodes(d, n_points, seed)
    mesh = voronoi_graph(ns, seed=seed)
    cells = mesh.bounded_cells()
    if max_cells is not None:
        cells = cells[:max_cells]

    def run(name, substream):
        if name == "P":
            return _poly_interface_integrals(mesh, cells, f)
        if name == "MC":
            return _mc_interface_integrals(mesh, cells, f, rays, subsamples,
                                           seed * 2 + substream)
        if name == "HMC":
            return _hmc_interface_integrals(mesh, cells, f, rays,
                                            seed * 2 + substream)
        raise ValueError(f"unknown method {name!r}")

    ints1, areas1 = run(methods[0], 0)
    ints2, _ = run(methods[1], 1)
    totals = {}
    for (i, j), a in areas1.items():
        totals[i] = totals.get(i, 0.0) + a
    records = []
    for key in sorted(set(ints1) & set(ints2)):
        i1, i2 = ints1[key], ints2[key]
        if i1 + i2 == 0.0:
            continue
        frac = areas1[key] / totals[key[0]] if totals.get(key[0]) else 0.0
        records.append({"cell": key[0], "neighbor": key[1], "fraction": frac,
                        "i1": i1, "i2": i2,
                        "deviation": 1.0 + 2.0 * (i1 - i2) / (i1 + i2)})
    return records


def rows_to_csv(rows, path, columns=None):
    """Write dict rows as CSV with a deterministic float format."""
    if not rows:
        with open(path, "w") as fh:
            fh.write("\n")
        return
    if columns is None:
        columns = list(rows[0].keys())
    with open(path, "w") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fields = []
            for c in columns:
                v = row.get(c, "")
                fields.append(repr(float(v)) if isinstance(v, float) else str(v))
            fh.write(",".join(fields) + "\n")
