"""Command line interface: compute, integrate, stats, bound, bench."""

from __future__ import annotations

import functools
import sys

import click
import numpy as np

from . import rng as _rng
from .analysis import empirical_scaling, expected_vertices_lower_bound
from .bench import (bench_area_accuracy, bench_integral_comparison,
                    bench_raycast, bench_scaling, rows_to_csv)
from .core import build_node_set
from .graph import verify_mesh, voronoi_graph
from .integrands import resolve as resolve_integrand
from .integrate_hmc import hmc_cell_integral, hmc_interface_integral, hmc_volume
from .integrate_mc import mc_areas_only, mc_integrate_cell
from .integrate_poly import integrate_cell_poly
from .io import (dump_json, integrals_to_dict, mesh_to_dict, read_points_csv)
from .integrate_mc import CellIntegrals


from .errors import VoronoiError


def _friendly(fn):
    """Turn library errors into clean CLI messages with exit code 1."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except VoronoiError as exc:
            raise click.ClickException(f"{type(exc).__name__}: {exc}") from exc

    return wrapper


@click.group()
def main():
    """Voronoi diagrams via incircle raycasting, with cell integration."""


@main.command()
@click.option("--input", "input_path", required=True, help="CSV of points, one per row.")
@click.option("--output", "output_path", required=True, help="Mesh JSON output path.")
@click.option("--seed", default=42, show_default=True, type=int)
@click.option("--header", is_flag=True, help="Skip one CSV header line.")
@click.option("--verify", "do_verify", is_flag=True, help="Run mesh verification.")
@_friendly
def compute(input_path, output_path, seed, header, do_verify):
    """Compute the Voronoi mesh of a point cloud."""
    ns = build_node_set(read_points_csv(input_path, header=header))
    mesh = voronoi_graph(ns, seed=seed)
    dump_json(mesh_to_dict(mesh), output_path)
    click.echo(f"vertices={len(mesh.vertices)} boundary_rays={len(mesh.boundary)}")
    if do_verify:
        report = verify_mesh(mesh)
        click.echo(f"verify: {'PASS' if report.passed else 'FAIL'} "
                   f"({report.vertices_total} vertices checked)")
        if not report.passed:
            sys.exit(1)


def _select_cells(spec, mesh):
    if spec == "all":
        return [i for i in range(mesh.nodes.n) if mesh.cell_vertices(i)]
    if spec == "interior":
        return mesh.bounded_cells()
    return [int(tok) for tok in spec.split(",")]


@main.command()
@click.option("--input", "input_path", required=True)
@click.option("--output", "output_path", required=True)
@click.option("--method", type=click.Choice(["mc", "poly", "hmc"]), default="mc",
              show_default=True)
@click.option("--rays", default=1000, show_default=True, type=int)
@click.option("--subsamples", default=2, show_default=True, type=int)
@click.option("--cells", default="interior", show_default=True,
              help="all, interior, or a comma-separated index list.")
@click.option("--function", "func_spec", default="const1", show_default=True,
              help="const1, sinx2, or linear:<coeffs>.")
@click.option("--seed", default=42, show_default=True, type=int)
@click.option("--header", is_flag=True)
@_friendly
def integrate(input_path, output_path, method, rays, subsamples, cells,
              func_spec, seed, header):
    """Integrate cell volumes, areas, and a function over cells."""
    ns = build_node_set(read_points_csv(input_path, header=header))
    f = resolve_integrand(func_spec, ns.dim)
    mesh = voronoi_graph(ns, seed=seed)
    selected = _select_cells(cells, mesh)
    out = []
    cache = {}
    for ci, i in enumerate(sorted(selected)):
        if method == "mc":
            res = mc_integrate_cell(ns, i, f, rays, subsamples,
                                    _rng.stream(seed, "mc", ci),
                                    neighbors=np.asarray(mesh.neighbors(i), dtype=np.intp))
        elif method == "poly":
            res = integrate_cell_poly(mesh, i, f, cache=cache)
        else:
            est, _ = mc_areas_only(ns, i, rays, _rng.stream(seed, "mc", ci),
                                   neighbors=np.asarray(mesh.neighbors(i), dtype=np.intp))
            # faces no ray hit have an estimated area of exactly zero
            areas = {j: est.get(j, 0.0) for j in mesh.neighbors(i)}
            vol = hmc_volume(ns, i, areas, mesh)
            fsurf = {j: hmc_interface_integral(mesh, i, j, a, f)
                     for j, a in areas.items()}
            res = CellIntegrals(volume=vol, area=areas, surface_integral=fsurf,
                                volume_integral=hmc_cell_integral(mesh, i, f, areas, vol),
                                n_rays=rays)
        out.append(integrals_to_dict(i, res, exact=method == "poly"))
    dump_json({"method": method, "seed": seed, "cells": out}, output_path)
    click.echo(f"integrated {len(out)} cells with {method}")


@main.command()
@click.option("--input", "input_path", required=True)
@click.option("--seed", default=42, show_default=True, type=int)
@click.option("--header", is_flag=True)
@_friendly
def stats(input_path, seed, header):
    """Empirical per-cell scaling statistics of a point cloud's diagram."""
    ns = build_node_set(read_points_csv(input_path, header=header))
    mesh = voronoi_graph(ns, seed=seed)
    sc = empirical_scaling(mesh)
    click.echo(f"cells={sc.n_cells} bounded={sc.n_bounded}")
    click.echo(f"vertices/cell: all={sc.vertices_per_cell:.3f} "
               f"bounded={sc.bounded_vertices_per_cell:.3f}")
    click.echo(f"neighbors/cell: all={sc.neighbors_per_cell:.3f} "
               f"bounded={sc.bounded_neighbors_per_cell:.3f}")
    click.echo("note: all-cell averages are biased low against periodic or "
               "cube-clipped references; bounded-cell averages compare better")


@main.command()
@click.option("--dim", required=True, type=int)
@_friendly
def bound(dim):
    """Closed-form lower bound for expected vertices per cell."""
    click.echo(f"{expected_vertices_lower_bound(dim):.6g}")


@main.group()
def bench():
    """Benchmark subcommands; see each one's --help for CSV columns."""


def _emit(rows, output, fmt, columns=None):
    if fmt == "json":
        dump_json(rows, output)
    else:
        rows_to_csv(rows, output, columns)
    click.echo(f"wrote {len(rows)} rows to {output}")


@bench.command("raycast")
@click.option("--dim", default=2, show_default=True, type=int)
@click.option("--n", default=1000, show_default=True, type=int)
@click.option("--method", default="incircle_heuristic", show_default=True,
              type=click.Choice(["incircle_heuristic", "incircle", "bisection"]))
@click.option("--eps", default=1e-8, show_default=True, type=float)
@click.option("--seed", default=42, show_default=True, type=int)
@click.option("--output", required=True)
@click.option("--format", "fmt", default="csv", type=click.Choice(["csv", "json"]))
@_friendly
def bench_raycast_cmd(dim, n, method, eps, seed, output, fmt):
    """Columns: dim,n_points,method,n_vertices,nn_calls,raycasts,nn_calls_per_vertex."""
    row = bench_raycast(dim, n, method, seed,
                        eps=eps if method == "bisection" else None,
                        check_spurious=method == "bisection")
    _emit([row], output, fmt)


@bench.command("scaling")
@click.option("--dim", default=2, show_default=True, type=int)
@click.option("--sizes", default="100,300,1000,3000", show_default=True,
              help="Comma-separated point counts.")
@click.option("--seed", default=42, show_default=True, type=int)
@click.option("--repeats", default=1, show_default=True, type=int,
              help="Timing repetitions per size; the fastest run is kept.")
@click.option("--output", required=True)
@click.option("--format", "fmt", default="csv", type=click.Choice(["csv", "json"]))
@_friendly
def bench_scaling_cmd(dim, sizes, seed, repeats, output, fmt):
    """Columns: n,seconds,n_vertices."""
    rows = bench_scaling(dim, [int(tok) for tok in sizes.split(",")], seed,
                         repeats=repeats)
    _emit(rows, output, fmt, columns=["n", "seconds", "n_vertices"])


@bench.command("area")
@click.option("--dim", default=3, show_default=True, type=int)
@click.option("--n", default=500, show_default=True, type=int)
@click.option("--rays", default="1000,3000,10000", show_default=True)
@click.option("--bins", default=30, show_default=True, type=int)
@click.option("--seed", default=42, show_default=True, type=int)
@click.option("--max-cells", default=100, show_default=True, type=int)
@click.option("--output", required=True)
@click.option("--format", "fmt", default="csv", type=click.Choice(["csv", "json"]))
@_friendly
def bench_area_cmd(dim, n, rays, bins, seed, max_cells, output, fmt):
    """Columns: rays,bin,count,mean,std (per-face records in JSON mode)."""
    rays_list = [int(tok) for tok in rays.split(",")]
    records, summary = bench_area_accuracy(dim, n, rays_list, bins, seed,
                                           max_cells=max_cells)
    if fmt == "json":
        dump_json({"records": records, "summary": summary}, output)
        click.echo(f"wrote {len(records)} records to {output}")
    else:
        rows_to_csv(summary, output, columns=["rays", "bin", "count", "mean", "std"])
        click.echo(f"wrote {len(summary)} rows to {output}")


@bench.command("integrals")
@click.option("--dim", default=3, show_default=True, type=int)
@click.option("--n", default=500, show_default=True, type=int)
@click.option("--methods", default="MC,P", show_default=True,
              help="Comma-separated pair from P, MC, HMC.")
@click.option("--rays", default=1000, show_default=True, type=int)
@click.option("--subsamples", default=2, show_default=True, type=int)
@click.option("--function", "func_spec", default="sinx2", show_default=True)
@click.option("--seed", default=42, show_default=True, type=int)
@click.option("--max-cells", default=100, show_default=True, type=int)
@click.option("--output", required=True)
@click.option("--format", "fmt", default="csv", type=click.Choice(["csv", "json"]))
@_friendly
def bench_integrals_cmd(dim, n, methods, rays, subsamples, func_spec, seed,
                        max_cells, output, fmt):
    """Columns: cell,neighbor,fraction,i1,i2,deviation."""
    pair = tuple(tok.strip() for tok in methods.split(","))
    f = resolve_integrand(func_spec, dim)
    rows = bench_integral_comparison(dim, n, pair, seed, rays=rays,
                                     subsamples=subsamples, f=f,
                                     max_cells=max_cells)
    _emit(rows, output, fmt,
          columns=["cell", "neighbor", "fraction", "i1", "i2", "deviation"])
