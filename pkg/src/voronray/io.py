"""CSV point input and JSON mesh/integral serialization.

Points: one point per row, d numeric columns, '.' decimal, no header
unless requested. Mesh JSON schema:

    {"dim": d, "n_nodes": N,
     "vertices": [{"sigma": [...], "r": [...]}, ...],
     "boundary_rays": [{"sigma": [...], "u": [...]}, ...]}

Indices are 0-based. Output is deterministic: vertices and rays are sorted
by sigma and floats use Python's shortest round-trip repr.
"""

from __future__ import annotations

import json

import numpy as np

from .core import BoundaryRay, Mesh, NodeSet, VertexRecord
from .errors import DimensionMismatch
from .integrate_mc import CellIntegrals


def read_points_csv(path, header: bool = False) -> np.ndarray:
    """Load points from CSV; raises DimensionMismatch on ragged rows."""
    try:
        pts = np.loadtxt(path, delimiter=",", skiprows=1 if header else 0, ndmin=2)
    except ValueError as exc:
        raise DimensionMismatch(f"malformed CSV {path}: {exc}") from exc
    return pts


def write_points_csv(path, points) -> None:
    with open(path, "w") as fh:
        for row in np.asarray(points):
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def mesh_to_dict(mesh: Mesh) -> dict:
    verts = [{"sigma": list(sig), "r": [float(x) for x in v.r]}
             for sig, v in sorted(mesh.vertices.items())]
    rays = [{"sigma": list(b.sigma), "u": [float(x) for x in b.u]}
            for b in sorted(mesh.boundary, key=lambda b: (b.sigma, tuple(b.u)))]
    return {
        "dim": mesh.nodes.dim,
        "n_nodes": mesh.nodes.n,
        "vertices": verts,
        "boundary_rays": rays,
    }


def mesh_from_dict(data: dict, ns: NodeSet) -> Mesh:
    if data["dim"] != ns.dim or data["n_nodes"] != ns.n:
        raise DimensionMismatch("mesh file does not match the node set")
    vertices = {}
    for item in data["vertices"]:
        sig = tuple(int(i) for i in item["sigma"])
        vertices[sig] = VertexRecord(sig, np.asarray(item["r"], dtype=float))
    boundary = [BoundaryRay(tuple(int(i) for i in item["sigma"]),
                            np.asarray(item["u"], dtype=float))
                for item in data["boundary_rays"]]
    edge_counts = {}
    for sig in vertices:
        for k in range(len(sig)):
            e = sig[:k] + sig[k + 1:]
            edge_counts[e] = edge_counts.get(e, 0) + 1
    return Mesh(ns, vertices, edge_counts, boundary)


def dump_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def integrals_to_dict(cell: int, res: CellIntegrals, exact: bool) -> dict:
    return {
        "cell": cell,
        "volume": res.volume,
        "area": {str(j): a for j, a in sorted(res.area.items())},
        "surface_integral": {str(j): s for j, s in sorted(res.surface_integral.items())},
        "volume_integral": res.volume_integral,
        "n_rays": res.n_rays,
        "m_subsamples": res.m_subsamples,
        "exact": exact,
    }
