import numpy as np
import pytest

from voronray import build_node_set, voronoi_graph

# Center node plus four axis nodes: cell 0 is exactly [-1/2, 1/2]^2.
UNIT_SQUARE_POINTS = [
    (0.0, 0.0),
    (1.0, 0.0),
    (-1.0, 0.0),
    (0.0, 1.0),
    (0.0, -1.0),
]


@pytest.fixture(scope="session")
def unit_square_ns():
    return build_node_set(UNIT_SQUARE_POINTS)


@pytest.fixture(scope="session")
def unit_square_mesh(unit_square_ns):
    return voronoi_graph(unit_square_ns, seed=3)


@pytest.fixture(scope="session")
def mesh_2d():
    """A medium random 2-d instance with plenty of bounded cells."""
    pts = np.random.default_rng(1234).random((120, 2))
    ns = build_node_set(pts)
    return voronoi_graph(ns, seed=0)


@pytest.fixture(scope="session")
def mesh_3d():
    pts = np.random.default_rng(999).random((90, 3))
    ns = build_node_set(pts)
    return voronoi_graph(ns, seed=0)


def brute_nearest(points, q, skip_mask=None):
    """Test-local oracle: plain linear scan with smallest-index ties."""
    best = None
    best_d = np.inf
    for i, p in enumerate(points):
        if skip_mask is not None and skip_mask[i]:
            continue
        dist = float(np.linalg.norm(np.asarray(p) - np.asarray(q)))
        if dist < best_d:
            best = i
            best_d = dist
    return None if best is None else (best, best_d)
