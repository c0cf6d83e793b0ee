import numpy as np
import pytest

from voronray import (build_node_set, empirical_scaling,
                      expected_vertices_lower_bound, voronoi_graph)

TABLE = {
    2: 6.76, 3: 31.8, 4: 187.0, 5: 1296.0, 6: 1.03e4,
    7: 9.04e4, 8: 8.72e5, 9: 9.09e6, 10: 1.02e8,
}


@pytest.mark.parametrize("d,want", sorted(TABLE.items()))
def test_bound_matches_published_table(d, want):
    assert expected_vertices_lower_bound(d) == pytest.approx(want, rel=0.01)


def test_bound_rejects_out_of_range():
    with pytest.raises(ValueError):
        expected_vertices_lower_bound(1)
    with pytest.raises(ValueError):
        expected_vertices_lower_bound(31)


def test_bound_growth_factor():
    for d in range(2, 6):
        ratio = expected_vertices_lower_bound(d + 1) / expected_vertices_lower_bound(d)
        assert d <= ratio <= d + 4


@pytest.mark.parametrize("d", [2, 3, 4])
def test_simplex_scaling(d):
    pts = np.vstack([np.zeros(d), np.eye(d)])
    mesh = voronoi_graph(build_node_set(pts), seed=0)
    sc = empirical_scaling(mesh)
    assert sc.vertices_per_cell == pytest.approx(1.0)
    assert sc.neighbors_per_cell == pytest.approx(d)
    assert sc.n_bounded == 0


def test_empirical_growth_factor_near_d_plus_2():
    per_cell = {}
    for d in (2, 3, 4, 5):
        pts = np.random.default_rng(60 + d).random((400, d))
        mesh = voronoi_graph(build_node_set(pts), seed=0)
        per_cell[d] = empirical_scaling(mesh).vertices_per_cell
    for d in (2, 3, 4):
        factor = per_cell[d + 1] / per_cell[d]
        assert d <= factor <= d + 4


def test_empirical_scaling_counts(mesh_2d):
    sc = empirical_scaling(mesh_2d)
    n = mesh_2d.nodes.n
    assert sc.n_cells == n
    assert sc.vertices_per_cell == pytest.approx(3 * len(mesh_2d.vertices) / n)
    assert 0 < sc.n_bounded < n
    assert sc.bounded_neighbors_per_cell >= sc.neighbors_per_cell - 1.5
