import math

import numpy as np
import pytest

from voronray import (MinorTable, build_node_set, integrate_cell_poly,
                      mc_integrate_cell, poly_error_bounds, update_minors,
                      voronoi_graph)
from voronray import rng as _rng
from voronray.errors import MissingCache, OrderViolation, UnboundedCell


def cofactor_det(m):
    """Test-local oracle: textbook cofactor expansion along the first row."""
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    if n == 1:
        return m[0, 0]
    total = 0.0
    for j in range(n):
        minor = np.delete(m[1:, :], j, axis=1)
        total += (-1.0) ** j * m[0, j] * cofactor_det(minor)
    return total


def full_det(table_dim, matrix):
    table = MinorTable(table_dim)
    for k in range(table_dim, 1, -1):
        update_minors(table, matrix[:, k - 1], k)
    return update_minors(table, matrix[:, 0], 1)


def shoelace(coords):
    """Test-local oracle: polygon area from cyclically ordered vertices."""
    x = coords[:, 0]
    y = coords[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def polygon_cell(mesh, i):
    """Cell vertices ordered by angle around their centroid."""
    coords = np.array([v.r for v in mesh.cell_vertices(i)])
    c = coords.mean(axis=0)
    ang = np.arctan2(coords[:, 1] - c[1], coords[:, 0] - c[0])
    return coords[np.argsort(ang)]


def polygon_centroid(coords):
    """Area centroid of a convex polygon via the standard moment formula."""
    x = coords[:, 0]
    y = coords[:, 1]
    cross = x * np.roll(y, -1) - np.roll(x, -1) * y
    a = 0.5 * float(cross.sum())
    cx = float(((x + np.roll(x, -1)) * cross).sum()) / (6 * a)
    cy = float(((y + np.roll(y, -1)) * cross).sum()) / (6 * a)
    return np.array([cx, cy])


# --- minor recursion ---------------------------------------------------------

def test_identity_determinant():
    for d in (2, 3, 5):
        assert full_det(d, np.eye(d)) == pytest.approx(1.0, abs=1e-14)


def test_2x2_determinant():
    m = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert full_det(2, m) == pytest.approx(-2.0, abs=1e-14)


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
def test_minors_match_cofactor_oracle(d):
    rng = np.random.default_rng(50 + d)
    for _ in range(100):
        m = rng.standard_normal((d, d))
        want = cofactor_det(m)
        got = full_det(d, m)
        assert got == pytest.approx(want, rel=1e-9, abs=1e-12)


def test_order_violation():
    table = MinorTable(3)
    with pytest.raises(OrderViolation):
        update_minors(table, np.ones(3), 2)
    update_minors(table, np.ones(3), 3)
    update_minors(table, np.ones(3), 2)
    with pytest.raises(OrderViolation):
        # column 2 must be reloaded once column 3 changed the upper levels
        update_minors(table, np.ones(3), 3)
        update_minors(table, np.ones(3), 1)


def test_column_index_range():
    table = MinorTable(3)
    with pytest.raises(ValueError):
        update_minors(table, np.ones(3), 4)


def test_minor_reload_leaves_higher_levels():
    rng = np.random.default_rng(8)
    m = rng.standard_normal((4, 4))
    table = MinorTable(4)
    for k in (4, 3, 2, 1):
        update_minors(table, m[:, k - 1], k)
    snapshot = {mask: val for mask, val in table.minors.items()
                if bin(mask).count("1") >= 2}  # levels k >= 3
    update_minors(table, rng.standard_normal(4), 2)
    for mask, val in snapshot.items():
        assert table.minors[mask] == val


def test_dimension_cap():
    with pytest.raises(ValueError):
        MinorTable(11)


# --- exact cell integration ----------------------------------------------------

def test_unit_square_exact(unit_square_mesh):
    res = integrate_cell_poly(unit_square_mesh, 0, lambda x: 1.0)
    assert res.volume == pytest.approx(1.0, abs=1e-12)
    for j in (1, 2, 3, 4):
        assert res.area[j] == pytest.approx(1.0, abs=1e-12)
    assert res.volume_integral == pytest.approx(1.0, rel=1e-14)


def test_2d_cells_match_shoelace(mesh_2d):
    cache = {}
    for i in mesh_2d.bounded_cells():
        res = integrate_cell_poly(mesh_2d, i, lambda x: 1.0, cache=cache)
        want = shoelace(polygon_cell(mesh_2d, i))
        assert res.volume == pytest.approx(want, abs=1e-10)


def test_linear_integrand_exact(mesh_2d):
    a = np.array([0.8, -1.7])
    b = 0.45

    def f(x):
        return float(a @ x) + b

    for i in mesh_2d.bounded_cells()[:20]:
        res = integrate_cell_poly(mesh_2d, i, f, use_cache=False)
        coords = polygon_cell(mesh_2d, i)
        centroid = polygon_centroid(coords)
        want = f(centroid) * shoelace(coords)
        assert res.volume_integral == pytest.approx(want, rel=1e-9, abs=1e-12)


def test_constant_integrand_gives_volume(mesh_3d):
    for i in mesh_3d.bounded_cells()[:10]:
        res = integrate_cell_poly(mesh_3d, i, lambda x: 1.0, use_cache=False)
        assert res.volume_integral == pytest.approx(res.volume, rel=1e-13)


def test_cone_rule_reduction_4d():
    # the composed cone rule must collapse to base * height / d at every
    # level; integrating 1 over random 4-d cells witnesses the composition
    pts = np.random.default_rng(64).random((60, 4))
    mesh = voronoi_graph(build_node_set(pts), seed=0)
    cells = mesh.bounded_cells()
    assert cells
    for i in cells[:5]:
        res = integrate_cell_poly(mesh, i, lambda x: 1.0, use_cache=False)
        assert res.volume_integral == pytest.approx(res.volume, rel=1e-12)
        for j, a in res.area.items():
            assert res.surface_integral[j] == pytest.approx(a, rel=1e-12)


def test_area_symmetry_recomputed(mesh_3d):
    results = {}
    for i in mesh_3d.bounded_cells():
        results[i] = integrate_cell_poly(mesh_3d, i, lambda x: x[0], use_cache=False)
    for i, res in results.items():
        for j, a_ij in res.area.items():
            if j in results:
                a_ji = results[j].area[i]
                assert a_ij == pytest.approx(a_ji, rel=1e-10, abs=1e-13)
                f_ij = res.surface_integral[j]
                f_ji = results[j].surface_integral[i]
                assert f_ij == pytest.approx(f_ji, rel=1e-9, abs=1e-13)


def test_cache_reuse_matches_direct(mesh_3d):
    cells = mesh_3d.bounded_cells()
    cache = {}
    with_cache = {i: integrate_cell_poly(mesh_3d, i, lambda x: x[1], cache=cache)
                  for i in cells}
    for i in cells[:10]:
        direct = integrate_cell_poly(mesh_3d, i, lambda x: x[1], use_cache=False)
        assert with_cache[i].volume == pytest.approx(direct.volume, rel=1e-10)
        assert with_cache[i].volume_integral == pytest.approx(
            direct.volume_integral, rel=1e-9, abs=1e-13)


def test_strict_cache_raises(mesh_3d):
    cells = mesh_3d.bounded_cells()
    i = cells[-1]
    lower = [j for j in mesh_3d.neighbors(i) if j < i]
    assert lower
    with pytest.raises(MissingCache):
        integrate_cell_poly(mesh_3d, i, lambda x: 1.0, cache={}, strict_cache=True)


def test_unbounded_cell_raises(mesh_2d):
    unbounded = sorted(mesh_2d.unbounded_cells())[0]
    with pytest.raises(UnboundedCell):
        integrate_cell_poly(mesh_2d, unbounded, lambda x: 1.0)


def test_volume_additivity_against_vertex_hull(mesh_2d):
    # bounded cells are disjoint and each is the hull of its vertices, so
    # their volumes sum to at most the hull volume of all vertices (the
    # hull of the generators is NOT an upper bound: bounded cells of
    # near-hull generators legitimately poke far outside it)
    from scipy.spatial import ConvexHull
    total = sum(integrate_cell_poly(mesh_2d, i, lambda x: 1.0, use_cache=False).volume
                for i in mesh_2d.bounded_cells())
    vcoords = np.array([v.r for v in mesh_2d.vertices.values()])
    assert total <= ConvexHull(vcoords).volume + 1e-12


def test_mc_poly_agreement(mesh_2d):
    ns = mesh_2d.nodes
    for i in mesh_2d.bounded_cells()[:8]:
        poly = integrate_cell_poly(mesh_2d, i, lambda x: 1.0, use_cache=False)
        mc = mc_integrate_cell(ns, i, lambda x: 1.0, 10_000, 1,
                               _rng.stream(7, "test", i))
        assert mc.volume == pytest.approx(poly.volume, rel=0.1)


# --- error bounds ---------------------------------------------------------------

def test_error_bounds_linear_zero(unit_square_mesh):
    absolute, relative = poly_error_bounds(unit_square_mesh, 0, 0.0, 1.0)
    assert absolute == 0.0
    assert relative == 0.0


def test_error_bounds_unit_square(unit_square_mesh):
    absolute, relative = poly_error_bounds(unit_square_mesh, 0, 1.0, 1.0)
    assert absolute == pytest.approx(2.0, rel=1e-12)  # 1 * 1 * diam^2, diam = sqrt(2)
    assert relative == pytest.approx(2.0, rel=1e-12)


def test_error_bound_dominates_observed_error(mesh_2d):
    ns = mesh_2d.nodes

    def f(x):
        return math.sin(float(x[0]) ** 2)

    # |f''| = |2 cos(x^2) - 4 x^2 sin(x^2)| <= 2 + 4 = 6 on [0, 1]
    for i in mesh_2d.bounded_cells()[:6]:
        poly = integrate_cell_poly(mesh_2d, i, f, use_cache=False)
        mc = mc_integrate_cell(ns, i, f, 40_000, 4, _rng.stream(11, "test", i))
        bound, _ = poly_error_bounds(mesh_2d, i, 6.0, 1.0)
        se = 4 * abs(mc.volume_integral) * 0.05 + 1e-6
        assert abs(mc.volume_integral - poly.volume_integral) <= bound + se
