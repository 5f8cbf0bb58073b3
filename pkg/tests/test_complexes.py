import io
from itertools import combinations
from math import sqrt

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from app.errors import DegenerateInputError, InputError, SizeLimitError
from worker.complexes import (
    auto_scale,
    build_alpha_2d,
    build_cech_oracle,
    build_rips,
    count_delaunay_simplices,
    delaunay_2d,
    miniball,
)
from worker.complexes import predicates
from worker.complexes.predicates import incircle, orient2d
from worker.filtration import Filtration, entry_value
from worker.geometry import pairwise_distances

from .conftest import plane_cloud

SQRT2_2 = sqrt(2.0) / 2.0


# Filtration


def test_filtration_keeps_smallest_value_and_orders_entries():
    f = Filtration.from_pairs([((1, 0), 0.5), ((0,), 0.0), ((1,), 0.0), ((0, 1), 0.3)])
    assert f.simplices == ((0,), (1,), (0, 1))
    assert f.value_map()[(0, 1)] == 0.3
    assert f.max_dim == 1
    assert f.count_by_dim() == [2, 1]


def test_filtration_rejects_negative_values():
    with pytest.raises(InputError):
        Filtration.from_pairs([((0,), -0.1)])


def test_check_monotone_finds_late_faces():
    with pytest.raises(InputError):
        Filtration.from_pairs([((0,), 0.0), ((1,), 0.6), ((0, 1), 0.5)]).check_monotone()
    with pytest.raises(InputError):
        Filtration.from_pairs([((0,), 0.0), ((0, 1), 0.5)]).check_monotone()


def test_filtration_text_round_trip(equilateral):
    f = build_alpha_2d(equilateral)
    buf = io.StringIO()
    f.write(buf)
    back = Filtration.read(io.StringIO(buf.getvalue()))
    assert back.simplices == f.simplices
    assert back.values == f.values


def test_filtration_read_rejects_garbage():
    with pytest.raises(InputError):
        Filtration.read(io.StringIO("0.5 1 0\n"))


def test_entry_value_snaps_rounding_noise():
    assert entry_value(0.5 * (1 + 1e-15), 0.5) == 0.5
    assert entry_value(0.6, 0.5) == 0.6


# Rips


def test_rips_two_points():
    f = build_rips(pairwise_distances(plane_cloud([(0, 0), (1, 0)])), 1, 1.0)
    assert f.value_map() == {(0,): 0.0, (1,): 0.0, (0, 1): 0.5}


def test_rips_square_diagonals_and_triangles(unit_square):
    values = build_rips(pairwise_distances(unit_square), 2, 1.0).value_map()
    assert values[(0, 2)] == pytest.approx(SQRT2_2, abs=1e-15)
    assert values[(1, 3)] == pytest.approx(SQRT2_2, abs=1e-15)
    triangles = [s for s in values if len(s) == 3]
    assert len(triangles) == 4
    for t in triangles:
        assert values[t] == pytest.approx(SQRT2_2, abs=1e-15)


def test_rips_truncation_below_every_edge(random_plane):
    cloud = random_plane(12, seed=3)
    d = pairwise_distances(cloud)
    smallest = d.condensed().min() / 2.0
    f = build_rips(d, 2, smallest * 0.99)
    assert f.count_by_dim() == [12]


def test_rips_rejects_bad_arguments(unit_square):
    d = pairwise_distances(unit_square)
    with pytest.raises(InputError):
        build_rips(d, -1, 1.0)
    with pytest.raises(InputError):
        build_rips(d, 1, 0.0)


def test_rips_full_scale_is_the_full_simplex(random_plane):
    d = pairwise_distances(random_plane(7, seed=4))
    assert build_rips(d, 3, d.diameter()).count_by_dim() == [7, 21, 35, 35]


def test_auto_scale_shrinks_with_n():
    assert auto_scale(1000, 2, 1.0, 3.0) < auto_scale(100, 2, 1.0, 3.0)
    assert auto_scale(1, 2, 1.0, 1.0) == auto_scale(2, 2, 1.0, 1.0)


# Delaunay


def test_three_points_one_triangle():
    tri = delaunay_2d(plane_cloud([(0, 0), (1, 0), (0, 1)]))
    assert tri.triangles.shape == (1, 3)
    assert count_delaunay_simplices(tri) == (3, 3, 1)


def test_interior_point_splits_triangle():
    tri = delaunay_2d(plane_cloud([(0, 0), (2, 0), (1, 1.5), (1, 0.5)]))
    assert len(tri.triangles) == 3
    assert tri.hull == (0, 1, 2)


def test_square_corners_tie_break(unit_square):
    tri = delaunay_2d(unit_square)
    assert count_delaunay_simplices(tri) == (4, 5, 2)
    assert (0, 2) in tri.edges()
    assert (1, 3) not in tri.edges()


def test_triangles_are_counterclockwise(random_plane):
    tri = delaunay_2d(random_plane(40, seed=5))
    pts = [tuple(p) for p in tri.points.tolist()]
    for a, b, c in tri.triangles.tolist():
        assert orient2d(pts[a], pts[b], pts[c]) > 0


def test_collinear_and_tiny_inputs_are_degenerate():
    with pytest.raises(DegenerateInputError):
        delaunay_2d(plane_cloud([(0, 0), (1, 1), (2, 2), (3, 3)]))
    with pytest.raises(DegenerateInputError):
        delaunay_2d(plane_cloud([(0, 0), (1, 0)]))
    with pytest.raises(DegenerateInputError):
        delaunay_2d(plane_cloud([(0, 0), (1, 0), (0, 0)]))


def test_duplicates_are_set_aside():
    tri = delaunay_2d(plane_cloud([(0, 0), (1, 0), (0, 1), (1, 0)]))
    assert tri.duplicates == {3: 1}
    assert count_delaunay_simplices(tri) == (3, 3, 1)


@given(seed=st.integers(min_value=0, max_value=2 ** 32 - 1), n=st.integers(min_value=3, max_value=40))
def test_delaunay_has_empty_circumdiscs(seed, n):
    rng = np.random.default_rng(seed)
    cloud = plane_cloud(rng.random((n, 2)))
    tri = delaunay_2d(cloud)
    pts = [tuple(p) for p in tri.points.tolist()]
    for a, b, c in tri.triangles.tolist():
        for p in range(n):
            if p not in (a, b, c):
                assert incircle(pts[a], pts[b], pts[c], pts[p]) <= 0

    v, e, t = count_delaunay_simplices(tri)
    assert v - e + t == 1
    assert t == 2 * v - 2 - tri.hull_size
    assert t <= 2 * n - 5


def test_grid_points_are_triangulated():
    xs, ys = np.meshgrid(np.arange(5.0), np.arange(4.0))
    tri = delaunay_2d(plane_cloud(np.stack([xs.ravel(), ys.ravel()], axis=1)))
    v, e, t = count_delaunay_simplices(tri)
    assert (v, t) == (20, 24)
    assert v - e + t == 1


# Predicates


def test_orient_and_incircle_are_exact_on_ties():
    assert orient2d((0, 0), (1, 1), (2, 2)) == 0
    assert orient2d((0, 0), (1, 0), (0, 1)) == 1
    assert incircle((0, 0), (1, 0), (1, 1), (0, 1)) == 0
    assert incircle((0, 0), (1, 0), (0, 1), (0.25, 0.25)) == 1
    assert incircle((0, 0), (1, 0), (0, 1), (2, 2)) == -1
    # off the float grid by one ulp
    assert incircle((0, 0), (1, 0), (1, 1), (0, np.nextafter(1.0, 2.0))) == -1


def test_error_bounds_use_the_double_rounding_unit():
    assert predicates.EPSILON == 2.0 ** -53
    assert 1.0 + predicates.EPSILON == 1.0
    assert predicates.CCW_ERRBOUND_A == pytest.approx(3.0 * 2.0 ** -53, rel=1e-12)


# Alpha


def test_alpha_equilateral(equilateral):
    values = build_alpha_2d(equilateral).value_map()
    for edge in [(0, 1), (0, 2), (1, 2)]:
        assert values[edge] == pytest.approx(0.5, abs=1e-15)
    assert values[(0, 1, 2)] == pytest.approx(1.0 / sqrt(3.0), abs=1e-15)


def test_alpha_square(unit_square):
    values = build_alpha_2d(unit_square).value_map()
    for edge in [(0, 1), (1, 2), (2, 3), (0, 3)]:
        assert values[edge] == 0.5
    assert values[(0, 2)] == pytest.approx(SQRT2_2, abs=1e-15)
    for t in [(0, 1, 2), (0, 2, 3)]:
        assert values[t] == pytest.approx(SQRT2_2, abs=1e-15)
        assert values[t] >= values[(0, 2)]


def test_alpha_obtuse_triangle_attaches_long_edge():
    values = build_alpha_2d(plane_cloud([(0, 0), (4, 0), (2, 0.5)])).value_map()
    # the long edge is not Gabriel: it enters with the triangle
    assert values[(0, 1)] == values[(0, 1, 2)]
    assert values[(0, 1, 2)] > 2.0


def test_alpha_two_points_is_degenerate():
    with pytest.raises(DegenerateInputError):
        build_alpha_2d(plane_cloud([(0, 0), (1, 0)]))


def test_alpha_joins_duplicates_at_zero():
    values = build_alpha_2d(plane_cloud([(0, 0), (1, 0), (0, 1), (0, 0)])).value_map()
    assert values[(0, 3)] == 0.0


def test_alpha_filtration_is_monotone(random_plane):
    build_alpha_2d(random_plane(200, seed=6)).check_monotone()


# Čech oracle


def test_cech_edge_is_half_distance():
    values = build_cech_oracle(plane_cloud([(0, 0), (3, 4)]), 1).value_map()
    assert values[(0, 1)] == 2.5


def test_cech_acute_and_right_triangles(equilateral):
    assert build_cech_oracle(equilateral, 2).value_map()[(0, 1, 2)] == pytest.approx(1.0 / sqrt(3.0), abs=1e-15)
    right = build_cech_oracle(plane_cloud([(0, 0), (1, 0), (0, 1)]), 2).value_map()
    assert right[(0, 1, 2)] == pytest.approx(SQRT2_2, abs=1e-15)


def test_cech_size_guard(random_plane):
    with pytest.raises(SizeLimitError):
        build_cech_oracle(random_plane(33), 1)


def _smallest_enclosing_radius(points):
    """Brute force: the smallest circumsphere of <= d + 1 points that holds every point."""
    points = np.asarray(points, dtype=float)
    best = np.inf
    for size in range(1, points.shape[1] + 2):
        for subset in combinations(range(len(points)), size):
            p = points[list(subset)]
            a = p[1:] - p[0]
            if size == 1:
                centre = p[0]
            else:
                gram = a @ a.T
                if abs(np.linalg.det(gram)) < 1e-14:
                    continue
                centre = p[0] + np.linalg.solve(gram, 0.5 * np.einsum("ij,ij->i", a, a)) @ a
            radius = np.linalg.norm(p[0] - centre)
            if np.all(np.linalg.norm(points - centre, axis=1) <= radius * (1 + 1e-12) + 1e-15):
                best = min(best, radius)
    return best


@pytest.mark.parametrize("seed", [8, 9, 10])
def test_cech_values_match_brute_force_enclosing_balls(random_plane, seed):
    cloud = random_plane(7, seed=seed)
    values = build_cech_oracle(cloud, 3).value_map()
    for size in (2, 3, 4):
        for simplex in combinations(range(7), size):
            assert values[simplex] == pytest.approx(
                _smallest_enclosing_radius(cloud.points[list(simplex)]), abs=1e-12
            )


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_rips_and_cech_values_within_root_two(random_plane, seed):
    cloud = random_plane(10, seed=seed)
    d = pairwise_distances(cloud)
    rips = build_rips(d, 2, d.diameter()).value_map()
    cech = build_cech_oracle(cloud, 2).value_map()
    assert rips.keys() == cech.keys()
    for simplex, v in cech.items():
        assert rips[simplex] <= v * (1 + 1e-12)
        assert v <= rips[simplex] * sqrt(2.0) + 1e-12


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_miniball_contains_its_points(dim):
    pts = np.random.default_rng(dim).random((25, dim))
    centre, radius = miniball(pts)
    assert np.all(np.linalg.norm(pts - centre, axis=1) <= radius * (1 + 1e-9))
    # some point lies on the boundary
    assert np.isclose(np.linalg.norm(pts - centre, axis=1).max(), radius)


def test_miniball_of_a_segment():
    centre, radius = miniball([[0.0, 0.0], [2.0, 0.0]])
    np.testing.assert_allclose(centre, [1.0, 0.0])
    assert radius == pytest.approx(1.0)
