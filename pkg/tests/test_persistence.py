import io
from itertools import combinations
from math import sqrt

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.sparse.csgraph import minimum_spanning_tree

from app.errors import InputError
from app.schemas.geometry import MetricSpaceSpec
from app.schemas.measure import LocallyBoundedMixture, UniformSphere
from worker.complexes import build_alpha_2d, build_rips
from worker.filtration import Filtration
from worker.geometry import PointCloud, pairwise_distances
from worker.persistence import (
    Barcode,
    UnionFind,
    count_longer,
    count_spanning,
    mst,
    mst_from_cloud,
    ph0_reduced,
    reduce,
    reduce_pairs,
)
from worker.sampling import sample

from .conftest import plane_cloud

intervals_strategy = st.lists(
    st.tuples(st.floats(0.0, 1.0), st.floats(0.001, 1.0)).map(lambda t: (t[0], t[0] + t[1])),
    max_size=30,
)


# MST


def test_collinear_mst():
    tree = mst(pairwise_distances(plane_cloud([(0, 0), (1, 0), (3, 0)])))
    assert sorted(tree.lengths.tolist()) == [1.0, 2.0]
    assert tree.total_length == 3.0


def test_equilateral_mst_has_two_unit_edges(equilateral):
    tree = mst(pairwise_distances(equilateral))
    assert len(tree.edges) == 2
    np.testing.assert_allclose(tree.lengths, [1.0, 1.0], atol=1e-15)


def test_single_point_tree_is_empty():
    tree = mst(pairwise_distances(plane_cloud([(0.5, 0.5)])))
    assert tree.edges == []
    assert tree.total_length == 0.0


def test_mst_matches_scipy(random_plane):
    d = pairwise_distances(random_plane(9, seed=21))
    expected = minimum_spanning_tree(d.entries).sum()
    assert mst(d).total_length == pytest.approx(expected, abs=1e-12)


def test_mst_is_the_cheapest_spanning_tree(random_plane):
    d = pairwise_distances(random_plane(6, seed=22))
    all_edges = list(combinations(range(6), 2))
    best = np.inf
    for chosen in combinations(all_edges, 5):
        uf = UnionFind(6)
        if all(uf.union(i, j) for i, j in chosen):
            best = min(best, sum(d.entries[i, j] for i, j in chosen))
    assert mst(d).total_length == pytest.approx(best, abs=1e-12)


def test_cloud_mst_matches_matrix_mst_in_the_plane(random_plane):
    cloud = random_plane(200, seed=23)
    fast = mst_from_cloud(cloud)
    slow = mst(pairwise_distances(cloud))
    np.testing.assert_allclose(np.sort(fast.lengths), np.sort(slow.lengths), atol=1e-12)


def test_cloud_mst_on_the_sphere_is_geodesic():
    cloud = sample(UniformSphere(m=2), 150, seed=24)
    fast = mst_from_cloud(cloud)
    slow = mst(pairwise_distances(cloud))
    assert fast.total_length == pytest.approx(slow.total_length, abs=1e-10)


def test_cloud_mst_on_the_line():
    rng = np.random.default_rng(25)
    cloud = PointCloud(MetricSpaceSpec.euclidean(1), rng.random((100, 1)))
    xs = np.sort(cloud.points[:, 0])
    assert mst_from_cloud(cloud).total_length == pytest.approx(xs[-1] - xs[0], abs=1e-12)


def test_cloud_mst_with_repeated_atoms():
    spec = LocallyBoundedMixture(p=0.5, box_lo=[0.0, 0.0], box_hi=[1.0, 1.0], atoms=[[3.0, 3.0], [3.0, -1.0]])
    cloud = sample(spec, 150, seed=26)
    fast = mst_from_cloud(cloud)
    slow = mst(pairwise_distances(cloud))
    assert len(fast.edges) == 149
    assert fast.total_length == pytest.approx(slow.total_length, abs=1e-10)


# Degree 0


def test_ph0_is_half_the_tree_edges():
    bc = ph0_reduced(pairwise_distances(plane_cloud([(0, 0), (1, 0), (3, 0)])))
    assert bc.intervals_of(0) == [(0.0, 0.5), (0.0, 1.0)]
    assert bc.n_components == 1


def test_ph0_agrees_with_the_reduced_rips_filtration(random_plane):
    d = pairwise_distances(random_plane(25, seed=27))
    from_tree = ph0_reduced(d)
    from_complex = reduce(build_rips(d, 1, d.diameter()))
    np.testing.assert_allclose(from_tree.degree(0), from_complex.degree(0), atol=1e-12)


# Reduction


def test_equilateral_barcode(equilateral):
    bc = reduce(build_alpha_2d(equilateral))
    np.testing.assert_allclose(bc.degree(0), [[0.0, 0.5], [0.0, 0.5]], atol=1e-15)
    np.testing.assert_allclose(bc.degree(1), [[0.5, 1.0 / sqrt(3.0)]], atol=1e-15)
    assert bc.essential_count() == 0


def test_square_barcode_drops_the_diagonal_pair(unit_square):
    bc = reduce(build_alpha_2d(unit_square))
    np.testing.assert_allclose(bc.degree(0), [[0.0, 0.5]] * 3, atol=1e-15)
    np.testing.assert_allclose(bc.degree(1), [[0.5, sqrt(2.0) / 2.0]], atol=1e-15)


def test_vertices_only():
    bc = reduce(Filtration.from_pairs([((0,), 0.0), ((1,), 0.0), ((2,), 0.0)]))
    assert bc.count(0) == 0
    assert bc.n_components == 3


def test_truncated_rips_leaves_an_essential_loop():
    # square plus a point near a corner; the far diagonals never enter at 0.6
    cloud = plane_cloud([(0, 0), (1, 0), (1, 1), (0, 1), (0.1, 0.1)])
    bc = reduce(build_rips(pairwise_distances(cloud), 2, 0.6))
    assert bc.count(1) == 0
    assert bc.essential_count(1) == 1
    assert bc.essential[1].tolist() == [0.5]


def test_reduce_rejects_late_faces():
    f = Filtration.from_pairs([((0,), 0.0), ((1,), 0.7), ((0, 1), 0.5)])
    with pytest.raises(InputError):
        reduce(f)


def test_every_simplex_is_used_once(random_plane):
    f = build_alpha_2d(random_plane(60, seed=28))
    result = reduce_pairs(f)
    used = [k for pair in result.pairs for k in pair] + result.essential
    assert sorted(used) == list(range(len(f.simplices)))
    assert len(result.essential) == 1
    for b, d in result.pairs:
        assert len(f.simplices[d]) == len(f.simplices[b]) + 1
        assert f.values[b] <= f.values[d]


def test_barcode_scales_with_the_cloud(random_plane):
    cloud = random_plane(30, seed=29)
    big = PointCloud(cloud.space, cloud.points * 2.5)
    a = reduce(build_alpha_2d(cloud)).scaled(2.5)
    b = reduce(build_alpha_2d(big))
    np.testing.assert_allclose(a.degree(1), b.degree(1), rtol=1e-9)


# Counting


def test_count_spanning_example():
    bc = Barcode.from_intervals({0: [(0.0, 1.0), (0.2, 0.6)]})
    assert count_spanning(bc, 0, 0.1, 0.8) == 1
    assert count_spanning(bc, 1, 0.1, 0.8) == 0
    with pytest.raises(InputError):
        count_spanning(bc, 0, 0.5, 0.5)


def test_count_longer_example():
    bc = Barcode.from_intervals({1: [(0.0, 1.0), (0.2, 0.6)]})
    assert count_longer(bc, 1, 0.5) == 1
    assert count_longer(bc, 1, 0.3) == 2
    with pytest.raises(InputError):
        count_longer(bc, 1, 0.0)


@given(rows=intervals_strategy, b=st.floats(0.0, 1.0), gap=st.floats(0.001, 1.0))
def test_count_spanning_matches_naive_count(rows, b, gap):
    d = b + gap
    bc = Barcode.from_intervals({1: rows})
    assert count_spanning(bc, 1, b, d) == sum(1 for s, t in rows if s < b and t > d)


@given(
    rows=intervals_strategy,
    b=st.floats(0.0, 1.0),
    steps=st.tuples(st.floats(0.0, 0.5), st.floats(0.001, 0.5), st.floats(0.0, 0.5)),
)
def test_count_spanning_is_monotone(rows, b, steps):
    # b <= b + db < d <= d + dd
    db, gap, dd = steps
    d = b + db + gap
    bc = Barcode.from_intervals({1: rows})
    assert count_spanning(bc, 1, b, d) <= count_spanning(bc, 1, b + db, d)
    assert count_spanning(bc, 1, b, d + dd) <= count_spanning(bc, 1, b, d)


@given(rows=intervals_strategy, delta=st.floats(0.001, 2.0))
def test_count_longer_matches_naive_count(rows, delta):
    bc = Barcode.from_intervals({0: rows})
    assert count_longer(bc, 0, delta) == sum(1 for s, t in rows if t - s > delta)


# Barcode checks and files


def test_violations_flag_planted_interval():
    assert Barcode.from_intervals({0: [(0.0, 0.5)]}).violations() == []
    assert len(Barcode.from_intervals({1: [(0.3, 0.2)]}).violations()) == 1
    assert "negative birth" in Barcode.from_intervals({1: [(-0.1, 0.2)]}).violations()[0]


def test_barcode_csv_keeps_essentials():
    bc = Barcode.from_intervals({0: [(0.0, 0.5)], 1: [(0.5, 0.7)]}, essential={1: [0.4]})
    text = bc.to_csv_text()
    assert text.splitlines()[0] == "degree,birth,death"
    assert "1,0.4,inf" in text.splitlines()

    back = Barcode.read_csv(io.StringIO(text))
    assert back.rows() == bc.rows()
    assert back.essential_count(1) == 1


def test_barcode_csv_rejects_bad_rows():
    with pytest.raises(InputError):
        Barcode.read_csv(io.StringIO("degree,birth,death\n1,abc,0.5\n"))
