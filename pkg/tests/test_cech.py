import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import brute_persistence, meb_radius_2d
from pdkde import InvalidArgument, PointCloud, bottleneck, cech_filtration, cloud_diagram, persistence
from pdkde.cech import Filtration, Simplex, _triangle_radii, min_enclosing_ball_radius

SQUARE = PointCloud([[0, 0], [1, 0], [1, 1], [0, 1]])


def equilateral(s=1.0):
    return PointCloud([[0, 0], [s, 0], [s / 2, s * math.sqrt(3) / 2]])


def random_cloud(rng, max_points=6):
    return PointCloud(rng.uniform(0, 1, size=(int(rng.integers(2, max_points + 1)), 2)))


class TestMinEnclosingBall:
    def test_single_point(self):
        assert min_enclosing_ball_radius([[3.0, -1.0]]) == 0.0

    def test_pair(self):
        assert min_enclosing_ball_radius([[0, 0], [2, 0]]) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("s", [1.0, 0.3, 7.5])
    def test_equilateral(self, s):
        assert min_enclosing_ball_radius(equilateral(s).points) == pytest.approx(s / math.sqrt(3), rel=1e-12)

    def test_equilateral_against_center_grid_search(self):
        pts = equilateral().points
        g = np.linspace(-0.2, 1.2, 701)
        X, Y = np.meshgrid(g, g)
        C = np.stack([X.ravel(), Y.ravel()], axis=1)
        worst = np.max(np.linalg.norm(C[:, None, :] - pts[None], axis=2), axis=1)
        assert min_enclosing_ball_radius(pts) == pytest.approx(worst.min(), abs=2e-3)

    def test_obtuse_triangle_uses_longest_side(self):
        assert min_enclosing_ball_radius([[0, 0], [4, 0], [2, 0.5]]) == pytest.approx(2.0, rel=1e-12)

    def test_regular_tetrahedron(self):
        pts = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
        assert min_enclosing_ball_radius(pts) == pytest.approx(math.sqrt(3), rel=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(InvalidArgument):
            min_enclosing_ball_radius(np.zeros((0, 2)))

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=1, max_size=6))
    def test_matches_exhaustive_candidates(self, pts):
        pts = np.array(pts)
        assert min_enclosing_ball_radius(pts) == pytest.approx(meb_radius_2d(pts), rel=1e-9, abs=1e-12)

    def test_vectorized_triangle_radii_match(self):
        rng = np.random.default_rng(5)
        pts = rng.normal(size=(8, 2))
        tris = np.array(list(itertools.combinations(range(8), 3)))
        fast = _triangle_radii(pts, tris)
        slow = [meb_radius_2d(pts[t]) for t in tris]
        np.testing.assert_allclose(fast, slow, rtol=1e-9)


class TestFiltration:
    def test_two_points(self):
        f = cech_filtration(PointCloud([[0, 0], [3, 4]]), max_dim=1)
        assert [s.radius for s in f.simplices] == [0.0, 0.0, 2.5]
        assert f.simplices[-1].vertices == (0, 1)

    def test_equilateral_triangle_radius(self):
        f = cech_filtration(equilateral(2.0), max_dim=2, max_radius=2 / math.sqrt(3) + 1e-9)
        assert f.radii(2) == pytest.approx([2 / math.sqrt(3)], rel=1e-12)

    def test_unit_square(self):
        f = cech_filtration(SQUARE, max_dim=2)
        assert sorted(f.radii(1)) == pytest.approx([0.5] * 4 + [math.sqrt(2) / 2] * 2, rel=1e-12)
        assert f.radii(2) == pytest.approx([math.sqrt(2) / 2] * 4, rel=1e-12)

    def test_max_radius_truncates(self):
        f = cech_filtration(SQUARE, max_dim=2, max_radius=0.6)
        assert len(f.radii(1)) == 4 and len(f.radii(2)) == 0

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10_000))
    def test_sorted_and_monotone(self, seed):
        cloud = random_cloud(np.random.default_rng(seed), 7)
        f = cech_filtration(cloud, max_dim=3)
        keys = [(s.radius, s.dim, s.vertices) for s in f.simplices]
        assert keys == sorted(keys)
        pos = {s.vertices: (i, s.radius) for i, s in enumerate(f.simplices)}
        for i, s in enumerate(f.simplices):
            assert list(s.vertices) == sorted(set(s.vertices))
            for face in itertools.combinations(s.vertices, s.dim):
                if face:
                    j, r = pos[face]
                    assert j < i and r <= s.radius

    def test_rejects_bad_dimensions(self):
        with pytest.raises(InvalidArgument):
            cech_filtration(SQUARE, max_dim=0)
        with pytest.raises(InvalidArgument):
            cech_filtration(PointCloud(np.zeros((3, 4))), max_dim=2)


class TestPersistence:
    def test_two_points(self):
        D = cloud_diagram(PointCloud([[0, 0], [3, 4]]), max_degree=0)
        assert list(D) == [(0.0, 2.5, 0)]

    def test_equilateral_loop(self):
        D = cloud_diagram(equilateral(1.0)).of_degree(1)
        assert len(D) == 1
        assert D.features[0].b == pytest.approx(0.5, rel=1e-12)
        assert D.features[0].d == pytest.approx(1 / math.sqrt(3), rel=1e-12)

    def test_unit_square(self):
        D = cloud_diagram(SQUARE)
        h1 = D.of_degree(1)
        assert h1.points() == pytest.approx(np.array([[0.5, math.sqrt(2) / 2]]), rel=1e-12)
        assert sorted(D.of_degree(0).points()[:, 1]) == pytest.approx([0.5] * 3)

    def test_missing_face_rejected(self):
        bad = Filtration((Simplex((0,), 0.0), Simplex((0, 1), 0.5), Simplex((1,), 0.0)), 2)
        with pytest.raises(InvalidArgument):
            persistence(bad, 1)

    def test_degree_bound(self):
        with pytest.raises(InvalidArgument):
            persistence(cech_filtration(SQUARE, max_dim=2), max_degree=2)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 100_000))
    def test_matches_rank_oracle(self, seed):
        cloud = random_cloud(np.random.default_rng(seed))
        f = cech_filtration(cloud, max_dim=2)
        got = sorted(tuple(x) for x in persistence(f, 1))
        want = brute_persistence([(s.vertices, s.radius) for s in f.simplices], 1)
        assert got == want

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 100_000))
    def test_h0_invariants(self, seed):
        cloud = random_cloud(np.random.default_rng(seed), 8)
        D = cloud_diagram(cloud, max_degree=1)
        h0 = D.of_degree(0)
        assert all(f.b == 0.0 for f in h0)
        # full complex: one component survives, every other point merges once
        assert len(h0) == len(cloud) - 1
        assert all(f.d > f.b >= 0 for f in D)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 100_000))
    def test_stability_under_small_perturbation(self, seed):
        rng = np.random.default_rng(seed)
        pts = rng.uniform(0, 1, size=(6, 2))
        eps = 1e-3
        moved = pts + rng.uniform(-1, 1, size=pts.shape) * eps / math.sqrt(2)
        D1 = cloud_diagram(PointCloud(pts))
        D2 = cloud_diagram(PointCloud(moved))
        assert bottleneck(D1, D2) <= eps + 1e-12
