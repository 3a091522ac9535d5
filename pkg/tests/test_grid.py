"""Lattice, BMU search, and initialization unit tests."""

import itertools
import math

import numpy as np
import pytest

from detsom.grid import (
    NodeCoord,
    SomGrid,
    bmu,
    grid_distance,
    gradient_init,
    pairwise_node_distances,
    random_init,
    read_grid_csv,
    write_grid_csv,
)


def brute_force_bmu(grid: SomGrid, f) -> NodeCoord:
    """Row-major scan keeping the first strict minimum squared distance."""
    best = None
    best_d2 = None
    for r in range(1, grid.rows + 1):
        for c in range(1, grid.cols + 1):
            p = grid.prototype(NodeCoord(r, c))
            acc = 0.0
            for i in range(grid.dim):
                term = p[i] - f[i]
                acc += term * term
            if best_d2 is None or acc < best_d2:
                best = NodeCoord(r, c)
                best_d2 = acc
    return best


class TestGridDistance:
    def test_identity(self):
        assert grid_distance(NodeCoord(1, 1), NodeCoord(1, 1)) == 0.0

    def test_diagonal(self):
        # sqrt((4-1)^2 + (3-1)^2) by hand
        assert grid_distance(NodeCoord(1, 1), NodeCoord(4, 3)) == pytest.approx(
            math.sqrt(13), rel=1e-15
        )

    def test_axis_aligned(self):
        assert grid_distance(NodeCoord(2, 2), NodeCoord(2, 5)) == 3.0

    def test_symmetry_and_separation_5x5(self):
        coords = [NodeCoord(r, c) for r in range(1, 6) for c in range(1, 6)]
        for a, b in itertools.product(coords, repeat=2):
            assert grid_distance(a, b) == grid_distance(b, a)
            assert (grid_distance(a, b) == 0.0) == (a == b)

    def test_triangle_inequality_5x5_exhaustive(self):
        coords = [NodeCoord(r, c) for r in range(1, 6) for c in range(1, 6)]
        for a, b, c in itertools.product(coords, repeat=3):
            assert grid_distance(a, c) <= grid_distance(a, b) + grid_distance(b, c) + 1e-12

    def test_pairwise_matrix_matches_scalar(self):
        d = pairwise_node_distances(3, 4)
        g = SomGrid(3, 4, 1, np.zeros((12, 1)))
        for i in range(12):
            for j in range(12):
                assert d[i, j] == grid_distance(g.coord(i), g.coord(j))


class TestSomGrid:
    def test_coord_index_round_trip(self):
        g = SomGrid(4, 3, 2, np.zeros((12, 2)))
        for k in range(12):
            assert g.index(g.coord(k)) == k
        assert g.coord(0) == NodeCoord(1, 1)
        assert g.coord(11) == NodeCoord(4, 3)

    def test_rejects_bad_shapes(self):
        with pytest.raises(ValueError):
            SomGrid(2, 2, 3, np.zeros((4, 2)))
        with pytest.raises(ValueError):
            SomGrid(2, 2, 2, np.zeros((3, 2)))

    def test_rejects_non_finite(self):
        protos = np.zeros((4, 2))
        protos[1, 0] = np.nan
        with pytest.raises(ValueError):
            SomGrid(2, 2, 2, protos)

    def test_out_of_range_coord(self):
        g = SomGrid(2, 2, 1, np.zeros((4, 1)))
        with pytest.raises(IndexError):
            g.index(NodeCoord(3, 1))
        with pytest.raises(IndexError):
            g.coord(4)


class TestBmu:
    def test_nearest_by_inspection(self):
        g = SomGrid(1, 2, 2, np.array([[0.0, 0.0], [1.0, 1.0]]))
        assert bmu(g, [0.1, 0.1]) == NodeCoord(1, 1)

    def test_all_identical_prototypes_tie_break(self):
        g = SomGrid(3, 3, 2, np.full((9, 2), 0.5))
        assert bmu(g, [0.9, 0.2]) == NodeCoord(1, 1)

    def test_unit_square_corners(self):
        corners = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        g = SomGrid(2, 2, 2, corners)
        # enumerate all four distances: [1,0] is nearest to [0.9, 0.1]
        assert bmu(g, [0.9, 0.1]) == g.coord(2)
        assert np.array_equal(g.prototypes[2], [1.0, 0.0])

    def test_dimension_mismatch_rejected(self):
        g = SomGrid(2, 2, 3, np.zeros((4, 3)))
        with pytest.raises(ValueError):
            bmu(g, [1.0, 2.0])

    def test_matches_brute_force_on_random_grids(self):
        rng = np.random.default_rng(1234)
        for _ in range(200):
            rows = int(rng.integers(1, 6))
            cols = int(rng.integers(1, 6))
            dim = int(rng.integers(1, 5))
            g = SomGrid(rows, cols, dim, rng.uniform(-1, 1, (rows * cols, dim)))
            f = rng.uniform(-1, 1, dim)
            assert bmu(g, f) == brute_force_bmu(g, f)

    def test_matches_brute_force_with_duplicate_prototypes(self):
        rng = np.random.default_rng(99)
        protos = rng.uniform(0, 1, (4, 3))
        protos[3] = protos[1]  # duplicate forces a tie
        g = SomGrid(2, 2, 3, protos)
        f = protos[1] + 1e-12
        assert bmu(g, f) == brute_force_bmu(g, f) == g.coord(1)


class TestGradientInit:
    def test_top_left_corner_is_zero(self):
        for rows, cols in [(4, 3), (2, 2), (5, 5), (1, 7)]:
            g = gradient_init(rows, cols, 6)
            assert np.all(g.prototype(NodeCoord(1, 1)) == 0.0)

    def test_bottom_right_corner_is_one(self):
        for rows, cols in [(4, 3), (2, 2), (5, 5), (1, 7)]:
            g = gradient_init(rows, cols, 6)
            assert np.all(g.prototype(NodeCoord(rows, cols)) == 1.0)

    def test_interior_value_4x3(self):
        g = gradient_init(4, 3, 42)
        expected = math.sqrt(2) / math.sqrt(13)
        assert np.all(np.abs(g.prototype(NodeCoord(2, 2)) - expected) <= 1e-12)

    def test_single_node_grid_is_zero(self):
        g = gradient_init(1, 1, 5)
        assert np.all(g.prototypes == 0.0)

    def test_components_equal_within_node(self):
        g = gradient_init(5, 4, 7)
        for k in range(g.n_nodes):
            assert np.all(g.prototypes[k] == g.prototypes[k, 0])

    def test_values_in_unit_interval_and_monotone(self):
        g = gradient_init(6, 5, 3)
        assert np.all(g.prototypes >= 0.0)
        assert np.all(g.prototypes <= 1.0)
        for r in range(1, 7):
            for c in range(1, 6):
                v = g.prototype(NodeCoord(r, c))[0]
                if r < 6:
                    assert g.prototype(NodeCoord(r + 1, c))[0] >= v
                if c < 5:
                    assert g.prototype(NodeCoord(r, c + 1))[0] >= v

    def test_feature_range_rescaling(self):
        lo = np.array([1.0, -2.0])
        hi = np.array([3.0, 0.0])
        g = gradient_init(2, 2, 2, feature_range=(lo, hi))
        assert np.array_equal(g.prototype(NodeCoord(1, 1)), lo)
        assert np.array_equal(g.prototype(NodeCoord(2, 2)), hi)
        mid = g.prototype(NodeCoord(1, 2))
        assert np.allclose(mid, lo + (1 / math.sqrt(2)) * (hi - lo), rtol=1e-15)

    def test_feature_range_rejects_inverted_bounds(self):
        with pytest.raises(ValueError):
            gradient_init(2, 2, 2, feature_range=(np.ones(2), np.zeros(2)))


class TestRandomInit:
    def test_seeded_reproducibility(self):
        a = random_init(3, 4, 5, seed=7, lo=np.zeros(5), hi=np.ones(5))
        b = random_init(3, 4, 5, seed=7, lo=np.zeros(5), hi=np.ones(5))
        assert np.array_equal(a.prototypes, b.prototypes)
        c = random_init(3, 4, 5, seed=8, lo=np.zeros(5), hi=np.ones(5))
        assert not np.array_equal(a.prototypes, c.prototypes)

    def test_degenerate_interval(self):
        lo = np.array([0.25, -1.0, 3.0])
        g = random_init(2, 2, 3, seed=1, lo=lo, hi=lo)
        assert np.array_equal(g.prototypes, np.tile(lo, (4, 1)))

    def test_range_containment(self):
        g = random_init(4, 4, 8, seed=3, lo=np.zeros(8), hi=np.ones(8))
        assert np.all(g.prototypes >= 0.0)
        assert np.all(g.prototypes <= 1.0)

    def test_rejects_inverted_bounds(self):
        with pytest.raises(ValueError):
            random_init(2, 2, 2, seed=0, lo=np.ones(2), hi=np.zeros(2))


class TestGridCsv:
    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(5)
        g = SomGrid(3, 4, 6, rng.uniform(-10, 10, (12, 6)))
        path = tmp_path / "grid.csv"
        write_grid_csv(g, path)
        back = read_grid_csv(path)
        assert back.rows == 3 and back.cols == 4 and back.dim == 6
        assert np.array_equal(back.prototypes, g.prototypes)

    def test_header_and_order(self, tmp_path):
        g = gradient_init(2, 2, 2)
        path = tmp_path / "grid.csv"
        write_grid_csv(g, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "row,col,f0,f1"
        assert [ln.split(",")[:2] for ln in lines[1:]] == [
            ["1", "1"], ["1", "2"], ["2", "1"], ["2", "2"],
        ]

    def test_rejects_incomplete_grid(self, tmp_path):
        path = tmp_path / "grid.csv"
        path.write_text("row,col,f0\n1,1,0.5\n2,2,0.5\n")
        with pytest.raises(ValueError):
            read_grid_csv(path)
