import itertools

import numpy as np
import pytest

from peakmotifs.cluster import (
    ClusterConfigError,
    DissimilarityMatrix,
    FeatureMatrix,
    Partition,
    _fcm_memberships,
    fuzzy_cmeans,
    hierarchical_ward,
    kmeans,
    minmax_normalize,
    pam,
    rf_dissimilarity,
    run_suite,
    som,
)


def fm(rows, normalized=False):
    rows = np.asarray(rows, dtype=float)
    ids = [f"h{i}" for i in range(len(rows))]
    return FeatureMatrix(ids, rows, [f"c{j}" for j in range(rows.shape[1])], normalized)


def blobs(rng, centers, per_blob=10, spread=0.05):
    rows, truth = [], []
    for ci, c in enumerate(centers):
        rows.extend(np.asarray(c) + rng.normal(0, spread, (per_blob, len(c))))
        truth.extend([ci] * per_blob)
    return fm(rows), np.array(truth)


def same_partition(a: np.ndarray, b: np.ndarray) -> bool:
    """Equality up to relabeling."""
    pairs = {(x, y) for x, y in zip(a, b)}
    return len({x for x, _ in pairs}) == len(pairs) == len({y for _, y in pairs})


class TestMinMaxNormalize:
    def test_affine_rescale(self):
        out = minmax_normalize(fm([[2], [4], [6]]))
        np.testing.assert_allclose(out.rows[:, 0], [0, 0.5, 1])
        assert out.normalized

    def test_constant_column_maps_to_zero(self):
        out = minmax_normalize(fm([[5, 1], [5, 2]]))
        np.testing.assert_array_equal(out.rows[:, 0], [0, 0])

    def test_idempotent_on_full_range(self):
        rows = [[0.0], [0.25], [1.0]]
        np.testing.assert_array_equal(minmax_normalize(fm(rows)).rows, rows)


class TestKMeans:
    def test_k1_center_is_column_means(self, rng):
        m = fm(rng.uniform(0, 1, (12, 3)))
        part = kmeans(m, k=1, seed=0)
        assert set(part.labels) == {1}
        np.testing.assert_allclose(part.centers[0], m.rows.mean(axis=0))

    def test_two_blobs_recovered_vs_bruteforce(self, rng):
        m, truth = blobs(rng, [(0, 0), (5, 5)], per_blob=4, spread=0.5)
        part = kmeans(m, k=2, seed=3)
        # oracle: exhaustive best 2-partition by WCSS
        best, best_assign = np.inf, None
        for bits in itertools.product([0, 1], repeat=len(m.rows)):
            bits = np.array(bits)
            if len(set(bits)) < 2:
                continue
            wcss = sum(
                ((m.rows[bits == c] - m.rows[bits == c].mean(axis=0)) ** 2).sum()
                for c in (0, 1)
            )
            if wcss < best - 1e-12:
                best, best_assign = wcss, bits
        assert same_partition(part.labels, best_assign)

    def test_deterministic(self, rng):
        m = fm(rng.uniform(0, 1, (30, 4)))
        a, b = kmeans(m, 5, seed=9), kmeans(m, 5, seed=9)
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_wcss_monotone(self, rng):
        for trial in range(10):
            m = fm(np.random.default_rng(trial).uniform(0, 1, (40, 3)))
            hist = kmeans(m, 4, seed=trial).diagnostics["wcss_history"]
            assert all(b <= a + 1e-9 for a, b in zip(hist, hist[1:]))

    def test_k_exceeds_rows(self, rng):
        with pytest.raises(ClusterConfigError):
            kmeans(fm(rng.uniform(0, 1, (3, 2))), k=5, seed=0)

    def test_no_empty_clusters(self, rng):
        m = fm(rng.uniform(0, 1, (20, 2)))
        part = kmeans(m, 8, seed=1)
        assert set(part.labels) == set(range(1, 9))


class TestFuzzyCMeans:
    def test_equidistant_memberships(self):
        u = _fcm_memberships(np.array([[0.0]]), np.array([[-1.0], [1.0]]), 2.0)
        np.testing.assert_allclose(u, [[0.5, 0.5]])

    def test_point_at_center_full_membership(self):
        u = _fcm_memberships(np.array([[1.0]]), np.array([[1.0], [3.0]]), 2.0)
        np.testing.assert_array_equal(u, [[1.0, 0.0]])

    def test_row_sums_every_iteration(self, rng):
        m = fm(rng.uniform(0, 1, (30, 3)))
        part = fuzzy_cmeans(m, 4, seed=2)
        errors = part.diagnostics["membership_row_sum_errors"]
        assert errors and max(errors) <= 1e-9
        np.testing.assert_allclose(part.memberships.sum(axis=1), 1.0, atol=1e-9)

    def test_hard_assignment_recovers_blobs(self, rng):
        m, truth = blobs(rng, [(0, 0), (8, 8), (0, 8)], per_blob=8)
        part = fuzzy_cmeans(m, 3, seed=0)
        assert same_partition(part.labels, truth)

    def test_bad_fuzzifier(self, rng):
        with pytest.raises(ClusterConfigError):
            fuzzy_cmeans(fm(rng.uniform(0, 1, (10, 2))), 2, fuzzifier=1.0)

    def test_deterministic(self, rng):
        m = fm(rng.uniform(0, 1, (20, 3)))
        a, b = fuzzy_cmeans(m, 3, seed=5), fuzzy_cmeans(m, 3, seed=5)
        np.testing.assert_array_equal(a.labels, b.labels)


class TestSom:
    def test_identical_rows_single_unit(self):
        m = fm(np.tile([0.3, 0.7], (10, 1)))
        part = som(m, seed=0, epochs=30)
        assert len(set(part.labels)) == 1

    def test_separated_blobs_map_to_distinct_units(self, rng):
        centers = [(i % 4 * 3.0, i // 4 * 3.0) for i in range(8)]
        m, truth = blobs(rng, centers, per_blob=10, spread=0.1)
        part = som(m, seed=1)
        # BMU purity: every blob lands on one unit of its own
        assert same_partition(part.labels, truth)

    def test_deterministic(self, rng):
        m = fm(rng.uniform(0, 1, (20, 3)))
        a, b = som(m, seed=7, epochs=50), som(m, seed=7, epochs=50)
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_fixed_layout(self, rng):
        with pytest.raises(ClusterConfigError):
            som(fm(rng.uniform(0, 1, (20, 2))), k=9)


class TestWard:
    def test_two_points_k2(self):
        part = hierarchical_ward(fm([[0.0], [1.0]]), k=2)
        assert len(set(part.labels)) == 2

    def test_two_points_k1(self):
        part = hierarchical_ward(fm([[0.0], [1.0]]), k=1)
        assert set(part.labels) == {1}

    def test_tight_pairs_recovered(self):
        m = fm([[0.0], [0.1], [5.0], [5.1]])
        part = hierarchical_ward(m, k=2)
        # oracle: exhaustive 2-partitions by the Ward (within-group SS) objective
        best, best_assign = np.inf, None
        for bits in itertools.product([0, 1], repeat=4):
            bits = np.array(bits)
            if len(set(bits)) < 2:
                continue
            ss = sum(
                ((m.rows[bits == c] - m.rows[bits == c].mean(axis=0)) ** 2).sum()
                for c in (0, 1)
            )
            if ss < best - 1e-12:
                best, best_assign = ss, bits
        assert same_partition(part.labels, best_assign)

    def test_merge_heights_nondecreasing(self, rng):
        part = hierarchical_ward(fm(rng.uniform(0, 1, (30, 4))), k=8)
        heights = part.diagnostics["merge_heights"]
        assert all(b >= a - 1e-12 for a, b in zip(heights, heights[1:]))


class TestRfDissimilarity:
    def test_matrix_properties(self, rng):
        m = fm(rng.uniform(0, 1, (20, 5)))
        dis = rf_dissimilarity(m, trees=50, seed=0)
        d = dis.d
        np.testing.assert_array_equal(np.diag(d), 0.0)
        np.testing.assert_allclose(d, d.T)
        assert (d >= 0).all() and (d <= 1).all()

    def test_duplicate_rows_near_zero(self, rng):
        rows = rng.uniform(0, 1, (20, 5))
        rows[1] = rows[0]
        dis = rf_dissimilarity(fm(rows), trees=500, seed=4)
        assert dis.d[0, 1] < 0.2

    def test_deterministic(self, rng):
        m = fm(rng.uniform(0, 1, (15, 4)))
        a = rf_dissimilarity(m, trees=50, seed=2)
        b = rf_dissimilarity(m, trees=50, seed=2)
        np.testing.assert_array_equal(a.d, b.d)


class TestPam:
    def test_saturation_cost_zero(self, rng):
        rows = rng.uniform(0, 1, (5, 2))
        d = np.sqrt(((rows[:, None] - rows[None]) ** 2).sum(-1))
        part = pam(DissimilarityMatrix([f"h{i}" for i in range(5)], d), k=5)
        assert part.diagnostics["cost_history"][-1] == pytest.approx(0.0)
        assert len(set(part.labels)) == 5

    def test_two_groups_hand_matrix(self):
        d = np.array([
            [0.0, 0.1, 0.9, 0.8],
            [0.1, 0.0, 0.85, 0.95],
            [0.9, 0.85, 0.0, 0.1],
            [0.8, 0.95, 0.1, 0.0],
        ])
        part = pam(DissimilarityMatrix(list("abcd"), d), k=2)
        # oracle: exhaustive medoid pairs
        best, best_medoids = np.inf, None
        for pair in itertools.combinations(range(4), 2):
            cost = d[:, pair].min(axis=1).sum()
            if cost < best - 1e-12:
                best, best_medoids = cost, pair
        assert same_partition(part.labels, d[:, best_medoids].argmin(axis=1))
        assert part.diagnostics["cost_history"][-1] == pytest.approx(best)

    def test_cost_monotone(self, rng):
        rows = rng.uniform(0, 1, (30, 3))
        d = np.sqrt(((rows[:, None] - rows[None]) ** 2).sum(-1))
        part = pam(DissimilarityMatrix([f"h{i}" for i in range(30)], d), k=4)
        hist = part.diagnostics["cost_history"]
        assert all(b <= a + 1e-12 for a, b in zip(hist, hist[1:]))

    def test_deterministic(self, rng):
        rows = rng.uniform(0, 1, (20, 3))
        d = np.sqrt(((rows[:, None] - rows[None]) ** 2).sum(-1))
        dm = DissimilarityMatrix([f"h{i}" for i in range(20)], d)
        np.testing.assert_array_equal(pam(dm, 3, seed=1).labels, pam(dm, 3, seed=1).labels)


class TestRunSuite:
    def test_five_partitions(self, rng):
        m, _ = blobs(rng, [(i % 4, i // 4) for i in range(8)], per_blob=4, spread=0.01)
        suite = run_suite(minmax_normalize(m), k=8, seed=0, rf_trees=50)
        assert set(suite) == {"kmeans", "fuzzy", "som", "hier", "rfpam"}
        for part in suite.values():
            assert len(part.labels) == m.n
            assert set(part.labels) <= set(range(1, 9))

    def test_requires_normalized(self, rng):
        with pytest.raises(ClusterConfigError):
            run_suite(fm(rng.uniform(0, 1, (20, 2))), k=8, seed=0)

    def test_deterministic(self, rng):
        m = minmax_normalize(fm(rng.uniform(0, 1, (25, 3))))
        a = run_suite(m, k=8, seed=11, rf_trees=30)
        b = run_suite(m, k=8, seed=11, rf_trees=30)
        for name in a:
            np.testing.assert_array_equal(a[name].labels, b[name].labels)

    def test_k_exceeds_rows_gives_empty_map(self, rng):
        m = minmax_normalize(fm(rng.uniform(0, 1, (5, 2))))
        assert run_suite(m, k=8, seed=0) == {}
