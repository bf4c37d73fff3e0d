"""
Test suite for K-means, silhouette scoring and the K sweep.
"""

import math

import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score

from clustering.kmeans import (N_RESTARTS, _repair_empty, as_matrix, euclidean, kmeans_fit,
                               restart_seeds)
from clustering.silhouette import (NOT_ACCEPTABLE, quality_band, silhouette_score, sweep_k)
from loader.errors import (DimensionMismatch, KRangeClampedWarning, NonFiniteInput, SingleCluster,
                           TooFewRows)

DOUBLETONS = [0.0, 1.0, 10.0, 11.0]


def blobs(seed: int, centers, per_cluster: int = 20, spread: float = 0.3):
    rng = np.random.default_rng(seed)
    centers = np.asarray(centers, dtype=float)
    X = np.vstack([rng.normal(c, spread, (per_cluster, centers.shape[1])) for c in centers])
    truth = np.repeat(np.arange(len(centers)), per_cluster)
    return X, truth


def brute_force_silhouette(X, labels) -> float:
    X = np.asarray(X, dtype=float).reshape(len(labels), -1)
    labels = np.asarray(labels)
    scores = []
    for i in range(len(X)):
        own = labels == labels[i]
        if own.sum() == 1:
            scores.append(0.0)
            continue
        d = [math.dist(X[i], X[j]) for j in range(len(X))]
        a = sum(d[j] for j in range(len(X)) if own[j] and j != i) / (own.sum() - 1)
        b = min(np.mean([d[j] for j in range(len(X)) if labels[j] == c])
                for c in set(labels.tolist()) if c != labels[i])
        scores.append((b - a) / max(a, b))
    return float(np.mean(scores))


class TestEuclidean:

    def test_pythagorean_triple(self):
        assert euclidean([3.0, 4.0], [0.0, 0.0]) == 5.0

    def test_matches_naive_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            p, q = rng.normal(size=7), rng.normal(size=7)
            assert euclidean(p, q) == pytest.approx(math.sqrt(sum((a - b) ** 2 for a, b in zip(p, q))))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            euclidean([1.0, 2.0], [1.0, 2.0, 3.0])


class TestKMeans:

    @pytest.mark.parametrize("seed", range(100))
    def test_separated_doubletons(self, seed):
        model = kmeans_fit(DOUBLETONS, 2, seed)
        assert model.labels[0] == model.labels[1]
        assert model.labels[2] == model.labels[3]
        assert model.labels[0] != model.labels[2]
        assert sorted(model.centroids[:, 0]) == [0.5, 10.5]
        assert model.inertia == pytest.approx(1.0)

    def test_recovers_blobs(self):
        X, truth = blobs(1, [[0, 0], [8, 0], [0, 8]])
        model = kmeans_fit(X, 3, seed=4)
        assert adjusted_rand_score(truth, model.labels) == 1.0

    def test_one_cluster_per_row(self):
        X = np.random.default_rng(2).normal(size=(6, 3))
        model = kmeans_fit(X, 6, seed=0)
        assert model.inertia == pytest.approx(0.0, abs=1e-20)
        assert sorted(model.labels.tolist()) == list(range(6))

    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_inertia_never_increases(self, seed):
        X = np.random.default_rng(seed).uniform(size=(80, 4))
        model = kmeans_fit(X, 5, seed)
        history = model.inertia_history
        assert all(b <= a * (1 + 1e-12) + 1e-12 for a, b in zip(history, history[1:]))
        assert model.inertia == pytest.approx(model.recompute_inertia(X))
        assert model.iterations <= 300

    def test_deterministic_for_seed(self):
        X = np.random.default_rng(8).normal(size=(50, 3))
        a, b = kmeans_fit(X, 4, seed=42), kmeans_fit(X, 4, seed=42)
        np.testing.assert_array_equal(a.labels, b.labels)
        np.testing.assert_array_equal(a.centroids, b.centroids)
        assert a.inertia == b.inertia

    def test_restart_seeds(self):
        seeds = restart_seeds(7)
        assert len(seeds) == N_RESTARTS
        assert seeds == restart_seeds(7)
        assert seeds != restart_seeds(8)

    def test_too_few_rows(self):
        with pytest.raises(TooFewRows):
            kmeans_fit([[0.0], [1.0]], 3, seed=0)

    def test_non_finite_input(self):
        with pytest.raises(NonFiniteInput):
            kmeans_fit([[0.0], [np.nan], [1.0]], 2, seed=0)

    def test_non_positive_k(self):
        with pytest.raises(ValueError):
            kmeans_fit([[0.0], [1.0]], 0, seed=0)

    def test_one_dimensional_input_is_a_column(self):
        assert as_matrix([1.0, 2.0, 3.0]).shape == (3, 1)

    def test_empty_cluster_takes_farthest_point(self):
        labels = _repair_empty(np.array([0, 0, 0]), np.array([1.0, 5.0, 2.0]), 2)
        assert labels.tolist() == [0, 1, 0]


class TestSilhouette:

    def test_duplicated_points_score_one(self):
        assert silhouette_score([[0.0], [0.0], [5.0], [5.0]], [0, 0, 1, 1]) == pytest.approx(1.0)

    def test_doubletons(self):
        # points 0 and 11 score 9.5/10.5, points 1 and 10 score 8.5/9.5
        score = silhouette_score(DOUBLETONS, [0, 0, 1, 1])
        assert score == pytest.approx((19 / 21 + 17 / 19) / 2)
        assert score == pytest.approx(brute_force_silhouette(DOUBLETONS, [0, 0, 1, 1]))

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(25, 3))
        labels = rng.integers(0, 4, 25)
        labels[:2] = [0, 1]
        assert silhouette_score(X, labels) == pytest.approx(brute_force_silhouette(X, labels))

    def test_singleton_clusters_score_zero(self):
        X = [[0.0], [0.1], [5.0]]
        assert silhouette_score(X, [0, 0, 1]) == pytest.approx(brute_force_silhouette(X, [0, 0, 1]))

    def test_all_singletons(self):
        assert silhouette_score([[0.0], [1.0], [2.0]], [0, 1, 2]) == 0.0

    def test_label_permutation_invariance(self):
        X = np.random.default_rng(3).normal(size=(30, 2))
        labels = np.arange(30) % 3
        relabeled = np.array([2, 0, 1])[labels]
        assert silhouette_score(X, relabeled) == pytest.approx(silhouette_score(X, labels))

    def test_scale_invariance(self):
        X = np.random.default_rng(4).normal(size=(30, 2))
        labels = np.arange(30) % 2
        assert silhouette_score(3.5 * X, labels) == pytest.approx(silhouette_score(X, labels))

    def test_single_cluster(self):
        with pytest.raises(SingleCluster):
            silhouette_score([[0.0], [1.0]], [0, 0])

    def test_label_count_mismatch(self):
        with pytest.raises(ValueError):
            silhouette_score([[0.0], [1.0]], [0, 1, 1])


class TestQualityBand:

    @pytest.mark.parametrize("score,band", [
        (0.95, "excellent"), (0.71, "excellent"),
        (0.70, "acceptable"), (0.51, "acceptable"),
        (0.50, "poor"), (0.26, "poor"),
        (0.25, NOT_ACCEPTABLE), (-0.4, NOT_ACCEPTABLE),
    ])
    def test_bands(self, score, band):
        assert quality_band(score) == band


class TestSweep:

    def test_two_blobs_pick_two(self):
        X, truth = blobs(6, [[0, 0, 0], [10, 10, 10]], spread=0.2)
        result = sweep_k(X, kmin=2, kmax=6, seed=0)
        assert result.best_k == 2
        assert result.best_score > 0.9
        assert result.band == "excellent"
        assert sorted(result.scores) == [2, 3, 4, 5, 6]
        assert adjusted_rand_score(truth, result.best_model.labels) == 1.0

    def test_kmax_clamped_to_rows_minus_one(self):
        X = np.random.default_rng(0).normal(size=(10, 2))
        with pytest.warns(KRangeClampedWarning):
            result = sweep_k(X, kmin=2, kmax=30, seed=1)
        assert result.kmax == 9
        assert result.clamped
        assert sorted(result.scores) == list(range(2, 10))

    def test_no_k_left(self):
        with pytest.warns(KRangeClampedWarning):
            with pytest.raises(TooFewRows):
                sweep_k([[0.0], [1.0]], kmin=2, kmax=5)

    def test_invalid_range(self):
        with pytest.raises(ValueError):
            sweep_k(np.zeros((10, 2)), kmin=1, kmax=4)
        with pytest.raises(ValueError):
            sweep_k(np.zeros((10, 2)), kmin=5, kmax=4)

    def test_workers_do_not_change_result(self):
        X, _ = blobs(2, [[0, 0], [5, 5], [0, 5]], per_cluster=15, spread=1.0)
        serial = sweep_k(X, kmin=2, kmax=6, seed=3)
        threaded = sweep_k(X, kmin=2, kmax=6, seed=3, workers=4)
        assert serial.scores == threaded.scores
        assert serial.best_k == threaded.best_k

    def test_result_dict(self):
        X, _ = blobs(6, [[0, 0], [10, 10]])
        data = sweep_k(X, kmin=2, kmax=4, seed=0).to_dict()
        assert list(data["scores"]) == ["2", "3", "4"]
        assert data["best_k"] == 2
        assert data["kmax_clamped"] is False
        assert data["band"] == quality_band(data["best_score"])
