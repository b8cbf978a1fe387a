"""K-means and the four clustering metrics, checked against brute-force and
pair-counting oracles."""

import itertools

import numpy as np
import pytest
from oracles import accuracy_brute_force, ari_pair_oracle

from anchorpad.cluster import _lloyd, accuracy, ari, evaluate, f1_weighted, kmeans, nmi


class TestKmeans:
    def test_separated_clouds_exact_partition(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=(10, 3)) * 0.01
        b = rng.normal(size=(10, 3)) * 0.01 + 100.0
        x = np.vstack([a, b])
        labels = kmeans(x, 2, seed=1, restarts=4)
        assert len(set(labels[:10])) == 1 and len(set(labels[10:])) == 1
        assert labels[0] != labels[10]

    def test_no_lower_inertia_partition_exists(self):
        # exhaustive check on a tiny instance: k-means reaches the global optimum
        rng = np.random.default_rng(1)
        x = np.vstack([rng.normal(size=(3, 2)), rng.normal(size=(3, 2)) + 50.0])
        labels = kmeans(x, 2, seed=0, restarts=8)

        def inertia_of(assign):
            total = 0.0
            for c in (0, 1):
                members = x[np.asarray(assign) == c]
                if len(members):
                    total += ((members - members.mean(axis=0)) ** 2).sum()
            return total

        ours = inertia_of(labels)
        best = min(
            inertia_of(assign)
            for assign in itertools.product((0, 1), repeat=6)
            if len(set(assign)) == 2
        )
        assert ours == pytest.approx(best, abs=1e-9)

    def test_k_equals_rows(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(5, 2)) * 10
        labels = kmeans(x, 5, seed=3, restarts=2)
        assert sorted(labels) == [0, 1, 2, 3, 4]

    def test_determinism(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(40, 4))
        a = kmeans(x, 3, seed=7, restarts=5)
        b = kmeans(x, 3, seed=7, restarts=5)
        np.testing.assert_array_equal(a, b)

    def test_inertia_non_increasing_per_iteration(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(60, 3))
        for seed in range(5):
            _, _, history = _lloyd(x, 4, np.random.default_rng(seed))
            diffs = np.diff(history)
            assert np.all(diffs <= 1e-9)

    def test_too_few_rows(self):
        with pytest.raises(ValueError):
            kmeans(np.ones((2, 2)), 3, seed=0)


class TestAccuracy:
    def test_identity(self):
        assert accuracy([0, 1, 2, 0], [0, 1, 2, 0]) == 1.0

    def test_swapped_ids(self):
        assert accuracy([1, 0, 1, 0], [0, 1, 0, 1]) == 1.0

    def test_half_agreement(self):
        assert accuracy([0, 1, 0, 1], [0, 0, 1, 1]) == 0.5

    def test_matches_brute_force(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            n = int(rng.integers(4, 30))
            pred = rng.integers(0, 4, size=n)
            truth = rng.integers(0, 3, size=n)
            assert accuracy(pred, truth) == pytest.approx(accuracy_brute_force(pred, truth))

    def test_constant_prediction_equals_largest_class_share(self):
        truth = [0, 0, 0, 1, 1, 2]
        assert accuracy([0] * 6, truth) == pytest.approx(0.5)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            accuracy([0, 1], [0, 1, 2])


class TestNmi:
    def test_identical_partitions(self):
        assert nmi([0, 1, 2, 1], [5, 7, 9, 7]) == pytest.approx(1.0)

    def test_independent_balanced_partitions(self):
        # analytically independent contingency: every cell count equal
        pred = [0, 0, 1, 1, 0, 0, 1, 1]
        truth = [0, 1, 0, 1, 0, 1, 0, 1]
        assert nmi(pred, truth) == pytest.approx(0.0, abs=1e-12)

    def test_symmetry(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            a = rng.integers(0, 4, size=30)
            b = rng.integers(0, 3, size=30)
            assert nmi(a, b) == pytest.approx(nmi(b, a), abs=1e-12)

    def test_both_single_cluster(self):
        assert nmi([0, 0, 0], [1, 1, 1]) == 1.0

    def test_one_side_single_cluster(self):
        assert nmi([0, 0, 0, 0], [0, 1, 0, 1]) == 0.0

    def test_range(self):
        rng = np.random.default_rng(7)
        for _ in range(30):
            a = rng.integers(0, 5, size=40)
            b = rng.integers(0, 5, size=40)
            assert 0.0 <= nmi(a, b) <= 1.0


class TestAri:
    def test_identical_partitions(self):
        assert ari([0, 1, 2, 1], [3, 4, 5, 4]) == pytest.approx(1.0)

    def test_spec_example_matches_pair_oracle(self):
        pred = [0, 1, 0, 1]
        truth = [0, 0, 1, 1]
        assert ari(pred, truth) == pytest.approx(ari_pair_oracle(pred, truth), abs=1e-12)

    def test_matches_pair_oracle_randomly(self):
        rng = np.random.default_rng(8)
        for _ in range(40):
            n = int(rng.integers(4, 25))
            pred = rng.integers(0, 4, size=n)
            truth = rng.integers(0, 3, size=n)
            assert ari(pred, truth) == pytest.approx(ari_pair_oracle(pred, truth), abs=1e-12)

    def test_relabel_invariance(self):
        rng = np.random.default_rng(9)
        pred = rng.integers(0, 4, size=50)
        truth = rng.integers(0, 4, size=50)
        relabeled = (pred + 2) % 4
        assert ari(relabeled, truth) == pytest.approx(ari(pred, truth), abs=1e-12)

    def test_independent_partitions_near_zero_mean(self):
        rng = np.random.default_rng(10)
        values = [
            ari(rng.integers(0, 4, size=1000), rng.integers(0, 4, size=1000))
            for _ in range(100)
        ]
        assert abs(float(np.mean(values))) < 0.05


class TestF1Weighted:
    def test_identity(self):
        assert f1_weighted([0, 1, 2], [0, 1, 2]) == 1.0

    def test_relabeled_identity(self):
        assert f1_weighted([2, 0, 1], [0, 1, 2]) == 1.0

    def test_hand_computed_example(self):
        # truth (0,0,0,1), matched pred (0,0,1,1):
        # class0 F1 = 0.8, class1 F1 = 2/3, weighted = 0.75*0.8 + 0.25*2/3
        truth = [0, 0, 0, 1]
        pred = [0, 0, 1, 1]
        assert f1_weighted(pred, truth) == pytest.approx(0.75 * 0.8 + 0.25 * (2 / 3), abs=1e-12)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(11)
        pred = rng.integers(0, 3, size=40)
        truth = rng.integers(0, 3, size=40)
        assert f1_weighted((pred + 1) % 3, truth) == pytest.approx(f1_weighted(pred, truth), abs=1e-12)

    def test_range(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            pred = rng.integers(0, 5, size=30)
            truth = rng.integers(0, 4, size=30)
            assert 0.0 <= f1_weighted(pred, truth) <= 1.0


class TestEvaluate:
    def test_perfect_prediction(self):
        report = evaluate([0, 1, 2, 0], [0, 1, 2, 0], seed=3, k=3)
        assert (report.acc, report.nmi, report.ari, report.f1_weighted) == (1.0, 1.0, 1.0, 1.0)
        assert report.seed == 3 and report.k == 3

    def test_ranges_on_random_inputs(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            pred = rng.integers(0, 4, size=50)
            truth = rng.integers(0, 4, size=50)
            report = evaluate(pred, truth, seed=0, k=4)
            assert 0.0 <= report.acc <= 1.0
            assert 0.0 <= report.nmi <= 1.0
            assert -1.0 <= report.ari <= 1.0
            assert 0.0 <= report.f1_weighted <= 1.0

    def test_deterministic(self):
        rng = np.random.default_rng(14)
        pred = rng.integers(0, 3, size=30)
        truth = rng.integers(0, 3, size=30)
        assert evaluate(pred, truth, 1, 3) == evaluate(pred, truth, 1, 3)


def test_metric_invariance_under_predicted_relabeling():
    rng = np.random.default_rng(15)
    for _ in range(100):
        k = int(rng.integers(2, 6))
        pred = rng.integers(0, k, size=60)
        truth = rng.integers(0, k, size=60)
        mapping = rng.permutation(k)
        relabeled = mapping[pred]
        assert accuracy(relabeled, truth) == pytest.approx(accuracy(pred, truth), abs=1e-12)
        assert nmi(relabeled, truth) == pytest.approx(nmi(pred, truth), abs=1e-12)
        assert ari(relabeled, truth) == pytest.approx(ari(pred, truth), abs=1e-12)
        assert f1_weighted(relabeled, truth) == pytest.approx(f1_weighted(pred, truth), abs=1e-12)
