"""Cost matrix construction, row reordering, gap selection, kernel
interpolation, padding + realignment, and fusion."""

import numpy as np
import pytest

from anchorpad.align import (
    Assignment,
    KernelConfig,
    build_cost_matrix,
    default_sigma,
    fuse,
    gaussian_kernel,
    hungarian,
    interpolate_point,
    pad_and_realign,
    reorder_rows,
    select_gap_indices,
)
from anchorpad.data import generate_synthetic


class TestBuildCostMatrix:
    def test_orthonormal_identity_rows(self):
        eye = np.eye(2)
        cost = build_cost_matrix(eye, eye.copy())
        np.testing.assert_allclose(cost.z, [[0.0, 1.0], [1.0, 0.0]])
        assert cost.rows_view == 0

    def test_self_similarity_minimal_on_diagonal(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(6, 4))
        cost = build_cost_matrix(x, x.copy())
        for i in range(6):
            assert cost.z[i, i] == cost.z[i].min()

    def test_smaller_view_takes_rows(self):
        rng = np.random.default_rng(1)
        a = rng.normal(size=(3, 4))
        b = rng.normal(size=(5, 4))
        cost = build_cost_matrix(a, b)
        assert cost.z.shape == (3, 5) and cost.rows_view == 0
        cost2 = build_cost_matrix(b, a)
        assert cost2.z.shape == (3, 5) and cost2.rows_view == 1

    def test_entries_in_unit_interval_rows_normalized(self):
        rng = np.random.default_rng(2)
        cost = build_cost_matrix(rng.normal(size=(7, 5)), rng.normal(size=(9, 5)))
        assert np.all(cost.z >= 0) and np.all(cost.z <= 1)
        np.testing.assert_allclose((1.0 - cost.z).sum(axis=1), 1.0, atol=1e-9)

    def test_zero_row_rejected(self):
        with pytest.raises(ValueError, match="zero-vector"):
            build_cost_matrix(np.zeros((2, 3)), np.ones((2, 3)))


class TestReorderRows:
    def test_sorts_by_assigned_distance(self):
        z = np.array([[0.5, 0.9, 0.9], [0.9, 0.1, 0.9], [0.9, 0.9, 0.3]])
        cost = build_cost_matrix(np.eye(3), np.eye(3))
        cost = type(cost)(z=z, rows_view=0)
        assignment = Assignment(pairs=((0, 0), (1, 1), (2, 2)), total_cost=0.9)
        z_sorted, order = reorder_rows(cost, assignment)
        np.testing.assert_array_equal(order, [1, 2, 0])
        np.testing.assert_array_equal(z_sorted, z[[1, 2, 0]])

    def test_already_sorted_gives_identity(self):
        z = np.array([[0.1, 0.9], [0.9, 0.4]])
        cost_obj = build_cost_matrix(np.eye(2), np.eye(2))
        cost_obj = type(cost_obj)(z=z, rows_view=0)
        assignment = Assignment(pairs=((0, 0), (1, 1)), total_cost=0.5)
        _, order = reorder_rows(cost_obj, assignment)
        np.testing.assert_array_equal(order, [0, 1])

    def test_permutation_invertible(self):
        rng = np.random.default_rng(3)
        lat = rng.normal(size=(5, 4))
        cost = build_cost_matrix(lat, rng.normal(size=(7, 4)))
        assignment = hungarian(cost.z)
        z_sorted, order = reorder_rows(cost, assignment)
        inverse = np.argsort(order)
        np.testing.assert_array_equal(z_sorted[inverse], cost.z)

    def test_stable_on_ties(self):
        z = np.array([[0.5, 0.9], [0.5, 0.9]])
        cost_obj = type(build_cost_matrix(np.eye(2), np.eye(2)))(z=z, rows_view=0)
        assignment = Assignment(pairs=((0, 0), (1, 0)), total_cost=1.0)
        _, order = reorder_rows(cost_obj, assignment)
        np.testing.assert_array_equal(order, [0, 1])

    def test_incomplete_assignment_rejected(self):
        cost = build_cost_matrix(np.eye(3), np.eye(3))
        assignment = Assignment(pairs=((0, 0),), total_cost=0.0)
        with pytest.raises(ValueError):
            reorder_rows(cost, assignment)


class TestSelectGapIndices:
    def test_largest_jump(self):
        assert select_gap_indices(np.array([0.1, 0.15, 0.8]), 1) == [(1, 2)]

    def test_uniform_spacing_tie_break(self):
        assert select_gap_indices(np.array([0.1, 0.2, 0.3]), 1) == [(0, 1)]

    def test_empty_for_balanced_views(self):
        assert select_gap_indices(np.array([0.1, 0.2]), 0) == []

    def test_round_robin_reuse(self):
        slots = select_gap_indices(np.array([0.0, 0.5, 0.6]), 5)
        assert slots == [(0, 1), (1, 2), (0, 1), (1, 2), (0, 1)]

    def test_single_row_with_positive_k_rejected(self):
        with pytest.raises(ValueError):
            select_gap_indices(np.array([0.3]), 1)


class TestGaussianKernel:
    def test_zero_distance(self):
        assert gaussian_kernel([1.0, 2.0], [1.0, 2.0], 0.7) == 1.0

    def test_distance_equal_sigma(self):
        assert gaussian_kernel([0.0], [2.0], 2.0) == pytest.approx(np.exp(-0.5), abs=1e-12)

    def test_monotone_decreasing(self):
        vals = [gaussian_kernel([0.0], [d], 1.0) for d in (0.0, 0.5, 1.0, 2.0, 4.0)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_bad_sigma(self):
        with pytest.raises(ValueError):
            gaussian_kernel([0.0], [1.0], 0.0)


class TestInterpolatePoint:
    def test_midpoint_of_two_rows(self):
        u = np.array([0.0, 2.0, 4.0])
        v = np.array([2.0, 0.0, 8.0])
        row, weights = interpolate_point(np.vstack([u, v]), sigma=0.9)
        np.testing.assert_allclose(row, (u + v) / 2, atol=1e-12)
        np.testing.assert_allclose(weights, [0.5, 0.5], atol=1e-12)

    def test_single_row_degenerate(self):
        u = np.array([3.0, 1.0])
        row, weights = interpolate_point(u[None, :], sigma=1.0)
        np.testing.assert_allclose(row, u)
        np.testing.assert_allclose(weights, [1.0])

    def test_weights_sum_to_one_any_sigma(self):
        rng = np.random.default_rng(4)
        for sigma in (1e-3, 0.5, 3.0, 1e3):
            rows = rng.normal(size=(2, 6))
            _, weights = interpolate_point(rows, sigma)
            assert abs(weights.sum() - 1.0) < 1e-12

    def test_convex_hull(self):
        rng = np.random.default_rng(5)
        rows = rng.normal(size=(2, 3))
        row, _ = interpolate_point(rows, 1.0)
        lo = rows.min(axis=0) - 1e-12
        hi = rows.max(axis=0) + 1e-12
        assert np.all(row >= lo) and np.all(row <= hi)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            interpolate_point(np.empty((0, 3)), 1.0)


def make_views(seed, n=120, dim=10, n_del=1):
    """Identical latents, one view shuffled, the other with rows deleted."""
    ds = generate_synthetic(3, n, (dim,), 6.0, seed=seed)
    lat = ds.views[0]
    rng = np.random.default_rng(seed + 1000)
    perm = rng.permutation(n)
    keep = np.sort(rng.choice(n, size=n - n_del, replace=False))
    return lat[keep], lat[perm], keep, perm


class TestPadAndRealign:
    def run(self, short_lat, long_lat, seed=0, sigma=None):
        cost = build_cost_matrix(short_lat, long_lat)
        assignment = hungarian(cost.z)
        z_sorted, order = reorder_rows(cost, assignment)
        return pad_and_realign(
            short_lat, long_lat, z_sorted, order, assignment, KernelConfig(sigma=sigma, seed=seed)
        )

    def test_balanced_views_no_synthesis(self):
        rng = np.random.default_rng(6)
        lat = rng.normal(size=(8, 5))
        other = lat + 0.01 * rng.normal(size=(8, 5))
        padded = self.run(lat, other)
        assert padded.synth_flags.sum() == 0
        cost = build_cost_matrix(lat, other)
        assignment = hungarian(cost.z)
        z_sorted, order = reorder_rows(cost, assignment)
        direct = hungarian(z_sorted.T)
        assert padded.final_pairs == direct.pairs

    def test_single_deletion_single_synth(self):
        short_lat, long_lat, _, _ = make_views(seed=1, n_del=1)
        padded = self.run(short_lat, long_lat, seed=1)
        assert padded.synth_flags.sum() == 1
        assert padded.padded_short.shape[0] == long_lat.shape[0]
        assert padded.zbar.shape == (120, 120)

    def test_perfect_matching_on_long_view(self):
        short_lat, long_lat, _, _ = make_views(seed=2, n_del=4)
        padded = self.run(short_lat, long_lat, seed=2)
        rows = sorted(i for i, _ in padded.final_pairs)
        cols = sorted(j for _, j in padded.final_pairs)
        assert rows == list(range(120)) and cols == list(range(120))

    def test_recovery_of_known_correspondence(self):
        rates = []
        for seed in range(10):
            short_lat, long_lat, keep, perm = make_views(seed=seed, n_del=1)
            padded = self.run(short_lat, long_lat, seed=seed)
            hits = sum(
                1
                for long_row, padded_row in padded.final_pairs
                if padded.source_rows[padded_row] >= 0
                and keep[padded.source_rows[padded_row]] == perm[long_row]
            )
            rates.append(hits / len(keep))
        assert min(rates) >= 0.9

    def test_synth_cost_rows_are_distances(self):
        short_lat, long_lat, _, _ = make_views(seed=3, n_del=3)
        padded = self.run(short_lat, long_lat, seed=3)
        synth_rows = padded.zbar[padded.synth_flags]
        assert np.all(synth_rows >= 0) and np.all(synth_rows <= 1)
        np.testing.assert_allclose((1.0 - synth_rows).sum(axis=1), 1.0, atol=1e-9)

    def test_sigma_override_respected(self):
        short_lat, long_lat, _, _ = make_views(seed=4, n_del=2)
        padded = self.run(short_lat, long_lat, seed=4, sigma=2.5)
        assert padded.sigma == 2.5

    def test_short_larger_than_long_rejected(self):
        rng = np.random.default_rng(7)
        a = rng.normal(size=(5, 3))
        b = rng.normal(size=(3, 3))
        cost = build_cost_matrix(a, b)
        assignment = hungarian(cost.z)
        z_sorted, order = reorder_rows(cost, assignment)
        with pytest.raises(ValueError):
            pad_and_realign(a, b, z_sorted, order, assignment, KernelConfig())


class TestFuse:
    def test_width_is_sum_of_latent_widths(self):
        short_lat, long_lat, _, _ = make_views(seed=5, n_del=2, dim=7)
        cost = build_cost_matrix(short_lat, long_lat)
        assignment = hungarian(cost.z)
        z_sorted, order = reorder_rows(cost, assignment)
        padded = pad_and_realign(short_lat, long_lat, z_sorted, order, assignment, KernelConfig(seed=5))
        labels = np.zeros(long_lat.shape[0], dtype=int)
        fused, out_labels = fuse(padded, long_lat, labels)
        assert fused.shape == (long_lat.shape[0], 14)
        assert out_labels.shape[0] == long_lat.shape[0]

    def test_identity_matching_concatenates_rows(self):
        rng = np.random.default_rng(8)
        lat = np.abs(rng.normal(size=(6, 4))) + 0.5
        cost = build_cost_matrix(lat, lat.copy())
        assignment = hungarian(cost.z)
        z_sorted, order = reorder_rows(cost, assignment)
        padded = pad_and_realign(lat, lat.copy(), z_sorted, order, assignment, KernelConfig(seed=8))
        labels = np.arange(6)
        fused, out_labels = fuse(padded, lat, labels)
        np.testing.assert_array_equal(out_labels, labels)
        for row_idx in range(6):
            np.testing.assert_allclose(fused[row_idx], np.concatenate([lat[row_idx], lat[row_idx]]))

    def test_matching_size_mismatch(self):
        short_lat, long_lat, _, _ = make_views(seed=9, n_del=1)
        cost = build_cost_matrix(short_lat, long_lat)
        assignment = hungarian(cost.z)
        z_sorted, order = reorder_rows(cost, assignment)
        padded = pad_and_realign(short_lat, long_lat, z_sorted, order, assignment, KernelConfig(seed=9))
        with pytest.raises(ValueError):
            fuse(padded, long_lat[:50], np.zeros(50, dtype=int))


def test_default_sigma_positive_and_seeded():
    rng = np.random.default_rng(10)
    lat = rng.normal(size=(40, 5))
    s1 = default_sigma(lat, seed=3)
    s2 = default_sigma(lat, seed=3)
    assert s1 == s2 > 0
    big = rng.normal(size=(200, 5))
    assert default_sigma(big, seed=1) > 0
