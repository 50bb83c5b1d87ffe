import numpy as np
import pytest

from cpinfer.core import (
    ChangePointEstimate,
    MeanPair,
    as_series,
    center_columns,
    loss_1d,
    loss_pd,
    loss_profile_1d,
    loss_profile_pd,
    project_series,
    soft_threshold,
    stopped_means,
)


def naive_loss_1d(z, k, t1, t2):
    z = list(z)
    total = sum((v - t1) ** 2 for v in z[:k]) + sum((v - t2) ** 2 for v in z[k:])
    return total / len(z)


class TestAsSeries:
    def test_validates_shape_and_finiteness(self):
        with pytest.raises(ValueError):
            as_series([[1.0]])  # T < 2
        with pytest.raises(ValueError):
            as_series([[1.0, np.nan], [2.0, 3.0]])
        assert as_series([1.0, 2.0]).shape == (2, 1)


class TestCenterColumns:
    def test_mean_removal(self):
        np.testing.assert_allclose(center_columns([[1.0], [3.0]]), [[-1.0], [1.0]])

    def test_zero_mean_input_unchanged(self):
        Y = np.array([[1.0, -2.0], [-1.0, 2.0]])
        np.testing.assert_array_equal(center_columns(Y), Y)

    def test_hand_example(self):
        out = center_columns([[1, 0], [2, 2], [3, 4]])
        np.testing.assert_allclose(out, [[-1, -2], [0, 0], [1, 2]])

    def test_columns_sum_to_zero(self):
        rng = np.random.default_rng(0)
        Y = rng.normal(size=(37, 4)) * 10 + 5
        out = center_columns(Y)
        assert np.all(np.abs(out.sum(axis=0)) <= 1e-10 * Y.shape[0])

    def test_idempotent(self):
        rng = np.random.default_rng(1)
        Y = rng.normal(size=(20, 3))
        once = center_columns(Y)
        np.testing.assert_allclose(center_columns(once), once, atol=1e-14)

    def test_does_not_mutate_input(self):
        Y = np.ones((3, 2))
        center_columns(Y)
        np.testing.assert_array_equal(Y, np.ones((3, 2)))


class TestLoss1d:
    def test_exact_fit(self):
        assert loss_1d([0, 0, 1, 1], 2, 0.0, 1.0) == 0.0

    def test_hand_value(self):
        assert loss_1d([0, 0, 1, 1], 2, 0.0, 0.0) == pytest.approx(0.5)

    def test_k_equals_T_empties_second_sum(self):
        assert loss_1d([5.0, 5.0], 2, 5.0, 123.456) == 0.0

    def test_k_out_of_range(self):
        with pytest.raises(ValueError):
            loss_1d([1.0, 2.0], 0, 0.0, 0.0)
        with pytest.raises(ValueError):
            loss_1d([1.0, 2.0], 3, 0.0, 0.0)

    def test_matches_naive_evaluation(self):
        rng = np.random.default_rng(2)
        z = rng.normal(size=11)
        for k in range(1, 12):
            assert loss_1d(z, k, 0.3, -0.7) == pytest.approx(naive_loss_1d(z, k, 0.3, -0.7), rel=1e-12)

    def test_telescoping_decomposition(self):
        # the loss difference between two splits only involves the rows in between
        rng = np.random.default_rng(3)
        z = rng.normal(size=30)
        t1, t2 = 0.4, -0.2
        k0 = 12
        base = loss_1d(z, k0, t1, t2)
        for k in range(1, 31):
            lo, hi = min(k, k0), max(k, k0)
            sgn = 1.0 if k > k0 else -1.0
            tele = sgn * sum((z[t] - t1) ** 2 - (z[t] - t2) ** 2 for t in range(lo, hi)) / z.size
            assert loss_1d(z, k, t1, t2) - base == pytest.approx(tele, abs=1e-12)


class TestLossPd:
    def test_exact_fit_at_boundary(self):
        mu = np.array([2.0, -1.0])
        Y = np.tile(mu, (5, 1))
        assert loss_pd(Y, 5, mu, np.zeros(2)) == 0.0

    def test_hand_value(self):
        assert loss_pd([[0, 0], [1, 1]], 1, [0, 0], [0, 0]) == pytest.approx(1.0)

    def test_p1_matches_loss_1d(self):
        rng = np.random.default_rng(4)
        z = rng.normal(size=9)
        for k in range(1, 10):
            assert loss_pd(z[:, None], k, [0.2], [-0.1]) == pytest.approx(
                loss_1d(z, k, 0.2, -0.1), rel=1e-12
            )

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            loss_pd([[0, 0], [1, 1]], 1, [0.0], [0.0, 0.0])

    def test_profile_agrees_pointwise(self):
        rng = np.random.default_rng(5)
        Y = rng.normal(size=(14, 3))
        mu1, mu2 = rng.normal(size=3), rng.normal(size=3)
        prof = loss_profile_pd(Y, mu1, mu2)
        for k in range(1, 15):
            assert prof[k - 1] == pytest.approx(loss_pd(Y, k, mu1, mu2), rel=1e-12)

    def test_profile_1d_agrees_pointwise(self):
        rng = np.random.default_rng(6)
        z = rng.normal(size=17)
        prof = loss_profile_1d(z, 0.5, -0.5)
        for k in range(1, 18):
            assert prof[k - 1] == pytest.approx(loss_1d(z, k, 0.5, -0.5), rel=1e-12)


class TestStoppedMeans:
    def test_piecewise_constant(self):
        left, right = stopped_means([[0.0], [0.0], [2.0], [2.0]], 2)
        np.testing.assert_allclose(left, [0.0])
        np.testing.assert_allclose(right, [2.0])

    def test_hand_means(self):
        left, right = stopped_means([[1.0], [3.0], [5.0]], 1)
        np.testing.assert_allclose(left, [1.0])
        np.testing.assert_allclose(right, [4.0])

    def test_empty_segment_errors(self):
        Y = np.zeros((4, 2))
        with pytest.raises(ValueError):
            stopped_means(Y, 4)
        with pytest.raises(ValueError):
            stopped_means(Y, 0)


class TestSoftThreshold:
    def test_direct_formula(self):
        np.testing.assert_allclose(soft_threshold([2.5, -0.5, 0.0], 1.0), [1.5, 0.0, 0.0])

    def test_identity_at_zero(self):
        x = np.array([0.3, -4.0, 2.0])
        np.testing.assert_array_equal(soft_threshold(x, 0.0), x)

    def test_negative_threshold_rejected(self):
        with pytest.raises(ValueError):
            soft_threshold([1.0], -0.1)

    def test_support_shrinks(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=40)
        out = soft_threshold(x, 0.8)
        assert set(np.flatnonzero(out)) <= set(np.flatnonzero(x))

    def test_matches_prox_oracle(self):
        # per coordinate: argmin over m of (x - m)^2 + 2*lam*|m|, brute forced
        grid = np.linspace(-10.0, 10.0, 200001)
        rng = np.random.default_rng(8)
        for lam in (0.0, 0.3, 1.7):
            x = rng.uniform(-8, 8, size=12)
            expected = np.array([grid[np.argmin((xj - grid) ** 2 + 2 * lam * np.abs(grid))] for xj in x])
            np.testing.assert_allclose(soft_threshold(x, lam), expected, atol=2e-4)

    def test_lipschitz_and_monotone_in_lambda(self):
        rng = np.random.default_rng(9)
        x, y = rng.normal(size=30), rng.normal(size=30)
        assert np.all(np.abs(soft_threshold(x, 0.5) - soft_threshold(y, 0.5)) <= np.abs(x - y) + 1e-15)
        lams = [0.0, 0.2, 0.5, 1.0, 3.0]
        mags = [np.abs(soft_threshold(x, l)) for l in lams]
        for a, b in zip(mags, mags[1:]):
            assert np.all(b <= a + 1e-15)


class TestProjectSeries:
    def test_unit_vector_selects_column(self):
        rng = np.random.default_rng(10)
        Y = rng.normal(size=(6, 4))
        e2 = np.zeros(4)
        e2[2] = 1.0
        np.testing.assert_allclose(project_series(Y, e2), Y[:, 2])

    def test_zero_vector(self):
        np.testing.assert_array_equal(project_series(np.ones((3, 2)), [0.0, 0.0]), np.zeros(3))

    def test_hand_inner_products(self):
        np.testing.assert_allclose(project_series([[1, 2], [3, 4]], [1, -1]), [-1.0, -1.0])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            project_series(np.ones((3, 2)), [1.0, 2.0, 3.0])


class TestChangePointEstimate:
    def test_tau_is_derived_view(self):
        est = ChangePointEstimate(3, 10)
        assert est.tau == 0.3
        assert not est.no_change

    def test_no_change_encoding(self):
        assert ChangePointEstimate(7, 7).no_change

    def test_bounds(self):
        with pytest.raises(ValueError):
            ChangePointEstimate(0, 5)
        with pytest.raises(ValueError):
            ChangePointEstimate(6, 5)


class TestMeanPair:
    def test_supports_are_exact_nonzero_patterns(self):
        mp = MeanPair([1.0, 0.0, -2.0], [0.0, 0.0, 3.0])
        assert list(mp.support1) == [0, 2]
        assert list(mp.support2) == [2]

    def test_jump_recomputable(self):
        mp = MeanPair([1.0, 0.0], [0.0, 1.0])
        np.testing.assert_allclose(mp.jump(), [1.0, -1.0])
        assert mp.jump_size() == pytest.approx(np.sqrt(2.0))

    def test_level_difference_identity(self):
        # theta1 - theta2 == ||mu1 - mu2||^2 for any pair
        rng = np.random.default_rng(11)
        for _ in range(200):
            p = rng.integers(1, 12)
            mp = MeanPair(rng.normal(size=p), rng.normal(size=p))
            t1, t2 = mp.projected_levels()
            assert t1 - t2 == pytest.approx(mp.jump_size() ** 2, rel=1e-10)
