"""Dense-math foundation: distances, reductions, moments, standardization."""

import math

import numpy as np
import pytest

from fldeval import (
    DataError,
    DimensionError,
    FeatureMatrix,
    Role,
    apply_standardizer,
    fit_standardizer,
    invert_standardizer,
    logsumexp,
    moments,
    pairwise_sq_dist,
)
from fldeval.tensor import STD_FLOOR, canonical_mean, row_logsumexp

from oracles import naive_sq_dist, two_pass_moments


def fm(rows, role=Role.TRAIN):
    return FeatureMatrix(np.asarray(rows, dtype=np.float64), role=role)


class TestFeatureMatrix:
    def test_rejects_non_2d(self):
        with pytest.raises(DataError):
            FeatureMatrix(np.zeros(3))

    def test_rejects_empty(self):
        with pytest.raises(DataError):
            FeatureMatrix(np.zeros((0, 2)))

    def test_rejects_non_finite(self):
        with pytest.raises(DataError):
            fm([[1.0, np.nan]])
        with pytest.raises(DataError):
            fm([[1.0, np.inf]])

    def test_rejects_id_length_mismatch(self):
        with pytest.raises(DataError):
            FeatureMatrix(np.zeros((2, 2)), ids=("a",))

    def test_data_is_read_only(self):
        x = fm([[1.0, 2.0]])
        with pytest.raises(ValueError):
            x.data[0, 0] = 5.0

    def test_take_and_with_role(self):
        x = FeatureMatrix(np.arange(6, dtype=float).reshape(3, 2),
                          ids=("a", "b", "c"))
        sub = x.take([2, 0]).with_role(Role.GENERATED)
        assert sub.role is Role.GENERATED
        assert sub.ids == ("c", "a")
        np.testing.assert_array_equal(sub.data, [[4.0, 5.0], [0.0, 1.0]])


class TestPairwiseSqDist:
    def test_identical_points(self):
        d = pairwise_sq_dist(fm([[1.0, 2.0]]), fm([[1.0, 2.0]]))
        assert d.values[0, 0] == 0.0

    def test_three_four_five(self):
        d = pairwise_sq_dist(fm([[0.0, 0.0]]), fm([[3.0, 4.0]]))
        assert d.values[0, 0] == pytest.approx(25.0, rel=1e-15)

    def test_matches_triple_loop_oracle(self):
        rng = np.random.default_rng(11)
        a = rng.normal(size=(5, 3))
        b = rng.normal(size=(4, 3))
        got = pairwise_sq_dist(fm(a), fm(b)).values
        np.testing.assert_allclose(got, naive_sq_dist(a, b), rtol=1e-12)

    def test_self_distance_diagonal_exactly_zero(self):
        rng = np.random.default_rng(12)
        a = fm(rng.normal(size=(30, 6)))
        d = pairwise_sq_dist(a, a).values
        assert (np.diag(d) == 0.0).all()
        np.testing.assert_allclose(d, d.T, atol=1e-9)

    def test_blocked_equals_unblocked(self):
        rng = np.random.default_rng(13)
        a = fm(rng.normal(size=(37, 5)))
        b = fm(rng.normal(size=(23, 5)))
        full = pairwise_sq_dist(a, b, block_rows=64).values
        for block in (1, 2, 7, 36, 37):
            np.testing.assert_allclose(
                pairwise_sq_dist(a, b, block_rows=block).values, full, rtol=1e-10)

    def test_blocked_is_bitwise_identical(self):
        rng = np.random.default_rng(14)
        a = fm(rng.normal(size=(37, 5)))
        b = fm(rng.normal(size=(23, 5)))
        full = pairwise_sq_dist(a, b, block_rows=1024).values
        tiny = pairwise_sq_dist(a, b, block_rows=3).values
        assert (full == tiny).all()

    def test_entries_stable_under_row_permutation(self):
        rng = np.random.default_rng(15)
        a = rng.normal(size=(20, 4))
        b = rng.normal(size=(9, 4))
        perm = rng.permutation(20)
        base = pairwise_sq_dist(fm(a), fm(b)).values
        moved = pairwise_sq_dist(fm(a[perm]), fm(b)).values
        assert (moved == base[perm]).all()

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            pairwise_sq_dist(fm([[1.0, 2.0]]), fm([[1.0, 2.0, 3.0]]))


class TestLogsumexp:
    def test_single_element(self):
        assert logsumexp([3.5]) == pytest.approx(3.5, abs=1e-15)

    def test_two_zeros(self):
        assert logsumexp([0.0, 0.0]) == pytest.approx(math.log(2.0), abs=1e-12)

    def test_no_overflow_at_large_values(self):
        assert logsumexp([1000.0, 1000.0]) == pytest.approx(1000.0 + math.log(2.0), abs=1e-9)

    def test_all_negative_infinity(self):
        assert logsumexp([-np.inf, -np.inf]) == -np.inf

    def test_empty_rejected(self):
        with pytest.raises(DataError):
            logsumexp([])

    def test_nan_rejected(self):
        with pytest.raises(DataError):
            logsumexp([0.0, np.nan])

    def test_shift_invariance(self):
        rng = np.random.default_rng(16)
        v = rng.normal(size=40)
        for shift in (-123.0, 0.5, 777.0):
            assert logsumexp(v + shift) == pytest.approx(logsumexp(v) + shift, abs=1e-12)


class TestRowReductions:
    def test_row_logsumexp_column_permutation_exact(self):
        rng = np.random.default_rng(17)
        x = rng.normal(size=(12, 9))
        perm = rng.permutation(9)
        assert (row_logsumexp(x) == row_logsumexp(x[:, perm])).all()

    def test_row_logsumexp_handles_minus_inf_rows(self):
        x = np.array([[-np.inf, -np.inf], [0.0, -np.inf]])
        out = row_logsumexp(x)
        assert out[0] == -np.inf
        assert out[1] == pytest.approx(0.0, abs=1e-15)

    def test_canonical_mean_permutation_exact(self):
        rng = np.random.default_rng(18)
        v = rng.normal(size=101)
        assert canonical_mean(v) == canonical_mean(v[rng.permutation(101)])
        assert canonical_mean(v) == pytest.approx(v.mean(), rel=1e-12)


class TestMoments:
    def test_two_point_hand_case(self):
        mean, cov = moments(fm([[0.0], [2.0]]))
        np.testing.assert_array_equal(mean, [1.0])
        np.testing.assert_array_equal(cov, [[1.0]])

    def test_repeated_row_zero_covariance(self):
        mean, cov = moments(fm([[1.0, -2.0]] * 5))
        np.testing.assert_array_equal(mean, [1.0, -2.0])
        np.testing.assert_allclose(cov, np.zeros((2, 2)), atol=1e-15)

    def test_matches_two_pass_oracle(self):
        rng = np.random.default_rng(19)
        x = rng.normal(size=(50, 4))
        mean, cov = moments(fm(x))
        o_mean, o_cov = two_pass_moments(x)
        np.testing.assert_allclose(mean, o_mean, rtol=1e-10)
        np.testing.assert_allclose(cov, o_cov, rtol=1e-10, atol=1e-12)

    def test_single_row_rejected(self):
        with pytest.raises(DataError):
            moments(fm([[1.0, 2.0]]))


class TestStandardizer:
    def test_centered_midpoint(self):
        params = fit_standardizer(fm([[0.0], [2.0]]))
        out = apply_standardizer(params, fm([[1.0]]))
        np.testing.assert_array_equal(out.data, [[0.0]])

    def test_constant_column_floored(self):
        params = fit_standardizer(fm([[3.0, 1.0], [3.0, 2.0]]))
        assert params.stdev[0] == STD_FLOOR
        out = apply_standardizer(params, fm([[3.0, 1.5]]))
        assert out.data[0, 0] == 0.0

    def test_fit_then_apply_normalizes(self):
        rng = np.random.default_rng(20)
        x = fm(rng.normal(loc=3.0, scale=2.5, size=(200, 3)))
        out = apply_standardizer(fit_standardizer(x), x)
        np.testing.assert_allclose(out.data.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(out.data.std(axis=0), 1.0, rtol=1e-10)

    def test_round_trip(self):
        rng = np.random.default_rng(21)
        x = fm(rng.normal(size=(40, 3)))
        params = fit_standardizer(x)
        back = invert_standardizer(params, apply_standardizer(params, x))
        np.testing.assert_allclose(back.data, x.data, rtol=1e-12, atol=1e-14)

    def test_column_permutation_of_rows_exact(self):
        rng = np.random.default_rng(22)
        x = rng.normal(size=(60, 4))
        perm = rng.permutation(60)
        pa = fit_standardizer(fm(x))
        pb = fit_standardizer(fm(x[perm]))
        assert (pa.mean == pb.mean).all()
        assert (pa.stdev == pb.stdev).all()
