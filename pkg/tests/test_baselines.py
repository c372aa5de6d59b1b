"""Reference metrics: FID, manifold precision/recall, rank test, authenticity."""

import warnings

import numpy as np
import pytest

from fldeval import (
    ConfigError,
    DataError,
    FeatureMatrix,
    GaussianStats,
    NumericalError,
    Role,
    auth_pct,
    compute_baselines,
    ct_score,
    fid,
    fid_from_stats,
    precision_recall,
)

from oracles import (
    brute_auth_pct,
    brute_precision_recall,
    diagonal_fid,
    midrank_mann_whitney_z,
)


def fm(rows, role=Role.TRAIN):
    return FeatureMatrix(np.asarray(rows, dtype=np.float64), role=role)


def naive_nearest_sq(queries, reference):
    out = np.empty(len(queries))
    for i, q in enumerate(queries):
        out[i] = min(float(((q - r) ** 2).sum()) for r in reference)
    return out


class TestFid:
    def test_identical_sets_score_zero(self):
        a = np.random.default_rng(77).normal(size=(300, 6))
        assert abs(fid(fm(a), fm(a))) <= 1e-6

    def test_unit_gaussians_one_apart(self):
        # sample mean 0 vs 1, population variance 1 on both sides
        a = fm(np.array([[-1.0], [1.0]]))
        b = fm(np.array([[0.0], [2.0]]))
        assert fid(a, b) == pytest.approx(1.0, abs=1e-6)

    def test_diagonal_closed_form(self):
        m1 = np.array([0.0, 1.0, -2.0])
        v1 = np.array([1.0, 2.0, 0.5])
        m2 = np.array([1.0, 1.0, 0.0])
        v2 = np.array([2.0, 1.0, 1.5])
        got = fid_from_stats(GaussianStats(m1, np.diag(v1)),
                             GaussianStats(m2, np.diag(v2)))
        assert got == pytest.approx(diagonal_fid(m1, v1, m2, v2), rel=1e-8)

    def test_symmetry(self):
        rng = np.random.default_rng(77)
        a = fm(rng.normal(size=(300, 6)))
        b = fm(rng.normal(size=(300, 6)) + 0.5)
        assert fid(a, b) == pytest.approx(fid(b, a), rel=1e-8)

    def test_rotation_invariance(self):
        rng = np.random.default_rng(77)
        a = rng.normal(size=(300, 6))
        b = rng.normal(size=(300, 6)) + 0.5
        q, _ = np.linalg.qr(rng.normal(size=(6, 6)))
        assert fid(fm(a @ q), fm(b @ q)) == pytest.approx(fid(fm(a), fm(b)), rel=1e-6)

    def test_result_is_nonnegative(self):
        rng = np.random.default_rng(8)
        a = fm(rng.normal(size=(40, 3)))
        b = fm(rng.normal(size=(40, 3)) * 1.01)
        assert fid(a, b) >= 0.0

    def test_asymmetric_covariance_rejected(self):
        cov = np.array([[1.0, 0.5], [0.2, 1.0]])
        with pytest.raises(NumericalError):
            GaussianStats(np.zeros(2), cov)

    def test_stats_shape_mismatch_rejected(self):
        with pytest.raises(DataError):
            GaussianStats(np.zeros(3), np.eye(2))


class TestPrecisionRecall:
    def test_same_set_is_perfect(self):
        g = np.random.default_rng(55).normal(size=(20, 3))
        assert precision_recall(fm(g, Role.GENERATED), fm(g, Role.TEST), 3) == (1.0, 1.0)

    def test_far_shift_is_zero(self):
        rng = np.random.default_rng(55)
        g = rng.normal(size=(20, 3))
        r = rng.normal(size=(20, 3))
        assert precision_recall(fm(g + 100.0, Role.GENERATED), fm(r, Role.TEST), 3) == (0.0, 0.0)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(55)
        g = rng.normal(size=(20, 3))
        r = rng.normal(size=(20, 3))
        got = precision_recall(fm(g, Role.GENERATED), fm(r, Role.TEST), 3)
        assert got == brute_precision_recall(g, r, 3)
        assert got == (0.95, 0.9)

    def test_swapping_sets_swaps_scores(self):
        rng = np.random.default_rng(56)
        g = fm(rng.normal(size=(25, 2)), Role.GENERATED)
        r = fm(rng.normal(size=(30, 2)), Role.TEST)
        p, rec = precision_recall(g, r, 4)
        p2, rec2 = precision_recall(r.with_role(Role.GENERATED), g.with_role(Role.TEST), 4)
        assert (p, rec) == (rec2, p2)

    @pytest.mark.parametrize("k", [0, 20, -1])
    def test_k_out_of_range(self, k):
        g = np.random.default_rng(55).normal(size=(20, 3))
        with pytest.raises(ConfigError):
            precision_recall(fm(g, Role.GENERATED), fm(g, Role.TEST), k)


class TestCtScore:
    def test_full_copy_is_strongly_negative(self):
        rng = np.random.default_rng(60)
        train = rng.normal(size=(100, 2))
        test = rng.normal(size=(100, 2))
        z = ct_score(fm(train), fm(test, Role.TEST), fm(train.copy(), Role.GENERATED))
        assert z < -10.0

    def test_iid_null_stays_small(self):
        hits = 0
        for r in range(100):
            rng = np.random.default_rng(1000 + r)
            train = fm(rng.normal(size=(200, 4)))
            test = fm(rng.normal(size=(100, 4)), Role.TEST)
            gen = fm(rng.normal(size=(100, 4)), Role.GENERATED)
            if abs(ct_score(train, test, gen)) <= 3.0:
                hits += 1
        assert hits >= 95

    def test_swapping_gen_and_test_flips_sign_exactly(self):
        rng = np.random.default_rng(60)
        train = fm(rng.normal(size=(100, 2)))
        a = rng.normal(size=(100, 2))
        b = rng.normal(size=(80, 2))
        za = ct_score(train, fm(a, Role.TEST), fm(b, Role.GENERATED))
        zb = ct_score(train, fm(b, Role.TEST), fm(a, Role.GENERATED))
        assert za == -zb

    def test_degenerate_ties_warn_and_return_zero(self):
        same = np.ones((5, 2))
        with pytest.warns(RuntimeWarning):
            z = ct_score(fm(same), fm(same, Role.TEST), fm(same, Role.GENERATED))
        assert z == 0.0

    def test_matches_midrank_oracle(self):
        rng = np.random.default_rng(61)
        train = rng.normal(size=(60, 2))
        gen = rng.normal(size=(40, 2))
        gen[10] = gen[3]  # duplicates force midrank ties
        test = rng.normal(size=(35, 2))
        test[5] = gen[3]
        z = ct_score(fm(train), fm(test, Role.TEST), fm(gen, Role.GENERATED))
        want = midrank_mann_whitney_z(naive_nearest_sq(gen, train),
                                      naive_nearest_sq(test, train))
        assert z == pytest.approx(want, rel=1e-12)


class TestAuthPct:
    def test_exact_copies_are_inauthentic(self):
        train = np.random.default_rng(60).normal(size=(100, 2))
        assert auth_pct(fm(train), fm(train.copy(), Role.GENERATED)) == 0.0

    def test_far_samples_are_authentic(self):
        train = np.random.default_rng(60).normal(size=(100, 2))
        assert auth_pct(fm(train), fm(train + 1000.0, Role.GENERATED)) == 100.0

    def test_matches_brute_force(self):
        rng = np.random.default_rng(62)
        train = rng.normal(size=(100, 2))
        gen = rng.normal(size=(50, 2))
        got = auth_pct(fm(train), fm(gen, Role.GENERATED))
        assert got == brute_auth_pct(train, gen)

    def test_single_train_row_rejected(self):
        with pytest.raises(DataError):
            auth_pct(fm(np.zeros((1, 2))), fm(np.ones((3, 2)), Role.GENERATED))


class TestComputeBaselines:
    def test_report_is_internally_consistent(self):
        rng = np.random.default_rng(63)
        train = fm(rng.normal(size=(120, 3)))
        test = fm(rng.normal(size=(60, 3)), Role.TEST)
        gen = fm(rng.normal(size=(80, 3)), Role.GENERATED)
        report = compute_baselines(train, test, gen)
        assert report.fid_gap == report.fid_train - report.fid_test
        assert report.fid_train == fid(gen, train)
        assert report.fid_test == fid(gen, test)
        assert report.knn_k == 3
        assert 0.0 <= report.precision <= 1.0
        assert 0.0 <= report.recall <= 1.0
        assert 0.0 <= report.auth_pct <= 100.0

    def test_custom_k_is_recorded(self):
        rng = np.random.default_rng(63)
        train = fm(rng.normal(size=(40, 2)))
        test = fm(rng.normal(size=(30, 2)), Role.TEST)
        gen = fm(rng.normal(size=(30, 2)), Role.GENERATED)
        assert compute_baselines(train, test, gen, k=5).knn_k == 5
