"""Reference metrics computed alongside FLD: FID, precision and recall,
a rank-test overfitting statistic, and an authenticity percentage.

These are the conventional yardsticks; none of them sees memorization
and generalization at the same time, which is why the package reports
them next to FLD rather than instead of it.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats as sp_stats

from .errors import ConfigError, DataError, NumericalError
from .tensor import FeatureMatrix, moments, pairwise_sq_dist

# Eigenvalues of nominally PSD matrices may dip slightly negative from
# rounding; anything below -EIG_TOL (relative to the spectrum scale) is
# treated as a real numerical failure instead of being clamped.
EIG_TOL = 1e-7

DEFAULT_KNN_K = 3


@dataclass(frozen=True)
class GaussianStats:
    """Mean and population covariance of one feature set."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        cov = np.asarray(self.cov, dtype=np.float64)
        if mean.ndim != 1 or cov.shape != (mean.size, mean.size):
            raise DataError(f"stats shapes disagree: mean {mean.shape}, cov {cov.shape}")
        if not (np.isfinite(mean).all() and np.isfinite(cov).all()):
            raise DataError("moment statistics contain non-finite entries")
        asym = np.abs(cov - cov.T).max() if cov.size else 0.0
        if asym > 1e-9:
            raise NumericalError(f"covariance asymmetry {asym:.3e} exceeds 1e-9")
        cov = (cov + cov.T) / 2.0
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @classmethod
    def from_features(cls, x: FeatureMatrix) -> "GaussianStats":
        mean, cov = moments(x)
        return cls(mean=mean, cov=cov)


@dataclass(frozen=True)
class BaselineReport:
    """All baseline metrics for one (train, test, gen) triple."""

    fid_train: float
    fid_test: float
    fid_gap: float
    precision: float
    recall: float
    c_t: float
    auth_pct: float
    knn_k: int = DEFAULT_KNN_K


def _clamped_eigvals(sym: np.ndarray, what: str) -> np.ndarray:
    vals = np.linalg.eigvalsh(sym)
    tol = EIG_TOL * max(1.0, float(np.abs(vals).max()) if vals.size else 0.0)
    if vals.min() < -tol:
        raise NumericalError(f"{what} is not PSD: eigenvalue {vals.min():.3e} below -{tol:.3e}")
    return np.maximum(vals, 0.0)


def _psd_sqrt(sym: np.ndarray, what: str) -> np.ndarray:
    vals, vecs = np.linalg.eigh(sym)
    tol = EIG_TOL * max(1.0, float(np.abs(vals).max()) if vals.size else 0.0)
    if vals.min() < -tol:
        raise NumericalError(f"{what} is not PSD: eigenvalue {vals.min():.3e} below -{tol:.3e}")
    root = np.sqrt(np.maximum(vals, 0.0))
    return (vecs * root) @ vecs.T


def fid_from_stats(a: GaussianStats, b: GaussianStats) -> float:
    """Frechet distance between two Gaussians given by their moments.

    The trace of the covariance cross term is computed through the
    symmetric eigendecomposition of  B^(1/2) A B^(1/2), never through a
    non-symmetric matrix square root.
    """
    if a.mean.shape != b.mean.shape:
        raise DataError(f"stats dimensions disagree: {a.mean.shape} vs {b.mean.shape}")
    diff = a.mean - b.mean
    mean_term = float(diff @ diff)
    root_b = _psd_sqrt(b.cov, "covariance")
    inner = root_b @ a.cov @ root_b
    inner = (inner + inner.T) / 2.0
    cross = float(np.sqrt(_clamped_eigvals(inner, "covariance product")).sum())
    value = mean_term + float(np.trace(a.cov)) + float(np.trace(b.cov)) - 2.0 * cross
    return max(value, 0.0)


def fid(a: FeatureMatrix, b: FeatureMatrix) -> float:
    """Frechet distance between the Gaussian fits of two feature sets."""
    return fid_from_stats(GaussianStats.from_features(a), GaussianStats.from_features(b))


def _knn_sq_radii(x: FeatureMatrix, k: int) -> np.ndarray:
    """Squared distance from each row to its k-th nearest other row."""
    dist = pairwise_sq_dist(x, x).values
    # Column k of the partial sort is the k-th neighbor once the
    # self-distance at zero is accounted for.
    return np.partition(dist, k, axis=1)[:, k]


def precision_recall(gen: FeatureMatrix, real: FeatureMatrix,
                     k: int = DEFAULT_KNN_K) -> tuple[float, float]:
    """Manifold precision and recall with k-NN radius membership.

    A point belongs to a set's manifold when it falls inside the k-th
    neighbor ball of at least one member. Precision is the generated
    fraction inside the real manifold; recall swaps the roles.
    """
    if not (1 <= k < min(gen.n, real.n)):
        raise ConfigError(f"k must satisfy 1 <= k < min(n, m) = {min(gen.n, real.n)}, got {k}")
    real_radii = _knn_sq_radii(real, k)
    gen_radii = _knn_sq_radii(gen, k)
    cross = pairwise_sq_dist(gen, real).values
    precision = float((cross <= real_radii[None, :]).any(axis=1).mean())
    recall = float((cross.T <= gen_radii[None, :]).any(axis=1).mean())
    return precision, recall


def _nearest_sq_dists(queries: FeatureMatrix, reference: FeatureMatrix) -> np.ndarray:
    return pairwise_sq_dist(queries, reference).values.min(axis=1)


def ct_score(train: FeatureMatrix, test: FeatureMatrix, gen: FeatureMatrix) -> float:
    """Rank-test z-statistic comparing nearest-train distances.

    Ranks the generated set's nearest-train-neighbor distances against
    the test set's within the combined sample (midranks for ties) and
    returns the normal approximation z of the Mann-Whitney statistic.
    Negative means generated samples hug the train set more closely than
    held out data does, i.e. overfitting; positive means underfitting.
    """
    d_gen = _nearest_sq_dists(gen, train)
    d_test = _nearest_sq_dists(test, train)
    m, n = d_gen.size, d_test.size
    ranks = sp_stats.rankdata(np.concatenate([d_gen, d_test]))
    u_gen = ranks[:m].sum() - m * (m + 1) / 2.0
    tie_factor = sp_stats.tiecorrect(ranks)
    if tie_factor == 0.0:
        warnings.warn("all nearest-neighbor distances are tied; returning 0", RuntimeWarning)
        return 0.0
    sd = np.sqrt(tie_factor * m * n * (m + n + 1) / 12.0)
    return float((u_gen - m * n / 2.0) / sd)


def auth_pct(train: FeatureMatrix, gen: FeatureMatrix) -> float:
    """Percentage of generated samples deemed authentic.

    A generated sample is inauthentic when it sits closer to its nearest
    train row than that train row sits to its own nearest other train
    row, i.e. the sample looks like a slightly noised copy.
    """
    if train.n < 2:
        raise DataError(f"authenticity needs at least 2 train rows, got {train.n}")
    cross = pairwise_sq_dist(gen, train).values
    nearest_idx = cross.argmin(axis=1)
    nearest_dist = cross[np.arange(gen.n), nearest_idx]
    within = np.array(pairwise_sq_dist(train, train).values)
    np.fill_diagonal(within, np.inf)
    train_spacing = within.min(axis=1)
    inauthentic = nearest_dist < train_spacing[nearest_idx]
    return float(100.0 * (1.0 - inauthentic.mean()))


def compute_baselines(train: FeatureMatrix, test: FeatureMatrix, gen: FeatureMatrix,
                      k: int = DEFAULT_KNN_K) -> BaselineReport:
    """All baseline metrics in one pass.

    FID is measured against both splits; their difference is a crude
    overfitting signal (negative when the generated set matches train
    better than test). Precision and recall use the test split as the
    real reference.
    """
    fid_train = fid(gen, train)
    fid_test = fid(gen, test)
    precision, recall = precision_recall(gen, test, k)
    return BaselineReport(
        fid_train=fid_train,
        fid_test=fid_test,
        fid_gap=fid_train - fid_test,
        precision=precision,
        recall=recall,
        c_t=ct_score(train, test, gen),
        auth_pct=auth_pct(train, gen),
        knn_k=k,
    )
