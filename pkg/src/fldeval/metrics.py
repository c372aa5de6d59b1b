"""Feature Likelihood Divergence and the per-sample rankings built on it.

FLD scores a generated set by fitting the per-component mixture to the
train split and measuring how well the resulting density explains held
out test features, scaled to nats per dimension times 100 and shifted by
a calibration constant so an ideal generator lands near zero. Evaluating
the same density on the train split exposes overfitting: a train score
below the test score means the generator leans on memorized samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError, DimensionError
from .mog import FitConfig, MoGModel, fit, log_likelihood, per_component_max_train_density
from .tensor import (
    FeatureMatrix,
    Role,
    apply_standardizer,
    canonical_mean,
    fit_standardizer,
)

CALIBRATION_TRAIN_SPLIT = "train-split"
CALIBRATION_NONE = "none"

KIND_MEMORIZATION = "memorization"
KIND_FIDELITY = "fidelity"


@dataclass(frozen=True)
class CalibrationConstant:
    """Additive constant subtracted from raw FLD scores."""

    c_value: float = 0.0
    method: str = CALIBRATION_NONE
    split_seed: int = 0

    def __post_init__(self):
        if self.method not in (CALIBRATION_TRAIN_SPLIT, CALIBRATION_NONE):
            raise ConfigError(f"unknown calibration method {self.method!r}")
        if not np.isfinite(self.c_value):
            raise DataError("calibration constant must be finite")


@dataclass(frozen=True)
class FldResult:
    """FLD scores for one generated set.

    gen_gap is fld_train minus fld_test; a negative gap means the fitted
    density explains the train split better than held out data, i.e. the
    generator overfits.
    """

    fld_test: float
    fld_train: float
    gen_gap: float
    raw_nll_test: float
    constant: CalibrationConstant

    @property
    def is_overfitting(self) -> bool:
        return self.gen_gap < 0.0


@dataclass(frozen=True)
class SampleRanking:
    """Per-sample log scores with a descending order.

    `threshold`, when present, is a log-space cutoff: entries whose score
    exceeds it are flagged.
    """

    scores: np.ndarray
    order: np.ndarray
    kind: str
    threshold: float | None = None

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        order = np.asarray(self.order)
        if scores.ndim != 1 or order.shape != scores.shape:
            raise DataError("ranking scores and order must be matching vectors")
        if self.kind not in (KIND_MEMORIZATION, KIND_FIDELITY):
            raise ConfigError(f"unknown ranking kind {self.kind!r}")
        scores.setflags(write=False)
        order.setflags(write=False)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "order", order)

    def flagged(self) -> np.ndarray:
        """Indices whose score exceeds the threshold, if one was set."""
        if self.threshold is None:
            raise ConfigError("ranking has no threshold to flag against")
        return np.flatnonzero(self.scores > self.threshold)


def _prepare_splits(train: FeatureMatrix, others: list[FeatureMatrix],
                    standardize: bool) -> tuple[FeatureMatrix, list[FeatureMatrix]]:
    for other in others:
        if other.dim != train.dim:
            raise DimensionError(f"dimension mismatch: {other.dim} vs train {train.dim}")
    if not standardize:
        return train, others
    params = fit_standardizer(train)
    return (apply_standardizer(params, train),
            [apply_standardizer(params, other) for other in others])


def fld(test: FeatureMatrix, gen: FeatureMatrix, train: FeatureMatrix,
        cfg: FitConfig = FitConfig(), constant: CalibrationConstant | None = None,
        *, standardize: bool = True) -> FldResult:
    """Score a generated set against train and test splits.

    The mixture is centered on `gen` and fit to `train`; the score is
    -100/d times the mean test log density, minus the calibration
    constant. Standardization (on by default) is fitted on the train
    split and applied to all three.
    """
    c = constant if constant is not None else CalibrationConstant()
    train_s, (test_s, gen_s) = _prepare_splits(train, [test, gen], standardize)
    model = fit(gen_s.with_role(Role.GENERATED), train_s, cfg)
    scale = 100.0 / train.dim
    mean_test = canonical_mean(log_likelihood(model, test_s))
    mean_train = canonical_mean(log_likelihood(model, train_s))
    fld_test = -scale * mean_test - c.c_value
    fld_train = -scale * mean_train - c.c_value
    return FldResult(
        fld_test=fld_test,
        fld_train=fld_train,
        gen_gap=fld_train - fld_test,
        raw_nll_test=-mean_test / train.dim,
        constant=c,
    )


def split_half(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic half split of row indices 0..n-1."""
    if n < 2:
        raise DataError(f"cannot split {n} rows in half")
    perm = np.random.default_rng(seed).permutation(n)
    half = n // 2
    return perm[:half], perm[half:]


def calibrate(train: FeatureMatrix, test: FeatureMatrix,
              cfg: FitConfig = FitConfig(), seed: int = 0,
              *, standardize: bool = True) -> CalibrationConstant:
    """Estimate the constant that zeroes the score of an ideal generator.

    One half of the train split stands in for a perfect generated set,
    the mixture is fit to the other half, and the resulting raw test
    score becomes the constant. Scoring that surrogate with the returned
    constant therefore gives exactly zero.
    """
    if train.n < 10:
        raise DataError(f"calibration needs at least 10 train rows, got {train.n}")
    idx_gen, idx_fit = split_half(train.n, seed)
    surrogate = train.take(idx_gen).with_role(Role.GENERATED)
    fit_split = train.take(idx_fit)
    result = fld(test, surrogate, fit_split, cfg, None, standardize=standardize)
    return CalibrationConstant(c_value=result.fld_test,
                               method=CALIBRATION_TRAIN_SPLIT, split_seed=seed)


def memorization_ranking(model: MoGModel, train: FeatureMatrix,
                         threshold: float | None = None) -> SampleRanking:
    """Rank components by the largest train density they assign.

    High scores come from components that collapsed onto individual
    train rows. `threshold` is a log-space cutoff for flagging.
    """
    scores = per_component_max_train_density(model, train)
    order = np.argsort(-scores, kind="stable")
    return SampleRanking(scores=scores, order=order,
                         kind=KIND_MEMORIZATION, threshold=threshold)


def memorization_threshold(model: MoGModel, train: FeatureMatrix,
                           quantile: float = 99.9) -> float:
    """Log-space flagging cutoff from a reference model.

    Meant to be fed a calibration surrogate (an ideal generator): the
    returned quantile of its per-component scores bounds what ordinary,
    non-memorizing components reach.
    """
    if not (0.0 < quantile < 100.0):
        raise ConfigError(f"quantile must lie in (0, 100), got {quantile}")
    scores = per_component_max_train_density(model, train)
    return float(np.percentile(scores, quantile))


def fidelity_ranking(gen: FeatureMatrix, test: FeatureMatrix, train: FeatureMatrix,
                     cfg: FitConfig = FitConfig(), *, standardize: bool = True) -> SampleRanking:
    """Rank generated samples by their density under a test-centered fit.

    The same estimator is fit with the test split as centers; generated
    rows in well supported regions of that density score high, outliers
    score low.
    """
    train_s, (test_s, gen_s) = _prepare_splits(train, [test, gen], standardize)
    model = fit(test_s.with_role(Role.BASELINE), train_s, cfg)
    scores = log_likelihood(model, gen_s)
    order = np.argsort(-scores, kind="stable")
    return SampleRanking(scores=scores, order=order, kind=KIND_FIDELITY)
