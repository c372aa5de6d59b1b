"""Deterministic numerical kernels shared by the metric modules.

Pairwise squared distances, log-space reductions, moment statistics and
feature standardization. All arithmetic is 64-bit. Reductions that feed
fitted quantities accumulate in a canonical value order, so results do
not depend on how the caller happened to arrange input rows.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DataError, DimensionError

LN_2PI = float(np.log(2.0 * np.pi))

# Floor applied to per-dimension standard deviations so constant feature
# columns do not blow up the division.
STD_FLOOR = 1e-8

# Default row blocking for distance matrices; bounds peak memory at
# roughly block_rows * m doubles plus the difference tensor below.
DEFAULT_BLOCK_ROWS = 1024

# Cap on the element count of the (rows, m, k) difference tensor that is
# materialized at once. Purely a function of shapes, never of free RAM,
# so identical inputs always take identical code paths.
_MAX_TEMP_ELEMENTS = 1 << 24


class Role(enum.Enum):
    """Which split a feature matrix represents."""

    TRAIN = "train"
    TEST = "test"
    GENERATED = "generated"
    BASELINE = "baseline"


@dataclass(frozen=True)
class FeatureMatrix:
    """An (n, d) array of feature embeddings tagged with a dataset role.

    Rows are samples, columns are feature dimensions. The payload is
    coerced to contiguous float64 and frozen; all entries must be finite
    and both axes must be non-empty.
    """

    data: np.ndarray
    role: Role = Role.TRAIN
    ids: tuple[str, ...] | None = None

    def __post_init__(self):
        data = np.ascontiguousarray(np.asarray(self.data, dtype=np.float64))
        if data.ndim != 2:
            raise DataError(f"feature matrix must be 2-D, got shape {data.shape}")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise DataError(f"feature matrix needs at least one row and one column, got shape {data.shape}")
        if not np.isfinite(data).all():
            raise DataError("feature matrix contains non-finite entries")
        if not isinstance(self.role, Role):
            raise DataError(f"role must be a Role, got {self.role!r}")
        if self.ids is not None:
            ids = tuple(str(i) for i in self.ids)
            if len(ids) != data.shape[0]:
                raise DataError(f"got {len(ids)} ids for {data.shape[0]} rows")
            object.__setattr__(self, "ids", ids)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def with_role(self, role: Role) -> "FeatureMatrix":
        return FeatureMatrix(self.data, role=role, ids=self.ids)

    def take(self, indices) -> "FeatureMatrix":
        """Row subset, keeping role and any ids aligned."""
        idx = np.asarray(indices)
        ids = None
        if self.ids is not None:
            ids = tuple(self.ids[i] for i in idx)
        return FeatureMatrix(self.data[idx], role=self.role, ids=ids)


@dataclass(frozen=True)
class DistanceMatrix:
    """Squared Euclidean distances between two row sets."""

    values: np.ndarray
    row_role: Role
    col_role: Role

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise DataError(f"distance matrix must be 2-D, got shape {values.shape}")
        if not np.isfinite(values).all():
            raise DataError("distance matrix contains non-finite entries")
        if (values < 0.0).any():
            raise DataError("distance matrix contains negative entries")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


def _block_sq_dist(chunk: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Squared distances from each row of `chunk` to each row of `b`.

    Uses the direct difference-and-square form rather than the Gram
    expansion: every entry is the per-pair sum over dimensions in fixed
    ascending-k order, so values are bitwise stable under any permutation
    of either row set.
    """
    rows, d = chunk.shape
    m = b.shape[0]
    if rows * m * d <= _MAX_TEMP_ELEMENTS:
        diff = chunk[:, None, :] - b[None, :, :]
        return np.einsum("ijk,ijk->ij", diff, diff)
    out = np.zeros((rows, m))
    step = max(1, _MAX_TEMP_ELEMENTS // (rows * m))
    for k0 in range(0, d, step):
        diff = chunk[:, None, k0:k0 + step] - b[None, :, k0:k0 + step]
        out += np.einsum("ijk,ijk->ij", diff, diff)
    return out


def pairwise_sq_dist(a: FeatureMatrix, b: FeatureMatrix,
                     block_rows: int = DEFAULT_BLOCK_ROWS) -> DistanceMatrix:
    """All-pairs squared Euclidean distances, blocked over rows of `a`.

    Args:
        a: left operand, contributes rows of the result.
        b: right operand, contributes columns.
        block_rows: how many rows of `a` to process per block.

    Returns:
        DistanceMatrix of shape (a.n, b.n). Entry (i, j) is the exact
        squared distance between a row i and b row j, up to the fixed
        per-pair accumulation order over dimensions.
    """
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if block_rows < 1:
        raise DataError(f"block_rows must be positive, got {block_rows}")
    out = np.empty((a.n, b.n))
    for start in range(0, a.n, block_rows):
        stop = min(start + block_rows, a.n)
        out[start:stop] = _block_sq_dist(a.data[start:stop], b.data)
    return DistanceMatrix(out, row_role=a.role, col_role=b.role)


def logsumexp(values) -> float:
    """log(sum(exp(values))) for a 1-D array, computed with a max shift.

    Entries may be -inf (they contribute nothing); NaN is rejected.
    Returns -inf when every entry is -inf.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise DataError(f"logsumexp expects a vector, got shape {v.shape}")
    if v.size == 0:
        raise DataError("logsumexp of an empty vector")
    if np.isnan(v).any():
        raise DataError("logsumexp input contains NaN")
    mx = float(v.max())
    if mx == -np.inf:
        return float("-inf")
    return float(mx + np.log(np.exp(v - mx).sum()))


def row_logsumexp(values: np.ndarray) -> np.ndarray:
    """Row-wise logsumexp of a 2-D array.

    Each row is shifted by its max, put into a canonical ascending order
    in a C-contiguous buffer, and only then exponentiated and summed.
    Sorting before the reduction makes the result independent of column
    permutation, and pinning the layout keeps the reduction on one code
    path regardless of how the caller's array was laid out.
    """
    mx = values.max(axis=1)
    finite = np.isfinite(mx)
    safe_mx = np.where(finite, mx, 0.0)
    shifted = np.ascontiguousarray(values - safe_mx[:, None])
    shifted.sort(axis=1)
    with np.errstate(divide="ignore"):
        out = safe_mx + np.log(np.exp(shifted).sum(axis=1))
    return np.where(mx == -np.inf, -np.inf, out)


def canonical_mean(values) -> float:
    """Mean accumulated in ascending value order.

    Invariant to the ordering of `values`, so metrics built on it do not
    change when callers shuffle their rows.
    """
    v = np.sort(np.asarray(values, dtype=np.float64))
    if v.size == 0:
        raise DataError("mean of an empty vector")
    return float(v.sum() / v.size)


def moments(x: FeatureMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Mean vector and population covariance (1/n normalization).

    Requires at least two rows.
    """
    if x.n < 2:
        raise DataError(f"moments need at least 2 rows, got {x.n}")
    mean = x.data.mean(axis=0)
    centered = x.data - mean
    cov = centered.T @ centered / x.n
    return mean, cov


@dataclass(frozen=True)
class StandardizationParams:
    """Per-dimension affine transform fitted on one split."""

    mean: np.ndarray
    stdev: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        stdev = np.asarray(self.stdev, dtype=np.float64)
        if mean.ndim != 1 or stdev.shape != mean.shape:
            raise DataError("standardization parameters must be matching vectors")
        if (stdev <= 0.0).any() or not np.isfinite(stdev).all():
            raise DataError("standard deviations must be positive and finite")
        mean.setflags(write=False)
        stdev.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "stdev", stdev)


def fit_standardizer(x: FeatureMatrix) -> StandardizationParams:
    """Fit per-dimension mean and (floored) population stdev.

    Column sums run over value-sorted entries so the fitted parameters do
    not depend on row order.
    """
    n = x.n
    col_sorted = np.sort(x.data, axis=0)
    mean = col_sorted.sum(axis=0) / n
    dev = np.square(x.data - mean)
    dev.sort(axis=0)
    var = dev.sum(axis=0) / n
    stdev = np.maximum(np.sqrt(var), STD_FLOOR)
    return StandardizationParams(mean=mean, stdev=stdev)


def apply_standardizer(params: StandardizationParams, x: FeatureMatrix) -> FeatureMatrix:
    if x.dim != params.mean.shape[0]:
        raise DimensionError(f"standardizer has {params.mean.shape[0]} dims, matrix has {x.dim}")
    return FeatureMatrix((x.data - params.mean) / params.stdev, role=x.role, ids=x.ids)


def invert_standardizer(params: StandardizationParams, x: FeatureMatrix) -> FeatureMatrix:
    if x.dim != params.mean.shape[0]:
        raise DimensionError(f"standardizer has {params.mean.shape[0]} dims, matrix has {x.dim}")
    return FeatureMatrix(x.data * params.stdev + params.mean, role=x.role, ids=x.ids)
