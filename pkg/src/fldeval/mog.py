"""Mixture-of-Gaussians density estimator with per-component variances.

The model places one isotropic Gaussian on every generated sample and
fits only the component variances, by maximizing the likelihood of a
reference (train) set. Components sitting on near-copies of train rows
collapse toward zero variance, which is what makes the resulting
density scores sensitive to memorization.

Everything runs in log space: with feature dimensions in the hundreds,
sigma**(-d) style factors overflow long before the math goes wrong.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, DataError, DimensionError, FitError, NumericalError
from .tensor import (
    LN_2PI,
    DistanceMatrix,
    FeatureMatrix,
    Role,
    canonical_mean,
    pairwise_sq_dist,
    row_logsumexp,
)

# Floor for initial component variances so exact copies (zero nearest
# distance) stay representable in log space.
VAR_FLOOR = 1e-8

INIT_NEAREST = "nn-over-d"
INIT_CONSTANT = "constant"

_CENTER_ROLES = (Role.GENERATED, Role.BASELINE)


@dataclass(frozen=True)
class FitConfig:
    """Optimizer and objective knobs for a variance fit.

    Defaults follow the reference recipe: full-batch Adam at a large
    step size for a fixed epoch budget, with nearest-neighbor variance
    initialization and the scaled-norm base likelihood enabled.
    """

    lr: float = 0.5
    epochs: int = 50
    batch_size: int = 10_000
    adam_betas: tuple[float, float] = (0.9, 0.999)
    adam_eps: float = 1e-8
    base_likelihood_scale: float = 0.9
    # When set, the base term reads the scaled squared norm as a distance
    # and squares it again. Off by default; kept for comparison.
    literal_base_distance: bool = False
    use_base_likelihood: bool = True
    init_rule: str = INIT_NEAREST
    init_value: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not (self.lr > 0):
            raise ConfigError(f"lr must be positive, got {self.lr}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be at least 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be at least 1, got {self.batch_size}")
        b1, b2 = self.adam_betas
        if not (0.0 <= b1 < 1.0 and 0.0 <= b2 < 1.0):
            raise ConfigError(f"adam betas must lie in [0, 1), got {self.adam_betas}")
        if not (self.adam_eps > 0):
            raise ConfigError(f"adam_eps must be positive, got {self.adam_eps}")
        if self.init_rule not in (INIT_NEAREST, INIT_CONSTANT):
            raise ConfigError(f"unknown init rule {self.init_rule!r}")
        if self.init_rule == INIT_CONSTANT and not (self.init_value > 0):
            raise ConfigError(f"constant init needs a positive variance, got {self.init_value}")


@dataclass(frozen=True)
class BaseLikelihood:
    """Per-train-row floor likelihood added to the mixture objective.

    Without it, train rows far from every component would contribute an
    effectively unbounded penalty and dominate the fit.
    """

    log_values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.log_values, dtype=np.float64)
        if vals.ndim != 1:
            raise DataError(f"base likelihood must be a vector, got shape {vals.shape}")
        if not np.isfinite(vals).all():
            raise DataError("base likelihood contains non-finite entries")
        vals.setflags(write=False)
        object.__setattr__(self, "log_values", vals)


@dataclass(frozen=True)
class MoGModel:
    """Fitted mixture: fixed centers plus per-component log variances."""

    centers: FeatureMatrix
    log_var: np.ndarray
    dim: int
    fit_trace: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        if self.centers.role not in _CENTER_ROLES:
            raise DataError(f"centers must carry a generated or baseline role, got {self.centers.role}")
        log_var = np.asarray(self.log_var, dtype=np.float64)
        if log_var.shape != (self.centers.n,):
            raise DataError(f"log_var shape {log_var.shape} does not match {self.centers.n} centers")
        if not np.isfinite(log_var).all():
            raise DataError("log_var contains non-finite entries")
        if self.dim != self.centers.dim:
            raise DimensionError(f"model dim {self.dim} does not match centers dim {self.centers.dim}")
        log_var.setflags(write=False)
        object.__setattr__(self, "log_var", log_var)
        trace = np.asarray(self.fit_trace, dtype=np.float64)
        trace.setflags(write=False)
        object.__setattr__(self, "fit_trace", trace)

    @property
    def n_components(self) -> int:
        return self.centers.n

    def variances(self) -> np.ndarray:
        return np.exp(self.log_var)


def _init_from_dist(dist: np.ndarray, m: int, dim: int, rule: str, value: float) -> np.ndarray:
    if rule == INIT_CONSTANT:
        if not (value > 0):
            raise ConfigError(f"constant init needs a positive variance, got {value}")
        return np.full(m, math.log(value))
    if rule != INIT_NEAREST:
        raise ConfigError(f"unknown init rule {rule!r}")
    nearest = dist.min(axis=0)
    return np.log(np.maximum(nearest / dim, VAR_FLOOR))


def init_variances(centers: FeatureMatrix, train: FeatureMatrix,
                   rule: str = INIT_NEAREST, value: float = 1.0) -> np.ndarray:
    """Initial log variances for a fit.

    The nearest-neighbor rule sets sigma_j^2 to the squared distance from
    center j to its closest train row, divided by the dimension, floored
    at VAR_FLOOR. The constant rule uses `value` everywhere.
    """
    if centers.dim != train.dim:
        raise DimensionError(f"dimension mismatch: centers {centers.dim} vs train {train.dim}")
    if rule == INIT_CONSTANT:
        return _init_from_dist(np.empty((0, centers.n)), centers.n, centers.dim, rule, value)
    dist = pairwise_sq_dist(train, centers).values
    return _init_from_dist(dist, centers.n, centers.dim, rule, value)


def compute_base_likelihood(train: FeatureMatrix, scale: float = 0.9,
                            *, literal: bool = False) -> BaseLikelihood:
    """Log of the floor likelihood for each train row.

    Models the row as sitting at squared distance scale * ||x||^2 from
    the mode of a unit-variance Gaussian. The literal variant squares
    that quantity once more before using it as a squared distance.
    """
    sq_norm = np.einsum("ij,ij->i", train.data, train.data)
    sq_dist = scale * sq_norm
    if literal:
        sq_dist = np.square(sq_dist)
    log_values = -0.5 * train.dim * LN_2PI - 0.5 * sq_dist
    return BaseLikelihood(log_values)


def _base_for(cfg: FitConfig, train: FeatureMatrix) -> BaseLikelihood | None:
    if not cfg.use_base_likelihood:
        return None
    return compute_base_likelihood(train, cfg.base_likelihood_scale,
                                   literal=cfg.literal_base_distance)


def _component_log_density(dist: np.ndarray, log_var: np.ndarray, dim: int) -> np.ndarray:
    """log N(x_i | c_j, sigma_j^2 I) for every (train row, component) pair."""
    # exp(-log_var) overflows once a variance collapses far enough; the
    # resulting non-finite entries are rejected by the caller, so the
    # intermediate warnings carry no information.
    with np.errstate(over="ignore", invalid="ignore"):
        half_inv_var = 0.5 * np.exp(-log_var)
        return (-0.5 * dim * LN_2PI
                - 0.5 * dim * log_var[None, :]
                - dist * half_inv_var[None, :])


def _objective_and_grad(dist: np.ndarray, log_var: np.ndarray, dim: int,
                        base_log: np.ndarray | None) -> tuple[float, np.ndarray]:
    """Mean train NLL of the mixture and its gradient in log variances.

    The mixture averages the m component densities; the base likelihood,
    when present, is added after that average, so each row's density is
    a logsumexp over m shifted component terms plus one base term.
    """
    n, m = dist.shape
    log_m = math.log(m)
    comp = _component_log_density(dist, log_var, dim)
    if not np.isfinite(comp).all():
        bad = np.argwhere(~np.isfinite(comp))
        raise NumericalError("non-finite component density", component=int(bad[0, 1]))
    log_mix = row_logsumexp(comp) - log_m
    log_density = log_mix if base_log is None else np.logaddexp(log_mix, base_log)
    if not np.isfinite(log_density).all():
        bad = int(np.flatnonzero(~np.isfinite(log_density))[0])
        raise NumericalError(f"non-finite mixture density for train row {bad}")
    objective = -canonical_mean(log_density)
    # Posterior weight of component j for row i, with the base term
    # absorbing the remainder of each row's probability mass.
    weights = np.exp(comp - log_m - log_density[:, None])
    half_inv_var = 0.5 * np.exp(-log_var)
    grad_terms = weights * (0.5 * dim - dist * half_inv_var[None, :])
    grad = grad_terms.sum(axis=0) / n
    return objective, grad


def train_nll_objective(model: MoGModel, train: FeatureMatrix,
                        base: BaseLikelihood | None = None) -> tuple[float, np.ndarray]:
    """Objective value and gradient at the model's current variances."""
    if train.dim != model.dim:
        raise DimensionError(f"dimension mismatch: train {train.dim} vs model {model.dim}")
    if base is not None and base.log_values.shape[0] != train.n:
        raise DataError(f"base likelihood covers {base.log_values.shape[0]} rows, train has {train.n}")
    dist = pairwise_sq_dist(train, model.centers).values
    return _objective_and_grad(dist, model.log_var, model.dim, None if base is None else base.log_values)


class _Adam:
    """Plain Adam on a flat parameter vector."""

    def __init__(self, size: int, lr: float, betas: tuple[float, float], eps: float):
        self.lr = lr
        self.b1, self.b2 = betas
        self.eps = eps
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        self.t += 1
        self.m = self.b1 * self.m + (1.0 - self.b1) * grad
        self.v = self.b2 * self.v + (1.0 - self.b2) * grad * grad
        m_hat = self.m / (1.0 - self.b1 ** self.t)
        v_hat = self.v / (1.0 - self.b2 ** self.t)
        return params - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def fit(centers: FeatureMatrix, train: FeatureMatrix, cfg: FitConfig = FitConfig(),
        base: BaseLikelihood | None = None) -> MoGModel:
    """Fit per-component variances by Adam on the mean train NLL.

    The distance matrix is computed once up front. Train rows are put in
    a canonical lexicographic order before any reduction, which makes
    the fitted variances exactly invariant to how the caller ordered the
    train set; invariance to center order follows from the value-sorted
    reductions in the objective itself.

    Args:
        centers: mixture centers (generated or baseline role).
        train: reference rows whose likelihood is maximized.
        cfg: optimizer and objective settings.
        base: precomputed floor likelihood, aligned with `train` rows.
            When omitted it is derived from `cfg`.

    Returns:
        The fitted model. `fit_trace` holds the objective before each
        epoch plus the final value, so it has epochs + 1 entries.
    """
    if centers.role not in _CENTER_ROLES:
        raise DataError(f"centers must carry a generated or baseline role, got {centers.role}")
    if centers.dim != train.dim:
        raise DimensionError(f"dimension mismatch: centers {centers.dim} vs train {train.dim}")
    if base is not None and base.log_values.shape[0] != train.n:
        raise DataError(f"base likelihood covers {base.log_values.shape[0]} rows, train has {train.n}")

    order = np.lexsort(train.data.T[::-1])
    train_sorted = FeatureMatrix(train.data[order], role=train.role)
    if base is None:
        base_sorted = _base_for(cfg, train_sorted)
    else:
        base_sorted = BaseLikelihood(base.log_values[order])
    base_log = None if base_sorted is None else base_sorted.log_values

    dist = pairwise_sq_dist(train_sorted, centers).values
    log_var = _init_from_dist(dist, centers.n, centers.dim, cfg.init_rule, cfg.init_value)

    n = train_sorted.n
    full_batch = cfg.batch_size >= n
    adam = _Adam(centers.n, cfg.lr, cfg.adam_betas, cfg.adam_eps)
    rng = np.random.default_rng(cfg.seed)
    trace: list[float] = []
    try:
        for _ in range(cfg.epochs):
            if full_batch:
                objective, grad = _objective_and_grad(dist, log_var, centers.dim, base_log)
                trace.append(objective)
                log_var = adam.step(log_var, grad)
            else:
                objective, _ = _objective_and_grad(dist, log_var, centers.dim, base_log)
                trace.append(objective)
                perm = rng.permutation(n)
                for start in range(0, n, cfg.batch_size):
                    rows = perm[start:start + cfg.batch_size]
                    batch_base = None if base_log is None else base_log[rows]
                    _, grad = _objective_and_grad(dist[rows], log_var, centers.dim, batch_base)
                    log_var = adam.step(log_var, grad)
        final, _ = _objective_and_grad(dist, log_var, centers.dim, base_log)
        trace.append(final)
    except NumericalError as exc:
        raise FitError(f"fit diverged: {exc}", trace=np.asarray(trace)) from exc
    return MoGModel(centers=centers, log_var=log_var, dim=centers.dim,
                    fit_trace=np.asarray(trace))


def log_likelihood(model: MoGModel, query: FeatureMatrix) -> np.ndarray:
    """Log mixture density of each query row under the fitted model."""
    if query.dim != model.dim:
        raise DimensionError(f"dimension mismatch: query {query.dim} vs model {model.dim}")
    dist = pairwise_sq_dist(query, model.centers).values
    comp = _component_log_density(dist, model.log_var, model.dim)
    return row_logsumexp(comp) - math.log(model.n_components)


def per_component_max_train_density(model: MoGModel, train: FeatureMatrix) -> np.ndarray:
    """For each component, the largest train-row density it assigns.

    Computed in log space from the nearest train row per component. A
    component whose variance collapsed onto a train row scores far above
    the rest, which is the memorization signal.
    """
    if train.dim != model.dim:
        raise DimensionError(f"dimension mismatch: train {train.dim} vs model {model.dim}")
    dist = pairwise_sq_dist(train, model.centers).values
    nearest = dist.min(axis=0)
    half_inv_var = 0.5 * np.exp(-model.log_var)
    return (-0.5 * model.dim * LN_2PI
            - 0.5 * model.dim * model.log_var
            - nearest * half_inv_var)
