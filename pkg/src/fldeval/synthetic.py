"""Two-dimensional synthetic experiments for exercising the metrics.

A deterministic two-moons sampler, a trivially tunable KDE generator,
controlled corruptions of a generated set, and canned experiment grids
that sweep one knob and tabulate every metric at each point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .baselines import DEFAULT_KNN_K, compute_baselines
from .errors import ConfigError, DataError
from .metrics import calibrate, fld
from .mog import FitConfig
from .seeds import (
    STAGE_CALIBRATION,
    STAGE_GENERATION,
    STAGE_OPTIMIZER,
    STAGE_PERTURBATION,
    STAGE_SYNTHESIS,
    subseed,
)
from .tensor import FeatureMatrix, Role

EXPERIMENT_KDE_USHAPE = "kde-ushape"
EXPERIMENT_COPY_INJECTION = "copy-injection"
EXPERIMENT_DUPLICATION = "duplication"

DEFAULT_KDE_GRID = (1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0)
DEFAULT_COPY_FRACTIONS = (0.0, 0.25, 0.5, 0.75, 1.0)
DEFAULT_DUP_FACTORS = (1, 2, 4, 8)

# Variance of the jitter applied to near-copies when a perturbation does
# not specify one.
DEFAULT_JITTER_VAR = 1e-4

PERTURB_COPY_TRAIN = "copy-train"
PERTURB_DUPLICATE = "duplicate"
PERTURB_DROP_MODES = "drop-modes"
PERTURB_GAUSSIAN_NOISE = "gaussian-noise"


@dataclass(frozen=True)
class TwoMoonsConfig:
    """Sampling plan for the two-moons dataset."""

    n_total: int = 3000
    noise: float = 0.1
    n_train: int = 2000
    n_test: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.n_total < 2:
            raise ConfigError(f"n_total must be at least 2, got {self.n_total}")
        if self.noise < 0:
            raise ConfigError(f"noise must be non-negative, got {self.noise}")
        if self.n_train < 1 or self.n_test < 1:
            raise ConfigError("both splits need at least one row")
        if self.n_train + self.n_test > self.n_total:
            raise ConfigError(
                f"split {self.n_train}+{self.n_test} exceeds n_total {self.n_total}")


def _moon_arcs(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Noiseless arc points and moon labels for n samples.

    Two interleaved unit half-circles: the first is the upper arc at the
    origin, the second is its point reflection brought down so that its
    vertex sits at (1, -0.5).
    """
    n_first = n // 2
    n_second = n - n_first
    t1 = np.linspace(0.0, np.pi, n_first)
    t2 = np.linspace(0.0, np.pi, n_second)
    first = np.column_stack([np.cos(t1), np.sin(t1)])
    second = np.column_stack([1.0 - np.cos(t2), 0.5 - np.sin(t2)])
    points = np.vstack([first, second])
    labels = np.concatenate([np.zeros(n_first, dtype=np.int64),
                             np.ones(n_second, dtype=np.int64)])
    return points, labels


def sample_moons(n: int, noise: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """n noisy two-moons points in a shuffled order, with moon labels."""
    if n < 1:
        raise ConfigError(f"need at least one sample, got {n}")
    points, labels = _moon_arcs(n)
    rng = np.random.default_rng(seed)
    if noise > 0:
        points = points + rng.normal(0.0, noise, size=points.shape)
    perm = rng.permutation(n)
    return points[perm], labels[perm]


def moon_labels(points: np.ndarray) -> np.ndarray:
    """Assign each 2-D point to the nearest ideal arc (0 or 1)."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DataError(f"expected (n, 2) points, got shape {pts.shape}")
    arcs, arc_labels = _moon_arcs(2048)
    diff = pts[:, None, :] - arcs[None, :, :]
    sq = np.einsum("ijk,ijk->ij", diff, diff)
    return arc_labels[sq.argmin(axis=1)]


def two_moons(cfg: TwoMoonsConfig) -> tuple[FeatureMatrix, FeatureMatrix]:
    """Train and test splits of a seeded two-moons sample."""
    points, _ = sample_moons(cfg.n_total, cfg.noise, cfg.seed)
    train = FeatureMatrix(points[:cfg.n_train], role=Role.TRAIN)
    test = FeatureMatrix(points[cfg.n_train:cfg.n_train + cfg.n_test], role=Role.TEST)
    return train, test


def kde_generator(train: FeatureMatrix, bandwidth: float, m: int, seed: int) -> FeatureMatrix:
    """m samples from a fixed-bandwidth KDE over the train rows.

    Each sample is a uniformly chosen train row plus isotropic Gaussian
    noise with standard deviation `bandwidth`.
    """
    if not (bandwidth > 0):
        raise ConfigError(f"bandwidth must be positive, got {bandwidth}")
    if m < 1:
        raise ConfigError(f"need at least one sample, got {m}")
    rng = np.random.default_rng(seed)
    rows = rng.integers(0, train.n, size=m)
    noise = rng.normal(0.0, bandwidth, size=(m, train.dim))
    return FeatureMatrix(train.data[rows] + noise, role=Role.GENERATED)


@dataclass(frozen=True)
class PerturbationSpec:
    """One controlled corruption of a generated set."""

    kind: str
    k: int = 0
    jitter_var: float = DEFAULT_JITTER_VAR
    keep_labels: tuple[int, ...] = ()
    noise_var: float = 0.0
    seed: int = 0

    def __post_init__(self):
        known = (PERTURB_COPY_TRAIN, PERTURB_DUPLICATE, PERTURB_DROP_MODES,
                 PERTURB_GAUSSIAN_NOISE)
        if self.kind not in known:
            raise ConfigError(f"unknown perturbation kind {self.kind!r}")
        if self.jitter_var < 0 or self.noise_var < 0:
            raise ConfigError("noise variances must be non-negative")
        if self.kind == PERTURB_DROP_MODES and not self.keep_labels:
            raise ConfigError("drop-modes needs at least one label to keep")

    @classmethod
    def copy_train(cls, k: int, jitter_var: float = DEFAULT_JITTER_VAR,
                   seed: int = 0) -> "PerturbationSpec":
        return cls(kind=PERTURB_COPY_TRAIN, k=k, jitter_var=jitter_var, seed=seed)

    @classmethod
    def duplicate(cls, k: int, seed: int = 0) -> "PerturbationSpec":
        return cls(kind=PERTURB_DUPLICATE, k=k, seed=seed)

    @classmethod
    def drop_modes(cls, keep_labels, seed: int = 0) -> "PerturbationSpec":
        return cls(kind=PERTURB_DROP_MODES, keep_labels=tuple(keep_labels), seed=seed)

    @classmethod
    def gaussian_noise(cls, var: float, seed: int = 0) -> "PerturbationSpec":
        return cls(kind=PERTURB_GAUSSIAN_NOISE, noise_var=var, seed=seed)


def apply_perturbation(gen: FeatureMatrix, train: FeatureMatrix,
                       spec: PerturbationSpec) -> FeatureMatrix:
    """Corrupted copy of `gen` with the same row count."""
    if gen.dim != train.dim:
        raise DataError(f"dimension mismatch: gen {gen.dim} vs train {train.dim}")
    rng = np.random.default_rng(spec.seed)
    data = np.array(gen.data)

    if spec.kind == PERTURB_COPY_TRAIN:
        if spec.k < 0 or spec.k > gen.n or spec.k > train.n:
            raise ConfigError(f"cannot copy {spec.k} rows into {gen.n} generated from {train.n} train")
        if spec.k > 0:
            copies = np.array(train.data[:spec.k])
            if spec.jitter_var > 0:
                copies += rng.normal(0.0, math.sqrt(spec.jitter_var), size=copies.shape)
            data[:spec.k] = copies
        return FeatureMatrix(data, role=Role.GENERATED)

    if spec.kind == PERTURB_DUPLICATE:
        if spec.k < 1:
            raise ConfigError(f"duplication factor must be at least 1, got {spec.k}")
        keep = max(1, math.ceil(gen.n / spec.k))
        if keep == gen.n:
            return FeatureMatrix(data, role=Role.GENERATED)
        kept = data[:keep]
        tiled = kept[np.arange(gen.n) % keep]
        jitter = rng.normal(0.0, math.sqrt(DEFAULT_JITTER_VAR), size=tiled.shape)
        jitter[:keep] = 0.0
        return FeatureMatrix(tiled + jitter, role=Role.GENERATED)

    if spec.kind == PERTURB_DROP_MODES:
        if not spec.keep_labels:
            raise ConfigError("drop-modes needs at least one label to keep")
        labels = moon_labels(data)
        mask = np.isin(labels, np.asarray(spec.keep_labels))
        kept = data[mask]
        if kept.shape[0] == 0:
            raise ConfigError(f"no generated rows carry labels {spec.keep_labels}")
        rows = rng.integers(0, kept.shape[0], size=gen.n)
        return FeatureMatrix(kept[rows], role=Role.GENERATED)

    # Gaussian noise.
    if spec.noise_var > 0:
        data += rng.normal(0.0, math.sqrt(spec.noise_var), size=data.shape)
    return FeatureMatrix(data, role=Role.GENERATED)


_METRIC_COLUMNS = ("fld_test", "fld_train", "gen_gap", "raw_nll_test",
                   "fid_train", "fid_test", "fid_gap", "precision", "recall",
                   "c_t", "auth_pct")


def _metric_row(knob_name: str, knob_value: float, train, test, gen, cfg, constant):
    score = fld(test, gen, train, cfg, constant)
    base = compute_baselines(train, test, gen, DEFAULT_KNN_K)
    row = {knob_name: knob_value,
           "fld_test": score.fld_test,
           "fld_train": score.fld_train,
           "gen_gap": score.gen_gap,
           "raw_nll_test": score.raw_nll_test,
           "fid_train": base.fid_train,
           "fid_test": base.fid_test,
           "fid_gap": base.fid_gap,
           "precision": base.precision,
           "recall": base.recall,
           "c_t": base.c_t,
           "auth_pct": base.auth_pct}
    for key, value in row.items():
        if isinstance(value, float) and not np.isfinite(value):
            raise DataError(f"experiment produced non-finite {key} at {knob_name}={knob_value}")
    return row


def run_experiment(name: str, *, seed: int = 0, moons: TwoMoonsConfig | None = None,
                   m: int | None = None, grid=None,
                   cfg: FitConfig | None = None) -> list[dict[str, float]]:
    """Sweep one knob of a canned experiment and tabulate all metrics.

    Experiments:
      kde-ushape: KDE generators across a bandwidth grid. Too small a
        bandwidth memorizes the train set, too large loses fidelity, so
        the test score traces a U across the grid.
      copy-injection: a fixed i.i.d. generated set whose first rows are
        replaced by jittered train copies, across a fraction grid.
      duplication: the same set collapsed onto fewer distinct rows,
        across an integer factor grid.

    Each grid point is independently seeded as seed + index. Returns one
    row per grid point with a stable column order.
    """
    if name not in (EXPERIMENT_KDE_USHAPE, EXPERIMENT_COPY_INJECTION,
                    EXPERIMENT_DUPLICATION):
        raise ConfigError(f"unknown experiment {name!r}")
    moons = moons if moons is not None else TwoMoonsConfig(seed=subseed(seed, STAGE_SYNTHESIS))
    cfg = cfg if cfg is not None else FitConfig()
    if m is None:
        m = 200 if name == EXPERIMENT_COPY_INJECTION else 1000

    train, test = two_moons(moons)
    constant = calibrate(train, test, cfg, seed=subseed(seed, STAGE_CALIBRATION))

    rows = []
    if name == EXPERIMENT_KDE_USHAPE:
        grid = tuple(grid) if grid is not None else DEFAULT_KDE_GRID
        for index, bandwidth in enumerate(grid):
            point_seed = seed + index
            gen = kde_generator(train, float(bandwidth), m,
                                subseed(point_seed, STAGE_GENERATION))
            point_cfg = replace(cfg, seed=subseed(point_seed, STAGE_OPTIMIZER))
            rows.append(_metric_row("bandwidth", float(bandwidth),
                                    train, test, gen, point_cfg, constant))
        return rows

    base_points, _ = sample_moons(m, moons.noise, subseed(seed, STAGE_GENERATION))
    base_gen = FeatureMatrix(base_points, role=Role.GENERATED)

    if name == EXPERIMENT_COPY_INJECTION:
        grid = tuple(grid) if grid is not None else DEFAULT_COPY_FRACTIONS
        for index, fraction in enumerate(grid):
            fraction = float(fraction)
            if not (0.0 <= fraction <= 1.0):
                raise ConfigError(f"copy fraction must lie in [0, 1], got {fraction}")
            point_seed = seed + index
            spec = PerturbationSpec.copy_train(int(round(fraction * m)),
                                               seed=subseed(point_seed, STAGE_PERTURBATION))
            gen = apply_perturbation(base_gen, train, spec)
            point_cfg = replace(cfg, seed=subseed(point_seed, STAGE_OPTIMIZER))
            rows.append(_metric_row("copy_fraction", fraction,
                                    train, test, gen, point_cfg, constant))
        return rows

    grid = tuple(grid) if grid is not None else DEFAULT_DUP_FACTORS
    for index, factor in enumerate(grid):
        factor = int(factor)
        point_seed = seed + index
        spec = PerturbationSpec.duplicate(factor,
                                          seed=subseed(point_seed, STAGE_PERTURBATION))
        gen = apply_perturbation(base_gen, train, spec)
        point_cfg = replace(cfg, seed=subseed(point_seed, STAGE_OPTIMIZER))
        rows.append(_metric_row("dup_factor", float(factor),
                                train, test, gen, point_cfg, constant))
    return rows


def experiment_columns(name: str) -> tuple[str, ...]:
    """Stable column order for an experiment's table."""
    knob = {EXPERIMENT_KDE_USHAPE: "bandwidth",
            EXPERIMENT_COPY_INJECTION: "copy_fraction",
            EXPERIMENT_DUPLICATION: "dup_factor"}.get(name)
    if knob is None:
        raise ConfigError(f"unknown experiment {name!r}")
    return (knob,) + _METRIC_COLUMNS
