"""Generative model evaluation from feature vectors.

The centerpiece is an overfitting-sensitive likelihood score built on a
mixture of isotropic Gaussians whose centers are the generated samples
and whose per-center variances are fit to the train split. Companions:
per-sample memorization and fidelity rankings, classic distribution
metrics (FID, precision/recall, a nearest-neighbor rank test, an
authenticity rate), and a synthetic two-moons lab for sanity checks.
"""

from .baselines import (
    BaselineReport,
    GaussianStats,
    auth_pct,
    compute_baselines,
    ct_score,
    fid,
    fid_from_stats,
    precision_recall,
)
from .errors import (
    ConfigError,
    DataError,
    DimensionError,
    FitError,
    FldError,
    FormatError,
    NumericalError,
)
from .fvec import (
    FORMAT_CSV,
    FORMAT_FVEC,
    dataset_entry,
    infer_format,
    sha256_file,
    read_features,
    write_features,
)
from .metrics import (
    CalibrationConstant,
    FldResult,
    SampleRanking,
    calibrate,
    fidelity_ranking,
    fld,
    memorization_ranking,
    memorization_threshold,
    split_half,
)
from .mog import (
    FitConfig,
    MoGModel,
    compute_base_likelihood,
    fit,
    init_variances,
    log_likelihood,
    per_component_max_train_density,
    train_nll_objective,
)
from .report import dumps_report, report_text
from .seeds import subseed
from .synthetic import (
    PerturbationSpec,
    TwoMoonsConfig,
    apply_perturbation,
    experiment_columns,
    kde_generator,
    moon_labels,
    run_experiment,
    sample_moons,
    two_moons,
)
from .tensor import (
    FeatureMatrix,
    Role,
    StandardizationParams,
    apply_standardizer,
    fit_standardizer,
    invert_standardizer,
    logsumexp,
    moments,
    pairwise_sq_dist,
)

__version__ = "0.1.0"

__all__ = [
    "BaselineReport",
    "CalibrationConstant",
    "ConfigError",
    "DataError",
    "DimensionError",
    "FORMAT_CSV",
    "FORMAT_FVEC",
    "FeatureMatrix",
    "FitConfig",
    "FitError",
    "FldError",
    "FldResult",
    "FormatError",
    "GaussianStats",
    "MoGModel",
    "NumericalError",
    "PerturbationSpec",
    "Role",
    "SampleRanking",
    "StandardizationParams",
    "TwoMoonsConfig",
    "apply_perturbation",
    "experiment_columns",
    "apply_standardizer",
    "auth_pct",
    "calibrate",
    "compute_base_likelihood",
    "compute_baselines",
    "ct_score",
    "dumps_report",
    "fid",
    "fid_from_stats",
    "fidelity_ranking",
    "fit",
    "fit_standardizer",
    "fld",
    "dataset_entry",
    "infer_format",
    "init_variances",
    "invert_standardizer",
    "kde_generator",
    "log_likelihood",
    "logsumexp",
    "memorization_ranking",
    "memorization_threshold",
    "moments",
    "moon_labels",
    "pairwise_sq_dist",
    "per_component_max_train_density",
    "precision_recall",
    "read_features",
    "report_text",
    "run_experiment",
    "sample_moons",
    "sha256_file",
    "split_half",
    "subseed",
    "train_nll_objective",
    "two_moons",
    "write_features",
]
