"""Harmonic vs. arithmetic means of Wishart matrices.

Sample-splitting turns one covariance estimation problem into N smaller
ones; the harmonic mean of the split estimates is closer to the truth in
operator norm than the pooled (arithmetic) estimate, and this package
provides both the closed-form limits and a Monte Carlo harness to check
them at finite sizes.
"""

from .asymptotics import (
    ARITHMETIC,
    HARMONIC,
    HarmonicTransforms,
    SpectralLaw,
    SpikePrediction,
    closed_form_moment,
    davis_kahan_bound,
    favorable_threshold,
    frobenius_sq_limit,
    harmonic_favorable_bound,
    limiting_law,
    op_error_limit,
    optimal_split_size,
    overlap_gap,
    ratio_condition,
    spike_prediction,
    support_edges,
    t_transform_suite,
)
from .errors import (
    ConfigError,
    CovmeansError,
    NonInvertibleSplitError,
    SingularMatrixError,
    SupportViolationError,
    ValidationError,
)
from .estimators import (
    arithmetic_mean,
    conditional_quadratic_expectation,
    fisher_sun_intensity,
    harmonic_mean,
    linear_shrinkage,
    rao_blackwell_factor,
    rao_blackwell_harmonic,
    rb_regularized_harmonic,
)
from .harness import (
    CSV_COLUMNS,
    EstimatorSpec,
    ExperimentConfig,
    TrialRecord,
    load_config,
    parse_config_text,
    run_experiment,
    run_sweep,
    run_trial,
    spike_experiment,
    sweep_configs,
    write_csv,
)
from .matbeta import MatrixBetaParams, expected_LTL, matbeta_log_density, multivariate_gamma_log
from .metrics import (
    TrialMetrics,
    frobenius_sq_per_p,
    law_cdf_grid,
    leading_overlap_sq,
    operator_norm_error,
    spectral_law_distance,
)
from .sampling import (
    DataMatrix,
    HaarDiagonal,
    Identity,
    Partition,
    SpdMatrix,
    Spiked,
    build_covariance,
    haar_orthogonal,
    sample_data,
    split_wisharts,
    wishart,
)
from .selftest import CheckResult, run_selftest

__version__ = "0.1.0"

__all__ = [
    "ARITHMETIC",
    "HARMONIC",
    "CSV_COLUMNS",
    "CheckResult",
    "ConfigError",
    "CovmeansError",
    "DataMatrix",
    "EstimatorSpec",
    "ExperimentConfig",
    "HaarDiagonal",
    "HarmonicTransforms",
    "Identity",
    "MatrixBetaParams",
    "NonInvertibleSplitError",
    "Partition",
    "SingularMatrixError",
    "SpdMatrix",
    "SpectralLaw",
    "SpikePrediction",
    "Spiked",
    "SupportViolationError",
    "TrialMetrics",
    "TrialRecord",
    "ValidationError",
    "arithmetic_mean",
    "build_covariance",
    "closed_form_moment",
    "conditional_quadratic_expectation",
    "davis_kahan_bound",
    "expected_LTL",
    "favorable_threshold",
    "fisher_sun_intensity",
    "frobenius_sq_limit",
    "frobenius_sq_per_p",
    "haar_orthogonal",
    "harmonic_favorable_bound",
    "harmonic_mean",
    "law_cdf_grid",
    "leading_overlap_sq",
    "limiting_law",
    "linear_shrinkage",
    "load_config",
    "matbeta_log_density",
    "multivariate_gamma_log",
    "op_error_limit",
    "operator_norm_error",
    "optimal_split_size",
    "overlap_gap",
    "parse_config_text",
    "rao_blackwell_factor",
    "rao_blackwell_harmonic",
    "ratio_condition",
    "rb_regularized_harmonic",
    "run_experiment",
    "run_selftest",
    "run_sweep",
    "run_trial",
    "sample_data",
    "spectral_law_distance",
    "spike_experiment",
    "spike_prediction",
    "split_wisharts",
    "support_edges",
    "sweep_configs",
    "t_transform_suite",
    "wishart",
    "write_csv",
    "__version__",
]
