"""Robust similarity-based correlation estimation.

The package implements a correlation estimator built from per-observation
Fisher-scale similarity values, its exact finite-sample distributions and
confidence intervals, the multivariate (equicorrelation) generalization,
benchmark estimators, seeded elliptical Monte-Carlo studies, and two
robust multivariate GARCH specifications driven by the similarity signal.
"""

__version__ = "0.1.0"

from .benchmarks import (
    BenchmarkEstimate,
    greiner_map,
    kendall_tau,
    quadrant_correlation,
    sample_correlation,
)
from .distributions import (
    EquicorrelationMeanLaw,
    FiniteSampleLaw,
    LogisticBetaLaw,
    SechLaw,
    finite_sample_cdf,
    finite_sample_cf,
    finite_sample_quantile,
    hetero_variance,
    logistic_beta_pdf,
    logistic_beta_variance,
    omega_n,
    sech_cdf,
    sech_pdf,
)
from .errors import (
    DataError,
    DegenerateObservationError,
    DomainError,
    EstimationError,
    NumericalError,
    SimcorrError,
)
from .garch import (
    CorrDynamicsParams,
    EgarchParams,
    FilteredPaths,
    FitConfig,
    GarchFit,
    bivariate_corr_filter,
    deco_corr_filter,
    egarch_filter,
    fit_two_step,
    simulate_model,
)
from .inference import (
    ConfidenceInterval,
    ZeroCorrelationTest,
    correlation_ci,
    standardize,
    zero_correlation_test,
)
from .similarity import (
    BivariateCovariance,
    BivariateSample,
    CovarianceSpec,
    Equicorrelation,
    MultivariateSample,
    SimilarityEstimate,
    as_sample,
    equicorr_phi,
    equicorr_phi_inverse,
    fisher,
    gamma_hat,
    gamma_hat_bias_corrected,
    inverse_fisher,
    phi_r_bivariate,
    phi_r_multivariate,
    resemblance_coefficient,
)
from .simulation import (
    EllipticalFamily,
    SamplingStudy,
    SeededRng,
    build_equicorrelation,
    mc_sampling_study,
    sample_elliptical,
)
