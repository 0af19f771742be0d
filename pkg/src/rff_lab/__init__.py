"""Random Fourier feature embeddings, exact variance laws, bound evaluators,
and a Monte-Carlo verification harness for shift-invariant kernels."""

__version__ = "0.1.0"

from .analysis import (
    covariance,
    covariance_matrix,
    variance,
    variance_advantage,
    variance_profile,
)
from .bounds import (
    BoundForm,
    BoundInput,
    BoxUniform,
    WeightedPairs,
    alpha_coefficient,
    beta_coefficient,
    concentration_bound,
    dudley_gamma,
    dudley_gamma_prime,
    expected_max_bound,
    gaussian_bound_input,
    integrate_survival_bound,
    l2_concentration_bound,
    l2_expected_error,
    required_D,
    survival_bound_curve,
    uniform_bound,
)
from .downstream import (
    Bias,
    EstimateMode,
    EstimatorKind,
    KrrModel,
    MmdEstimate,
    krr_drift_bound,
    krr_fit,
    krr_general_drift_bound,
    krr_predict,
    mmd2,
    mmd2_exact,
    mmk,
    mmk_exact,
    mmk_expected_abs_error,
    mmk_mcdiarmid_bound,
    mmk_variance,
    svm_drift_bound,
    svm_epsilon_threshold,
)
from .empirical import (
    ConfigError,
    ExperimentConfig,
    SlopeFit,
    TrialStats,
    loglog_slope,
    run_l2_error_trials,
    run_max_error_trials,
    survival_curve,
)
from .features import (
    EmbeddedSet,
    FeatureConfig,
    Variant,
    embed,
    error_matrix,
    exact_gram,
    load_embedded,
    reconstruct,
    save_embedded,
    spectral_draw,
)
from .kernels import (
    KernelFamily,
    ShiftInvariantKernel,
    SpectralDraw,
    gaussian_kernel,
    kernel_eval,
    lipschitz_const,
    radial_eval,
    sample_spectral,
    sigma_p,
    wimpy_variance_sup,
)

__all__ = [name for name in dir() if not name.startswith("_")]
