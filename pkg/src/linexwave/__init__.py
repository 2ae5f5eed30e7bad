"""Bayesian wavelet shrinkage under asymmetric LINEX loss.

The package bundles a periodic Daubechies DWT/IDWT, a point-mass +
logistic mixture prior, the LINEX-optimal shrinkage rule and baselines
(posterior mean, universal and SURE soft thresholding), a decision-theoretic
risk engine, and a reproducible Monte Carlo study harness.
"""

from .errors import InputError, LinexWaveError, NumericError, ParameterError
from .model import (
    LinexLoss,
    MixturePrior,
    NoiseModel,
    elicit_alpha,
    linex_loss,
    logistic_density,
)
from .risk import (
    BayesRiskResult,
    RiskProfile,
    bayes_risk,
    bayes_risk_mc,
    frequentist_risk,
    risk_profile,
    rule_moments,
    squared_bias,
    variance,
)
from .rules import (
    GlobalAlpha,
    LevelDependentAlpha,
    QuadratureSpec,
    ShrinkageRule,
    apply_rule,
    gauss_weighted_integral,
    linex_posterior_exp,
    linex_rule,
    posterior_mean_rule,
    rule_curve,
    soft_threshold,
    sure_threshold,
    universal_threshold,
)
from .sim import (
    CoefficientGenerator,
    StudyConfig,
    StudyResult,
    add_noise,
    generate_coefficients,
    run_replication,
    run_study,
)
from .transform import (
    FilterPair,
    WaveletDecomposition,
    daubechies_filter,
    dwt,
    estimate_sigma,
    idwt,
    truncate_to_dyadic,
)

__version__ = "0.1.0"

__all__ = [
    "BayesRiskResult",
    "CoefficientGenerator",
    "FilterPair",
    "GlobalAlpha",
    "InputError",
    "LevelDependentAlpha",
    "LinexLoss",
    "LinexWaveError",
    "MixturePrior",
    "NoiseModel",
    "NumericError",
    "ParameterError",
    "QuadratureSpec",
    "RiskProfile",
    "ShrinkageRule",
    "StudyConfig",
    "StudyResult",
    "WaveletDecomposition",
    "add_noise",
    "apply_rule",
    "bayes_risk",
    "bayes_risk_mc",
    "daubechies_filter",
    "dwt",
    "elicit_alpha",
    "estimate_sigma",
    "frequentist_risk",
    "gauss_weighted_integral",
    "generate_coefficients",
    "idwt",
    "linex_loss",
    "linex_posterior_exp",
    "linex_rule",
    "logistic_density",
    "posterior_mean_rule",
    "risk_profile",
    "rule_curve",
    "rule_moments",
    "run_replication",
    "run_study",
    "soft_threshold",
    "squared_bias",
    "sure_threshold",
    "truncate_to_dyadic",
    "universal_threshold",
    "variance",
]
