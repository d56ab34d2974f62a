"""Targeting weights calibrated to community preference rankings.

A Bayesian ranking model (Gibbs-sampled) learns how communities trade off
household characteristics when ordering households by need; the fitted
weights score potential beneficiaries anywhere a census exists. Baselines,
an evaluation harness, a synthetic-truth generator, and dynamic prior
updating round out the toolkit.
"""

from .baselines import PmtFit, ProbitFit, dichotomize, fit_pmt_ols, fit_probit_mle
from .data import (
    Dataset,
    Household,
    RankingScheme,
    ScalingInfo,
    assemble_dataset,
    load_census,
    load_quotas,
    load_rankings,
    load_survey,
    rank_of,
    standardize_covariates,
)
from .evaluate import (
    ExperimentPlan,
    TargetingResult,
    aggregate_model_ranking,
    compute_scores,
    error_rate,
    rank_correlation,
    replication_experiment,
    score_and_select,
    select_beneficiaries,
    standardized_coefficients,
)
from .gibbs import (
    GibbsSampler,
    LatentState,
    McmcConfig,
    ModelSpec,
    PosteriorSamples,
    run_gibbs,
)
from .rng import (
    RngStream,
    derive_rng,
    sample_multinomial_index,
    sample_mvn,
    sample_scaled_inv_chisq,
    sample_truncated_normal,
)
from .synthetic import GenConfig, TruthRecord, generate_dataset, shuffle_ranker
from .update import UpdatedPrior, apply_updated_prior, compose_updated_priors

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "ExperimentPlan",
    "GenConfig",
    "GibbsSampler",
    "Household",
    "LatentState",
    "McmcConfig",
    "ModelSpec",
    "PmtFit",
    "PosteriorSamples",
    "ProbitFit",
    "RankingScheme",
    "RngStream",
    "ScalingInfo",
    "TargetingResult",
    "TruthRecord",
    "UpdatedPrior",
    "aggregate_model_ranking",
    "apply_updated_prior",
    "assemble_dataset",
    "compose_updated_priors",
    "compute_scores",
    "derive_rng",
    "dichotomize",
    "error_rate",
    "fit_pmt_ols",
    "fit_probit_mle",
    "generate_dataset",
    "load_census",
    "load_quotas",
    "load_rankings",
    "load_survey",
    "rank_correlation",
    "rank_of",
    "replication_experiment",
    "run_gibbs",
    "sample_multinomial_index",
    "sample_mvn",
    "sample_scaled_inv_chisq",
    "sample_truncated_normal",
    "score_and_select",
    "select_beneficiaries",
    "shuffle_ranker",
    "standardize_covariates",
    "standardized_coefficients",
]
