"""Bayesian hypothesis testing: classical Bayes factors and the
mixture-weight estimation alternative."""

from .bf import (BfResult, PriorRepresentative, SavageDickeyResult,
                 TTestProblem, bf_normal_point_null, log_bf10_ttest,
                 log_marginal_normal_mean, log_marginal_point_null,
                 savage_dickey_normal, standard_normal_prior, sweep_gamma)
from .calibration import (BootstrapReport, Fig1Record, emit_fig1_outputs,
                          parametric_bootstrap, replicate_fig1)
from .core import (Dataset, DomainError, NumericalError, RandomStream,
                   log_pdf_beta, log_pdf_cauchy, log_pdf_normal, log_sum_exp,
                   suff_stats)
from .mixture import (Chain, MhConfig, MixtureProblem, PosteriorSummary,
                      log_posterior_unnorm, posterior_grid, run_mh,
                      run_mh_batch, summarize)

__all__ = [
    "BfResult", "BootstrapReport", "Chain", "Dataset", "DomainError",
    "Fig1Record", "MhConfig", "MixtureProblem", "NumericalError",
    "PosteriorSummary", "PriorRepresentative", "RandomStream",
    "SavageDickeyResult", "TTestProblem", "bf_normal_point_null",
    "emit_fig1_outputs", "log_bf10_ttest", "log_marginal_normal_mean",
    "log_marginal_point_null", "log_pdf_beta", "log_pdf_cauchy",
    "log_pdf_normal", "log_posterior_unnorm", "log_sum_exp",
    "parametric_bootstrap", "posterior_grid", "replicate_fig1", "run_mh",
    "run_mh_batch", "savage_dickey_normal", "standard_normal_prior",
    "suff_stats", "summarize", "sweep_gamma",
]
