"""Extreme quantile, endpoint and tail-probability estimation for upper-truncated heavy tails.

The core is a peaks-over-threshold model in which the generalized Pareto
excess distribution is itself truncated at the largest exceedance.  It comes
with a test for truncation, three classical baselines, a seeded Monte Carlo
study harness and a small command-line tool.
"""

from .baselines import (
    BaselineFit,
    Method,
    classical_gpd_mle,
    gpd_pot_quantile,
    gpd_pot_tail_probability,
    hill,
    moment_estimator,
    trunc_pareto_equation,
    trunc_pareto_fit,
    trunc_pareto_odds,
)
from .dataio import (
    DataError,
    Dataset,
    QQKind,
    QQPlotData,
    energy_to_magnitude,
    load_csv,
    magnitude_energy,
    magnitude_to_energy,
    qq_data,
)
from .distributions import (
    Family,
    InfiniteEndpointError,
    ParentModel,
    TruncationSpec,
    make_rng,
    parent_quantile,
    sample_truncated,
    truncated_cdf,
    truncated_gpd_rtf,
    truncated_quantile,
)
from .gof import TestResult, p_value, truncation_test
from .study import StudyConfig, StudyResult, Summary, aggregate, load_config, parse_config, run_cell, run_study
from .sweep import k_sweep
from .tpot import (
    DomainError,
    ExceedanceSet,
    NoFiniteEndpointError,
    TailFit,
    endpoint_estimator,
    exceedances,
    fit_sample,
    fit_truncated_mle,
    likelihood_equations,
    log_likelihood,
    log_likelihood_sigma,
    odds_estimator,
    quantile_parent_reconstructed,
    quantile_truncated,
    score,
    tail_probability,
)

__version__ = "0.1.0"
