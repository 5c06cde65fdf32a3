"""gamma prime: a normalized odds-ratio effect size with approximate posterior inference."""

__version__ = "0.1.0"

from .contab import ContingencyTable, SampleEstimates, estimates, from_counts, haldane_correct, woolf_se
from .effects import (
    EffectSummary,
    ExposureModel,
    GammaPrimeRangeWarning,
    LlcConstants,
    gamma_of_psi,
    gamma_prime_of_psi,
    llc_constants,
    log_or,
    se_gamma_prime,
    sigma_minimizers,
    sigma_population,
    summarize_published,
    summarize_table,
    yule_q,
    yule_y,
)
from .hypotest import TestResult, t_test, z_test, zt_ratio
from .posterior import (
    BinnedPrior,
    PosteriorResult,
    dress,
    hpd_interval,
    make_default_prior,
    posterior_from_estimate,
    posterior_weights,
    summary_to_se,
    undress,
)
