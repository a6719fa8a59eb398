"""Sample-quantile estimation under uniform-mixing dependence.

Generators with exactly known marginals and mixing coefficients, the exact
empirical-CDF / generalized-inverse machinery, per-path representation
diagnostics with almost-sure envelopes, an exponential tail bound with its
Monte-Carlo falsification harness, and an experiment driver with rate fits
and a Value-at-Risk front end.
"""

from ._version import __version__
from .bahadur import (
    BahadurDiagnostics,
    WindowSpec,
    diagnostics,
    envelope,
    oscillation_sup,
    quantile_deviation_check,
    quantile_sandwich_check,
    remainder,
    sup_abs_deviation,
    sup_density,
    window,
)
from .bounds import (
    BoundInputs,
    BoundResult,
    CenteredIndicator,
    bound_vs_montecarlo,
    c3_of,
    exponential_tail_bound,
)
from .empirical import (
    EmpiricalCdf,
    QuantileEstimate,
    StepCdf,
    build_ecdf,
    generalized_inverse,
    sample_quantile,
)
from .harness import (
    Constants,
    RateFit,
    ReportTable,
    RunConfig,
    VarEstimate,
    emit_report,
    fit_rate,
    run_experiment,
    var_estimate,
)
from .marginals import MarginalModel, bates, exponential, normal, uniform
from .mixing import MixingProfile, half_series, phi_markov, uniform_bound_profile, zero_profile
from .processes import (
    ProcessSpec,
    SamplePath,
    gen_iid,
    gen_m_dependent,
    gen_markov_copula,
    generate,
    iid_spec,
    m_dependent_spec,
    markov_copula_spec,
    two_state_transition,
)

__all__ = [
    "__version__",
    "BahadurDiagnostics", "WindowSpec", "diagnostics", "envelope", "oscillation_sup",
    "quantile_deviation_check", "quantile_sandwich_check", "remainder",
    "sup_abs_deviation", "sup_density", "window",
    "BoundInputs", "BoundResult", "CenteredIndicator", "bound_vs_montecarlo",
    "c3_of", "exponential_tail_bound",
    "EmpiricalCdf", "QuantileEstimate", "StepCdf", "build_ecdf",
    "generalized_inverse", "sample_quantile",
    "Constants", "RateFit", "ReportTable", "RunConfig", "VarEstimate",
    "emit_report", "fit_rate", "run_experiment", "var_estimate",
    "MarginalModel", "bates", "exponential", "normal", "uniform",
    "MixingProfile", "half_series", "phi_markov", "uniform_bound_profile", "zero_profile",
    "ProcessSpec", "SamplePath", "gen_iid", "gen_m_dependent", "gen_markov_copula",
    "generate", "iid_spec", "m_dependent_spec", "markov_copula_spec", "two_state_transition",
]
