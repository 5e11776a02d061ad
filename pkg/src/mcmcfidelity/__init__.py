"""Bayesian decision-fidelity engine for production-capacity planning.

Bootstrap OLS fits give priors for a linear capacity model, a Gibbs sampler
gives its posterior, the posterior predictive maps growth in processing and
material-handling times to a probability of missing demand, and a critical
growth value splits decisions into operational, tactical and strategic.
"""

from .dataset import (
    DatasetError,
    ObservationDataset,
    bootstrap_resample,
    from_arrays,
    load_csv,
    write_csv,
)
from .decision import (
    DecisionConfig,
    FidelityDecision,
    FidelityLevel,
    PipelineError,
    critical_value,
    decide,
    run_pipeline,
)
from .failure import FailureCurve, GrowthScenario, failure_curve, failure_probability
from .gibbs import (
    PosteriorChain,
    PosteriorSummary,
    conditional_beta_params,
    paper_posterior,
    run_chain,
    sample_conditional_sigma2,
    summarize,
)
from .linreg import LinearFit, RankDeficientError, ols_fit
from .priors import (
    NormalPrior,
    PriorSpec,
    UniformPrior,
    estimate_priors,
    fit_normal,
    fit_uniform,
    paper_priors,
    qq_points,
)
from .synth import GeneratorSpec, facility_like, generate

__version__ = "0.1.0"

__all__ = [
    "DatasetError", "ObservationDataset", "bootstrap_resample", "from_arrays",
    "load_csv", "write_csv", "DecisionConfig", "FidelityDecision", "FidelityLevel",
    "PipelineError", "critical_value", "decide", "run_pipeline", "FailureCurve",
    "GrowthScenario", "failure_curve", "failure_probability", "PosteriorChain",
    "PosteriorSummary", "conditional_beta_params", "paper_posterior", "run_chain",
    "sample_conditional_sigma2", "summarize", "LinearFit", "RankDeficientError",
    "ols_fit", "NormalPrior", "PriorSpec", "UniformPrior", "estimate_priors",
    "fit_normal", "fit_uniform", "paper_priors", "qq_points", "GeneratorSpec",
    "facility_like", "generate",
]
