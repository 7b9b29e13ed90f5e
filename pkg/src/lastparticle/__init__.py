"""Rare-event probability estimation on absorbed Markov chain trajectories.

The package estimates P(Φ(X) > l) for very small probabilities, where X
is a Markov chain killed after a random finite number of steps and Φ a
scalar functional of its path.  The workhorse is the last-particle
splitting estimator driven by a Hastings-Metropolis sampler on path
space; simple and checkpointed very-large Monte Carlo provide baselines.

Two concrete models are included: a Gaussian random walk on an interval
(``model_1d``) and a monokinetic two-medium shielding transport model in
a box (``model_2d``), plus an analytic standard-normal reference model
with an exact conditional sampler for driver validation.
"""

from .analytic import AnalyticModel
from .baseline import McResult, clopper_pearson, quality_ratio, rmse, simple_mc, vlmc
from .harness import (ExperimentConfig, build_model, coverage_check,
                      emit_figure_data, load_config, load_report,
                      parse_config_text, run_experiment, save_report)
from .last_particle import (EstimateResult, NoSurvivorsError, confidence_interval,
                            hm_conditional_sample, run_ideal, run_practical,
                            substream)
from .model_1d import Kernel1DParams, Model1D, Model1DParams
from .model_2d import Kernel2DParams, Model2D, Model2DParams
from .path_space import AbsorbedChainSpec, Trajectory, log_pdf_absorbed_chain
from .validation import run_suites

__version__ = "0.1.0"

__all__ = [
    "AbsorbedChainSpec",
    "AnalyticModel",
    "EstimateResult",
    "ExperimentConfig",
    "Kernel1DParams",
    "Kernel2DParams",
    "McResult",
    "Model1D",
    "Model1DParams",
    "Model2D",
    "Model2DParams",
    "NoSurvivorsError",
    "Trajectory",
    "build_model",
    "clopper_pearson",
    "confidence_interval",
    "coverage_check",
    "emit_figure_data",
    "hm_conditional_sample",
    "load_config",
    "load_report",
    "log_pdf_absorbed_chain",
    "parse_config_text",
    "quality_ratio",
    "rmse",
    "run_experiment",
    "run_ideal",
    "run_practical",
    "run_suites",
    "save_report",
    "simple_mc",
    "substream",
    "vlmc",
    "__version__",
]
