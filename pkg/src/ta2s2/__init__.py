"""Gaussian-process emulation with annealed, crumb-guided slice sampling of
the kernel hyper-parameters."""

from .annealing import (TemperatureLadder, WeightedSampleSet, effective_sample_size,
                        importance_weights, next_temperature)
from .gp import (HyperParamPoint, IntegratedPosterior, KernelConfig, PriorSpec, TrainingSet,
                 corr_matrix, neg_log_integrated_posterior, nugget_transform, predictive_moments,
                 sq_exp_corr)
from .scoring import (PredictiveMixture, crps_A, crps_mixture, map_estimate, mixture_moments,
                      predictive_mixtures, rmse)
from .tmcmc import RunConfig, RunReport, gp_box, run_ta2s2, ta2s2, uniform_box

__version__ = "0.1.0"

__all__ = [
    "HyperParamPoint", "IntegratedPosterior", "KernelConfig", "PredictiveMixture", "PriorSpec",
    "RunConfig", "RunReport", "TemperatureLadder", "TrainingSet", "WeightedSampleSet",
    "corr_matrix", "crps_A", "crps_mixture", "effective_sample_size", "gp_box",
    "importance_weights", "map_estimate", "mixture_moments", "neg_log_integrated_posterior",
    "next_temperature", "nugget_transform", "predictive_mixtures", "predictive_moments", "rmse",
    "run_ta2s2", "sq_exp_corr", "ta2s2", "uniform_box",
]
