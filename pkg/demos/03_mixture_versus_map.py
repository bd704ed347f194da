"""
Mixture predictions against the MAP emulator
============================================

Hyper-parameter samples for a Franke emulator give a Gaussian mixture at
every test point. Its CRPS is compared with that of the single MAP emulator.
"""

# %%
import numpy as np

from ta2s2.benchmarks import lhs_design, simulate
from ta2s2.gp import PriorSpec, TrainingSet
from ta2s2.scoring import (component_predictions, crps_gaussian, crps_mixture, map_estimate,
                           mixture_moments, predictive_mixtures, rmse)
from ta2s2.tmcmc import RunConfig, run_ta2s2

rng = np.random.default_rng([1, 0])
X, Xt = lhs_design(20, 2, rng), lhs_design(100, 2, rng)
train = TrainingSet(X, simulate("franke", X))
y_test = simulate("franke", Xt)

cfg = RunConfig(N=500, seed=3, thin=5, prior=PriorSpec("exponential", mean=5.0))
report = run_ta2s2(train, cfg)
samples, _ = report.thinned()
print(f"{len(report.levels)} levels, {len(samples)} samples kept for scoring")

# %%
mixes = predictive_mixtures(samples, train, Xt)
theta, _ = map_estimate(report.points, report.H)
mu_map, s2_map, _ = component_predictions(theta[None, :], train, Xt)

crps_mix = np.mean([crps_mixture(m, y) for m, y in zip(mixes, y_test)])
crps_map = np.mean([crps_gaussian(m, s, y) for m, s, y in zip(mu_map[0], s2_map[0], y_test)])
print(f"mean CRPS  mixture {crps_mix:.5f}  MAP {crps_map:.5f}")
print(f"RMSE       mixture {rmse([mixture_moments(m)[0] for m in mixes], y_test):.5f}"
      f"  MAP {rmse(mu_map[0], y_test):.5f}")
