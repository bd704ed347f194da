"""
The integrated posterior of a GP emulator
=========================================

A small Franke data set, the negative log integrated posterior ``H`` over
the length-scales, and predictions at a few points.
"""

# %%
import numpy as np

from ta2s2.benchmarks import lhs_design, simulate
from ta2s2.gp import (HyperParamPoint, IntegratedPosterior, KernelConfig, PriorSpec,
                      TrainingSet, predictive_moments)

rng = np.random.default_rng(0)
X = lhs_design(20, 2, rng)
ts = TrainingSet(X, simulate("franke", X))

# %%
# ``H`` takes the flat sampling vector ``[log_phi1, log_phi2, z_delta]``.
# Outside the uniform prior box it is infinite.
H = IntegratedPosterior(ts, PriorSpec("uniform_log"), KernelConfig())
for theta in ([-2.0, -2.0, -20.0], [0.0, 0.0, -20.0], [-2.0, 3.0, -20.0], [8.0, 0.0, 0.0]):
    print(f"H{tuple(theta)} = {H(np.array(theta)):.4f}")

# %%
# A coarse grid over the two log length-scales, nugget near its floor.
grid = np.linspace(-6, 4, 41)
values = np.array([[H(np.array([a, b, -25.0])) for b in grid] for a in grid])
i, j = np.unravel_index(np.argmin(values), values.shape)
print(f"grid minimum at log_phi = ({grid[i]:.2f}, {grid[j]:.2f}), H = {values[i, j]:.4f}")

# %%
# Student-t predictive moments at a few fresh points.
hp = HyperParamPoint([grid[i], grid[j]], -25.0)
Xq = lhs_design(5, 2, rng)
mu, s2 = predictive_moments(hp, ts, Xq)
for x, m, v, y in zip(Xq, mu, s2, simulate("franke", Xq)):
    print(f"x = {np.round(x, 3)}  mean {m:+.4f}  sd {np.sqrt(v):.4f}  truth {y:+.4f}")
