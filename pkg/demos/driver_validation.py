"""Validate the splitting driver itself, with no path sampler in the way.

On a standard normal "trajectory" of one point, the conditional law
X | X > t is known exactly, so the driver can be run in its ideal form:
every resample is a perfect conditional draw.  The estimator should then
be unbiased with log-variance close to -log(p)/N, and the number of
level iterations minus one should be Poisson(-N log p).
"""

import numpy as np

from lastparticle import AnalyticModel, run_ideal

model = AnalyticModel()
p = 1e-4
level = AnalyticModel.level_for(p)
n_particles = 100
print(f"target p = {p:.1e}  ->  level = {level:.4f}")

estimates, iters = [], []
for k in range(200):
    est = run_ideal(model, n_particles, level, seed=np.random.SeedSequence(
        entropy=99, spawn_key=(k,)))
    estimates.append(est.p_hat)
    iters.append(est.m - 1)
estimates = np.array(estimates)
iters = np.array(iters)

expected_iters = -n_particles * np.log(p)
print(f"mean(p_hat)/p       = {estimates.mean() / p:.4f}   (1 is unbiased)")
print(f"var(log p_hat)      = {np.log(estimates).var(ddof=1):.5f}   "
      f"(-log p / N = {-np.log(p) / n_particles:.5f})")
print(f"mean iterations - 1 = {iters.mean():.1f}   "
      f"(-N log p = {expected_iters:.1f})")
print(f"sd of iterations    = {iters.std(ddof=1):.1f}   "
      f"(Poisson sqrt = {np.sqrt(expected_iters):.1f})")
