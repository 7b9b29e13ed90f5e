"""Quickstart: estimate a not-so-rare event on the 1D walk.

The chain steps N(x, 1) from 0 and is absorbed on leaving (-10, 1).  The
event is "the walk dips below -10 before leaving at the top", which has
probability about 0.13: large enough to check the splitting estimator
against direct Monte Carlo in seconds.
"""

import numpy as np

from lastparticle import Model1D, Model1DParams, Kernel1DParams
from lastparticle import run_practical, simple_mc

params = Model1DParams(lower=-10.0, upper=1.0, sigma2=1.0, p_absorb=0.0)
kparams = Kernel1DParams(sigma2_tilde=0.01, q_flip=0.0)
model = Model1D(params, kparams)

rng = np.random.default_rng(0)
print("five trajectories from the model:")
for _ in range(5):
    t = model.sample(rng)
    pts = t.points[:, 0]
    print(f"  length {len(t):3d}, min {pts.min():8.3f}, last {pts[-1]:8.3f}")

print("\nsimple Monte Carlo, a million trials:")
mc = simple_mc(model, 1_000_000, 0.0, seed=1)
print(f"  p_tilde = {mc.p_tilde:.5f}  "
      f"binomial 95% CI [{mc.ci_low:.5f}, {mc.ci_high:.5f}]  "
      f"({mc.wall_time:.2f} s)")

print("\nlast-particle method, N=200 particles, T=300 sampler rounds:")
est = run_practical(model, n_particles=200, hm_iterations=300, level=0.0, seed=2)
print(f"  p_hat   = {est.p_hat:.5f}  CI [{est.ci_low:.5f}, {est.ci_high:.5f}]")
print(f"  {est.m} level iterations, mean acceptance "
      f"{est.mean_acceptance:.2f}, {est.wall_time:.2f} s")
