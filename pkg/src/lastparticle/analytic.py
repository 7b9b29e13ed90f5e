"""Analytic reference model: a standard normal scalar dressed as a trajectory.

The "trajectory" is a single 1D point X ~ N(0,1) and the objective is X
itself, so P(objective >= l) has the closed form ``ndtr(-l)`` and exact
conditional sampling given X >= t is a one-liner via the inverse survival
function.  This isolates the particle driver from any Hastings-Metropolis
concerns: the ideal driver's distributional guarantees (unbiasedness,
the log-normal limit, the Poisson iteration count) can be validated
against exact truth.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtr, ndtri

from .path_space import Trajectory

__all__ = ["AnalyticModel"]


class AnalyticModel:
    """Standard normal with identity objective and exact conditional sampling."""

    def objective(self, x: Trajectory) -> float:
        return float(x.points[0, 0])

    def log_pdf(self, x: Trajectory) -> float:
        v = float(x.points[0, 0])
        return -0.5 * v * v - 0.5 * float(np.log(2.0 * np.pi))

    def sample(self, rng: np.random.Generator) -> Trajectory:
        return Trajectory(np.array([[rng.normal()]]))

    def sample_conditional(self, threshold: float, rng: np.random.Generator) -> Trajectory:
        # X | X >= t via the survival function: sf(X) = sf(t) * (1 - U)
        u = rng.random()
        tail = ndtr(-threshold)
        v = float(-ndtri(tail * (1.0 - u)))
        return Trajectory(np.array([[max(v, threshold)]]))

    def count_exceedances(self, level: float, n_trials: int,
                          rng: np.random.Generator) -> int:
        hits = 0
        remaining = n_trials
        while remaining > 0:
            n = min(remaining, 10_000_000)
            hits += int(np.count_nonzero(rng.standard_normal(n) >= level))
            remaining -= n
        return hits

    @staticmethod
    def exact_probability(level: float) -> float:
        """P(X >= level) for X ~ N(0,1)."""
        return float(ndtr(-level))

    @staticmethod
    def level_for(p: float) -> float:
        """The level whose exceedance probability is exactly ``p``."""
        if not 0.0 < p < 1.0:
            raise ValueError("p must be in (0, 1)")
        return float(-ndtri(p))
