"""One-dimensional random walk with in-domain absorption.

The particle starts at ``source``, makes Gaussian increments of variance
``sigma2``, is absorbed at the first collision point outside the open
domain ``(lower, upper)``, and is absorbed with probability ``p_absorb``
at each collision point inside it.  The rare event is the walk dipping
below ``lower`` before absorption, measured by the objective
``lower - min(points)``.

The perturbation kernel re-traces a historical trajectory with Gaussian
noise ``sigma2_tilde`` on its increments, flips the absorption decisions
with probability ``q_flip`` while the history lasts, and continues with
the model dynamics if the perturbed path outlives the history.

Hot operations (sampling, densities, the Hastings-Metropolis inner loop,
Monte Carlo counting) are numba-compiled; ``chain_spec_1d`` and
``kernel_chain_spec_1d`` expose the same densities as reference
:class:`~lastparticle.path_space.AbsorbedChainSpec` instantiations for the
generic composer, and the test suite pins the compiled paths to them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .path_space import AbsorbedChainSpec, Trajectory

__all__ = [
    "Model1DParams",
    "Kernel1DParams",
    "Model1D",
    "sample_trajectory_1d",
    "objective_1d",
    "log_pdf_1d",
    "sample_perturbed_1d",
    "log_kernel_pdf_1d",
    "chain_spec_1d",
    "kernel_chain_spec_1d",
]

_LOG_2PI = math.log(2.0 * math.pi)

# hard cap on collisions per trajectory; hitting it means the parameters
# make absorption implausibly rare and something is inconsistent
_MAX_STEPS = 1_000_000


@dataclass(frozen=True)
class Model1DParams:
    """Physical parameters of the 1D walk.

    ``lower``/``upper`` bound the open domain of interest, ``sigma2`` is the
    increment variance, ``p_absorb`` the in-domain absorption probability,
    ``source`` the deterministic birth point.
    """

    lower: float
    upper: float
    sigma2: float
    p_absorb: float
    source: float = 0.0

    def __post_init__(self):
        if not self.lower < self.source < self.upper:
            raise ValueError("source must lie strictly inside (lower, upper)")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        if not 0.0 <= self.p_absorb < 1.0:
            raise ValueError("p_absorb must be in [0, 1)")


@dataclass(frozen=True)
class Kernel1DParams:
    """Perturbation parameters: increment noise variance and flip probability."""

    sigma2_tilde: float
    q_flip: float

    def __post_init__(self):
        if not self.sigma2_tilde > 0:
            raise ValueError("sigma2_tilde must be positive")
        if not 0.0 <= self.q_flip < 1.0:
            raise ValueError("q_flip must be in [0, 1)")


def _check_pair(params: Model1DParams, kparams: Kernel1DParams) -> None:
    # a kernel with absorption flips makes no sense for a flip-free model
    if params.p_absorb == 0.0 and kparams.q_flip != 0.0:
        raise ValueError("q_flip must be 0 when p_absorb is 0")


# --- compiled kernels -------------------------------------------------------

@njit(cache=True)
def _log_phi(mean, var, x):
    """Log pdf of N(mean, var) at x."""
    d = x - mean
    return -0.5 * d * d / var - 0.5 * np.log(2.0 * np.pi * var)


@njit(cache=True)
def _in_domain(lower, upper, v):
    return lower < v < upper


@njit(cache=True)
def _objective_pts(lower, pts):
    m = pts[0]
    for i in range(1, pts.size):
        if pts[i] < m:
            m = pts[i]
    return lower - m


@njit(cache=True)
def _sample_walk(lower, upper, sigma, p_absorb, start, rng):
    """Collision points of the unconditional walk started at ``start``."""
    cap = 16
    buf = np.empty(cap)
    n = 0
    cur = start
    while True:
        cur = rng.normal(cur, sigma)
        if n == cap:
            cap *= 2
            nb = np.empty(cap)
            nb[:n] = buf
            buf = nb
        buf[n] = cur
        n += 1
        if not _in_domain(lower, upper, cur):
            break
        # draw the absorption decision at every in-domain collision
        if rng.random() < p_absorb:
            break
        if n >= _MAX_STEPS:
            raise RuntimeError("walk exceeded the maximum trajectory length")
    return buf[:n].copy()


@njit(cache=True)
def _log_pdf(lower, upper, sigma2, p_absorb, source, pts):
    n = pts.size
    total = 0.0
    prev = source
    for i in range(n):
        if i >= 1:
            # survival factor of the previous collision
            if not _in_domain(lower, upper, prev):
                return -np.inf
            total += np.log1p(-p_absorb)
        total += _log_phi(prev, sigma2, pts[i])
        prev = pts[i]
    if _in_domain(lower, upper, prev):
        if p_absorb <= 0.0:
            return -np.inf
        total += np.log(p_absorb)
    return total


@njit(cache=True)
def _sample_perturbed(lower, upper, sigma, p_absorb, sig_t, q_flip, source, x, rng):
    n = x.size
    buf = np.empty(n)
    y_prev = source
    x_prev = source
    # steps 1 .. n-1: shifted-increment proposals with flip absorption
    for i in range(1, n):
        y = rng.normal(y_prev + x[i - 1] - x_prev, sig_t)
        buf[i - 1] = y
        if not _in_domain(lower, upper, y):
            return buf[:i].copy()
        if rng.random() < q_flip:
            return buf[:i].copy()
        y_prev = y
        x_prev = x[i - 1]
    # terminal step n
    y = rng.normal(y_prev + x[n - 1] - x_prev, sig_t)
    buf[n - 1] = y
    if not _in_domain(lower, upper, y):
        return buf.copy()
    p_term = (1.0 - q_flip) if _in_domain(lower, upper, x[n - 1]) else p_absorb
    if p_term >= 1.0:
        return buf.copy()
    if rng.random() < p_term:
        return buf.copy()
    # perturbed path outlives the history: continue with the model dynamics
    tail = _sample_walk(lower, upper, sigma, p_absorb, y, rng)
    return np.concatenate((buf, tail))


@njit(cache=True)
def _log_kernel(lower, upper, sigma2, p_absorb, sig2_t, q_flip, source, x, y):
    """Log conditional density of trajectory y given historical trajectory x."""
    n = x.size
    m = y.size
    total = 0.0
    y_prev = source
    for i in range(1, m + 1):
        yi = y[i - 1]
        if i >= 2:
            # survival factor 1 - a_{i-1}(y_{i-1})
            v = y[i - 2]
            if not _in_domain(lower, upper, v):
                return -np.inf
            if i - 1 <= n - 1:
                s = 1.0 - q_flip
            elif i - 1 == n:
                s = q_flip if _in_domain(lower, upper, x[n - 1]) else 1.0 - p_absorb
            else:
                s = 1.0 - p_absorb
            if s <= 0.0:
                return -np.inf
            total += np.log(s)
        if i <= n:
            x_prev = source if i == 1 else x[i - 2]
            total += _log_phi(y_prev + x[i - 1] - x_prev, sig2_t, yi)
        else:
            total += _log_phi(y_prev, sigma2, yi)
        y_prev = yi
    # terminal factor a_m(y_m)
    ym = y[m - 1]
    if not _in_domain(lower, upper, ym):
        return total
    if m <= n - 1:
        a = q_flip
    elif m == n:
        a = (1.0 - q_flip) if _in_domain(lower, upper, x[n - 1]) else p_absorb
    else:
        a = p_absorb
    if a <= 0.0:
        return -np.inf
    return total + np.log(a)


@njit(cache=True)
def _hm_block(lower, upper, sigma, sigma2, p_absorb, sig_t, sig2_t, q_flip,
              source, x0, t, n_steps, rng):
    """T Hastings-Metropolis rounds at threshold t, started from x0.

    Consumes the RNG stream in exactly the same order as the generic
    driver loop so the two are interchangeable draw for draw.
    """
    x = x0
    logf_x = _log_pdf(lower, upper, sigma2, p_absorb, source, x)
    accepted = 0
    for _ in range(n_steps):
        y = _sample_perturbed(lower, upper, sigma, p_absorb, sig_t, q_flip, source, x, rng)
        if _objective_pts(lower, y) < t:
            continue
        logf_y = _log_pdf(lower, upper, sigma2, p_absorb, source, y)
        den = logf_x + _log_kernel(lower, upper, sigma2, p_absorb, sig2_t, q_flip, source, x, y)
        num = logf_y + _log_kernel(lower, upper, sigma2, p_absorb, sig2_t, q_flip, source, y, x)
        if den == -np.inf:
            take = True
        elif num == -np.inf:
            take = False
        else:
            log_r = num - den
            take = np.log(rng.random()) < min(0.0, log_r)
        if take:
            x = y
            logf_x = logf_y
            accepted += 1
    return x, accepted


@njit(cache=True)
def _count_exceedances(lower, upper, sigma, p_absorb, source, level, n_trials, rng):
    """Number of unconditional walks whose objective reaches ``level``."""
    hits = 0
    for _ in range(n_trials):
        cur = source
        low = np.inf
        while True:
            cur = rng.normal(cur, sigma)
            if cur < low:
                low = cur
            if not _in_domain(lower, upper, cur):
                break
            if rng.random() < p_absorb:
                break
        if lower - low >= level:
            hits += 1
    return hits


# --- public operations ------------------------------------------------------

def sample_trajectory_1d(params: Model1DParams, rng: np.random.Generator) -> Trajectory:
    """Sample an unconditional trajectory of the 1D walk."""
    pts = _sample_walk(params.lower, params.upper, math.sqrt(params.sigma2),
                       params.p_absorb, params.source, rng)
    return Trajectory(pts)


def objective_1d(params: Model1DParams, x: Trajectory) -> float:
    """Depth past the lower boundary: ``lower - min(points)``."""
    return float(params.lower - x.points[:, 0].min())


def log_pdf_1d(params: Model1DParams, x: Trajectory) -> float:
    """Log-density of a trajectory under the 1D walk's path law."""
    if x.dim != 1:
        raise ValueError("expected a 1D trajectory")
    return float(_log_pdf(params.lower, params.upper, params.sigma2,
                          params.p_absorb, params.source, x.points[:, 0]))


def sample_perturbed_1d(params: Model1DParams, kparams: Kernel1DParams,
                        x: Trajectory, rng: np.random.Generator) -> Trajectory:
    """Sample from the perturbation kernel conditioned on historical ``x``."""
    _check_pair(params, kparams)
    pts = _sample_perturbed(params.lower, params.upper, math.sqrt(params.sigma2),
                            params.p_absorb, math.sqrt(kparams.sigma2_tilde),
                            kparams.q_flip, params.source, x.points[:, 0], rng)
    return Trajectory(pts)


def log_kernel_pdf_1d(params: Model1DParams, kparams: Kernel1DParams,
                      x: Trajectory, y: Trajectory) -> float:
    """Log-density of ``y`` under the kernel conditioned on historical ``x``."""
    _check_pair(params, kparams)
    if x.dim != 1 or y.dim != 1:
        raise ValueError("expected 1D trajectories")
    return float(_log_kernel(params.lower, params.upper, params.sigma2,
                             params.p_absorb, kparams.sigma2_tilde, kparams.q_flip,
                             params.source, x.points[:, 0], y.points[:, 0]))


def chain_spec_1d(params: Model1DParams) -> AbsorbedChainSpec:
    """The 1D walk as a generic absorbed-chain spec (reference composer route)."""
    lower, upper, sigma2, p = params.lower, params.upper, params.sigma2, params.p_absorb

    def absorption_prob(i: int, point: np.ndarray) -> float:
        v = float(point[0])
        return p if lower < v < upper else 1.0

    def log_transition(i: int, prev: np.ndarray, point: np.ndarray) -> float:
        d = float(point[0]) - float(prev[0])
        return -0.5 * d * d / sigma2 - 0.5 * math.log(2.0 * math.pi * sigma2)

    return AbsorbedChainSpec(np.array([params.source]), absorption_prob, log_transition)


def kernel_chain_spec_1d(params: Model1DParams, kparams: Kernel1DParams,
                         x: Trajectory) -> AbsorbedChainSpec:
    """The perturbation kernel given ``x`` as a generic absorbed-chain spec."""
    _check_pair(params, kparams)
    lower, upper = params.lower, params.upper
    p, q = params.p_absorb, kparams.q_flip
    sigma2, sig2_t = params.sigma2, kparams.sigma2_tilde
    xs = x.points[:, 0]
    n = xs.size
    hist_in = lower < xs[n - 1] < upper

    def absorption_prob(i: int, point: np.ndarray) -> float:
        v = float(point[0])
        if not lower < v < upper:
            return 1.0
        if i <= n - 1:
            return q
        if i == n:
            return (1.0 - q) if hist_in else p
        return p

    def log_transition(i: int, prev: np.ndarray, point: np.ndarray) -> float:
        if i <= n:
            x_prev = params.source if i == 1 else xs[i - 2]
            mean = float(prev[0]) + xs[i - 1] - x_prev
            var = sig2_t
        else:
            mean = float(prev[0])
            var = sigma2
        d = float(point[0]) - mean
        return -0.5 * d * d / var - 0.5 * math.log(2.0 * math.pi * var)

    return AbsorbedChainSpec(np.array([params.source]), absorption_prob, log_transition)


class Model1D:
    """Bundles the 1D model and kernel parameters behind the driver interface.

    Implements the five tasks the estimation driver needs (objective,
    path log-density, kernel log-density, unconditional sampling,
    perturbed sampling) plus compiled fast paths for the
    Hastings-Metropolis inner loop and Monte Carlo counting.
    """

    def __init__(self, params: Model1DParams, kparams: Kernel1DParams | None = None):
        if kparams is not None:
            _check_pair(params, kparams)
        self.params = params
        self.kparams = kparams

    def _kp(self) -> Kernel1DParams:
        if self.kparams is None:
            raise ValueError("kernel parameters were not provided")
        return self.kparams

    def objective(self, x: Trajectory) -> float:
        return objective_1d(self.params, x)

    def log_pdf(self, x: Trajectory) -> float:
        return log_pdf_1d(self.params, x)

    def log_kernel_pdf(self, x: Trajectory, y: Trajectory) -> float:
        return log_kernel_pdf_1d(self.params, self._kp(), x, y)

    def sample(self, rng: np.random.Generator) -> Trajectory:
        return sample_trajectory_1d(self.params, rng)

    def sample_perturbed(self, x: Trajectory, rng: np.random.Generator) -> Trajectory:
        return sample_perturbed_1d(self.params, self._kp(), x, rng)

    def hm_block(self, x: Trajectory, t: float, n_steps: int,
                 rng: np.random.Generator) -> tuple[Trajectory, int]:
        """Compiled equivalent of ``n_steps`` generic HM rounds (same RNG stream)."""
        p, k = self.params, self._kp()
        pts, accepted = _hm_block(p.lower, p.upper, math.sqrt(p.sigma2), p.sigma2,
                                  p.p_absorb, math.sqrt(k.sigma2_tilde), k.sigma2_tilde,
                                  k.q_flip, p.source, x.points[:, 0], t, n_steps, rng)
        return Trajectory(pts), int(accepted)

    def count_exceedances(self, level: float, n_trials: int,
                          rng: np.random.Generator) -> int:
        """Count unconditional samples with objective >= level (compiled loop)."""
        p = self.params
        return int(_count_exceedances(p.lower, p.upper, math.sqrt(p.sigma2),
                                      p.p_absorb, p.source, level, n_trials, rng))
