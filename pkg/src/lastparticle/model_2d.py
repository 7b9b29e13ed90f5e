"""Two-dimensional monokinetic transport in a box with an absorbing disc.

A particle is born at ``(-s_x, 0)`` inside the closed box ``[-L/2, L/2]^2``
and makes straight exponential flights with a uniformly random direction
per flight.  The plane is split into two media: the closed "poison" disc
``S`` of radius ``l`` around the origin (collision rate ``lambda_p``) and
"water" everywhere else (rate ``lambda_w``).  When a flight crosses the
disc boundary the particle stops at the crossing, switches rate, and
resamples the remaining distance.  At each collision point the particle
is absorbed: surely outside the box, with probability ``P_p`` inside the
disc, ``P_w`` elsewhere in the box.  The rare event is a collision inside
the detector disc of radius ``l_d`` centered at ``(d_x, 0)``, measured by
the objective ``l_d - min_i |x_i - (d_x, 0)|``.

The perturbation kernel re-proposes each collision point as an isotropic
Gaussian centered on the historical point, with absorption probabilities
that keep the perturbed path alive while the history lasts (flip rates
``Q_w``/``Q_p``) and hands over to the model dynamics beyond it.

All hot paths are numba-compiled; ``chain_spec_2d`` and
``kernel_chain_spec_2d`` expose the same densities through the generic
absorbed-chain composer for cross-validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .path_space import AbsorbedChainSpec, Trajectory

__all__ = [
    "Model2DParams",
    "Kernel2DParams",
    "SegmentSphereHit",
    "Model2D",
    "segment_sphere_geometry",
    "sample_jump_2d",
    "log_q_2d",
    "sample_trajectory_2d",
    "log_pdf_2d",
    "perturbed_absorption_prob",
    "sample_perturbed_2d",
    "log_kernel_pdf_2d",
    "objective_2d",
    "chain_spec_2d",
    "kernel_chain_spec_2d",
]

_MAX_STEPS = 1_000_000
# medium changes per flight are geometrically capped at 2 for one convex
# obstacle; anything past this cap means the crossing search went wrong
_MAX_RESAMPLES = 16


@dataclass(frozen=True)
class Model2DParams:
    """Geometry, collision rates, and absorption probabilities."""

    L: float
    l: float
    l_d: float
    d_x: float
    s_x: float
    lambda_w: float
    lambda_p: float
    P_w: float
    P_p: float

    def __post_init__(self):
        if not (self.L > 0 and self.l > 0 and self.l_d > 0):
            raise ValueError("L, l, l_d must be positive")
        if not self.l < self.L / 2:
            raise ValueError("obstacle disc must fit inside the box")
        # tangency (equality) is tolerated: the detector may touch the disc
        if not self.l <= self.d_x - self.l_d:
            raise ValueError("detector disc must not overlap the obstacle disc")
        if not self.d_x + self.l_d < self.L / 2:
            raise ValueError("detector disc must lie inside the box")
        if not 0 < self.s_x < self.L / 2:
            raise ValueError("source must lie inside the box on the negative x-axis")
        if not self.s_x > self.l:
            raise ValueError("source must lie outside the obstacle disc")
        if not (self.lambda_w > 0 and self.lambda_p > 0):
            raise ValueError("collision rates must be positive")
        if not self.lambda_p > self.lambda_w:
            raise ValueError("the obstacle disc must be the denser medium")
        if not (0 <= self.P_w <= 1 and 0 <= self.P_p <= 1):
            raise ValueError("absorption probabilities must be in [0, 1]")

    @property
    def source(self) -> np.ndarray:
        return np.array([-self.s_x, 0.0])

    @property
    def detector_center(self) -> np.ndarray:
        return np.array([self.d_x, 0.0])


@dataclass(frozen=True)
class Kernel2DParams:
    """Perturbation parameters: proposal variance and per-medium flip rates."""

    sigma2_tilde: float
    Q_w: float
    Q_p: float

    def __post_init__(self):
        if not self.sigma2_tilde > 0:
            raise ValueError("sigma2_tilde must be positive")
        if not (0 <= self.Q_w <= 1 and 0 <= self.Q_p <= 1):
            raise ValueError("flip probabilities must be in [0, 1]")


@dataclass(frozen=True)
class SegmentSphereHit:
    """How a segment meets a circle: nothing, one crossing, or two.

    ``c1``/``c2`` are set for a full traversal (both endpoints outside),
    ordered by distance from the segment start; ``c`` is the single
    crossing when exactly one endpoint is inside.
    """

    intersects: bool
    c1: np.ndarray | None = None
    c2: np.ndarray | None = None
    c: np.ndarray | None = None


# --- compiled geometry ------------------------------------------------------

@njit(cache=True)
def _circle_roots(radius, px, py, ux, uy):
    """Arclengths where the ray p + s*u meets the circle |x| = radius.

    Returns (found, s1, s2) with s1 <= s2; found is False for misses and
    for near-tangent grazes (discriminant below tolerance).
    """
    b = px * ux + py * uy
    c0 = px * px + py * py - radius * radius
    disc = b * b - c0
    if disc <= 1e-12 * radius * radius:
        return False, 0.0, 0.0
    sq = np.sqrt(disc)
    return True, -b - sq, -b + sq


@njit(cache=True)
def _in_box(half, px, py):
    return abs(px) <= half and abs(py) <= half


@njit(cache=True)
def _in_disc(radius, px, py):
    return px * px + py * py <= radius * radius


@njit(cache=True)
def _jump(radius, lam_w, lam_p, x0, y0, rng):
    """One flight: direction, exponential legs, medium switches at the disc.

    Returns the landing point and the number of distance resamples
    (medium changes) performed on the way.
    """
    theta = 2.0 * np.pi * rng.random()
    ux = np.cos(theta)
    uy = np.sin(theta)
    px = x0
    py = y0
    inside = _in_disc(radius, px, py)
    resamples = 0
    eps = 1e-12 * radius
    while True:
        rate = lam_p if inside else lam_w
        dist = rng.exponential(1.0 / rate)
        found, s1, s2 = _circle_roots(radius, px, py, ux, uy)
        if inside:
            crossing = found and 0.0 <= s2 < dist
            s_hit = s2
        else:
            crossing = found and eps < s1 < dist
            s_hit = s1
        if not crossing:
            return px + dist * ux, py + dist * uy, resamples
        px += s_hit * ux
        py += s_hit * uy
        inside = not inside
        resamples += 1
        if resamples > _MAX_RESAMPLES:
            raise RuntimeError("flight crossed the disc boundary too many times")


@njit(cache=True)
def _log_q(radius, lam_w, lam_p, xx, xy, yx, yy):
    """Log collision-point density q(x, y): one branch per media configuration."""
    dx = yx - xx
    dy = yy - xy
    r = np.sqrt(dx * dx + dy * dy)
    base = -np.log(2.0 * np.pi * r)
    x_in = _in_disc(radius, xx, xy)
    y_in = _in_disc(radius, yx, yy)
    if x_in and y_in:
        return base + np.log(lam_p) - lam_p * r
    ux = dx / r
    uy = dy / r
    found, s1, s2 = _circle_roots(radius, xx, xy, ux, uy)
    if x_in:
        # leaves the disc at arclength s2, collides in water
        d1 = min(max(s2, 0.0), r) if found else 0.0
        return base - lam_p * d1 + np.log(lam_w) - lam_w * (r - d1)
    if y_in:
        # enters the disc at arclength s1, collides in poison
        d1 = min(max(s1, 0.0), r) if found else r
        return base - lam_w * d1 + np.log(lam_p) - lam_p * (r - d1)
    if found and s1 >= -1e-12 * radius and s2 <= r + 1e-12 * radius:
        # traverses the disc: water legs of total length r - chord
        a = min(max(s1, 0.0), r)
        b = min(max(s2, a), r)
        return base + np.log(lam_w) - lam_w * (r - (b - a)) - lam_p * (b - a)
    return base + np.log(lam_w) - lam_w * r


@njit(cache=True)
def _model_absorb(half, radius, p_w, p_p, px, py):
    if not _in_box(half, px, py):
        return 1.0
    return p_p if _in_disc(radius, px, py) else p_w


@njit(cache=True)
def _absorb_before_n(half, radius, p_w, p_p, q_w, q_p, xx, xy, yx, yy):
    """Absorption at a perturbed point while the history continues."""
    if not _in_box(half, yx, yy):
        return 1.0
    x_s = _in_disc(radius, xx, xy)
    if _in_disc(radius, yx, yy):
        return q_p if x_s else p_p
    if x_s or not _in_box(half, xx, xy):
        return p_w
    return q_w


@njit(cache=True)
def _absorb_at_n(half, radius, p_w, p_p, q_w, q_p, xx, xy, yx, yy):
    """Absorption at the perturbed point matching the history's last point."""
    if not _in_box(half, yx, yy):
        return 1.0
    x_s = _in_disc(radius, xx, xy)
    if _in_disc(radius, yx, yy):
        return (1.0 - q_p) if x_s else p_p
    if x_s or not _in_box(half, xx, xy):
        return p_w
    return 1.0 - q_w


@njit(cache=True)
def _sample_traj(half, radius, lam_w, lam_p, p_w, p_p, sx0, sy0, rng):
    cap = 16
    buf = np.empty((cap, 2))
    n = 0
    px = sx0
    py = sy0
    while True:
        px, py, _ = _jump(radius, lam_w, lam_p, px, py, rng)
        if n == cap:
            cap *= 2
            nb = np.empty((cap, 2))
            nb[:n] = buf[:n]
            buf = nb
        buf[n, 0] = px
        buf[n, 1] = py
        n += 1
        pa = _model_absorb(half, radius, p_w, p_p, px, py)
        if pa >= 1.0:
            break
        if rng.random() < pa:
            break
        if n >= _MAX_STEPS:
            raise RuntimeError("trajectory exceeded the maximum length")
    return buf[:n].copy()


@njit(cache=True)
def _log_pdf(half, radius, lam_w, lam_p, p_w, p_p, sx0, sy0, pts):
    n = pts.shape[0]
    total = 0.0
    px = sx0
    py = sy0
    for i in range(n):
        if i >= 1:
            a_prev = _model_absorb(half, radius, p_w, p_p, px, py)
            if a_prev >= 1.0:
                return -np.inf
            total += np.log1p(-a_prev)
        total += _log_q(radius, lam_w, lam_p, px, py, pts[i, 0], pts[i, 1])
        px = pts[i, 0]
        py = pts[i, 1]
    a_n = _model_absorb(half, radius, p_w, p_p, px, py)
    if a_n <= 0.0:
        return -np.inf
    return total + np.log(a_n)


@njit(cache=True)
def _sample_perturbed(half, radius, lam_w, lam_p, p_w, p_p, q_w, q_p, sig_t,
                      sx0, sy0, xs, rng):
    n = xs.shape[0]
    buf = np.empty((n, 2))
    for i in range(n):
        yx = rng.normal(xs[i, 0], sig_t)
        yy = rng.normal(xs[i, 1], sig_t)
        buf[i, 0] = yx
        buf[i, 1] = yy
        if i <= n - 2:
            pa = _absorb_before_n(half, radius, p_w, p_p, q_w, q_p,
                                  xs[i, 0], xs[i, 1], yx, yy)
        else:
            pa = _absorb_at_n(half, radius, p_w, p_p, q_w, q_p,
                              xs[i, 0], xs[i, 1], yx, yy)
        if pa >= 1.0:
            return buf[:i + 1].copy()
        if rng.random() < pa:
            return buf[:i + 1].copy()
    # outlived the history: continue with the model dynamics
    tail = _sample_traj(half, radius, lam_w, lam_p, p_w, p_p,
                        buf[n - 1, 0], buf[n - 1, 1], rng)
    out = np.empty((n + tail.shape[0], 2))
    out[:n] = buf
    out[n:] = tail
    return out


@njit(cache=True)
def _log_kernel(half, radius, lam_w, lam_p, p_w, p_p, q_w, q_p, sig2_t,
                sx0, sy0, xs, ys):
    n = xs.shape[0]
    m = ys.shape[0]
    total = 0.0
    py_x = sx0
    py_y = sy0
    log_norm = -np.log(2.0 * np.pi * sig2_t)
    for i in range(1, m + 1):
        yx = ys[i - 1, 0]
        yy = ys[i - 1, 1]
        if i >= 2:
            vx = ys[i - 2, 0]
            vy = ys[i - 2, 1]
            if i - 1 <= n - 1:
                a = _absorb_before_n(half, radius, p_w, p_p, q_w, q_p,
                                     xs[i - 2, 0], xs[i - 2, 1], vx, vy)
            elif i - 1 == n:
                a = _absorb_at_n(half, radius, p_w, p_p, q_w, q_p,
                                 xs[n - 1, 0], xs[n - 1, 1], vx, vy)
            else:
                a = _model_absorb(half, radius, p_w, p_p, vx, vy)
            if a >= 1.0:
                return -np.inf
            total += np.log1p(-a)
        if i <= n:
            dx = yx - xs[i - 1, 0]
            dy = yy - xs[i - 1, 1]
            total += log_norm - 0.5 * (dx * dx + dy * dy) / sig2_t
        else:
            total += _log_q(radius, lam_w, lam_p, py_x, py_y, yx, yy)
        py_x = yx
        py_y = yy
    ym_x = ys[m - 1, 0]
    ym_y = ys[m - 1, 1]
    if m <= n - 1:
        a = _absorb_before_n(half, radius, p_w, p_p, q_w, q_p,
                             xs[m - 1, 0], xs[m - 1, 1], ym_x, ym_y)
    elif m == n:
        a = _absorb_at_n(half, radius, p_w, p_p, q_w, q_p,
                         xs[n - 1, 0], xs[n - 1, 1], ym_x, ym_y)
    else:
        a = _model_absorb(half, radius, p_w, p_p, ym_x, ym_y)
    if a <= 0.0:
        return -np.inf
    return total + np.log(a)


@njit(cache=True)
def _objective_pts(l_d, det_x, pts):
    best = np.inf
    for i in range(pts.shape[0]):
        dx = pts[i, 0] - det_x
        dy = pts[i, 1]
        d = np.sqrt(dx * dx + dy * dy)
        if d < best:
            best = d
    return l_d - best


@njit(cache=True)
def _hm_block(half, radius, lam_w, lam_p, p_w, p_p, q_w, q_p, sig_t, sig2_t,
              sx0, sy0, l_d, det_x, x0, t, n_steps, rng):
    """T Hastings-Metropolis rounds at threshold t; same RNG order as the
    generic driver loop."""
    x = x0
    logf_x = _log_pdf(half, radius, lam_w, lam_p, p_w, p_p, sx0, sy0, x)
    accepted = 0
    for _ in range(n_steps):
        y = _sample_perturbed(half, radius, lam_w, lam_p, p_w, p_p, q_w, q_p,
                              sig_t, sx0, sy0, x, rng)
        if _objective_pts(l_d, det_x, y) < t:
            continue
        logf_y = _log_pdf(half, radius, lam_w, lam_p, p_w, p_p, sx0, sy0, y)
        den = logf_x + _log_kernel(half, radius, lam_w, lam_p, p_w, p_p,
                                   q_w, q_p, sig2_t, sx0, sy0, x, y)
        num = logf_y + _log_kernel(half, radius, lam_w, lam_p, p_w, p_p,
                                   q_w, q_p, sig2_t, sx0, sy0, y, x)
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
def _count_exceedances(half, radius, lam_w, lam_p, p_w, p_p, sx0, sy0,
                       l_d, det_x, level, n_trials, rng):
    hits = 0
    for _ in range(n_trials):
        px = sx0
        py = sy0
        best = np.inf
        while True:
            px, py, _ = _jump(radius, lam_w, lam_p, px, py, rng)
            dx = px - det_x
            d = np.sqrt(dx * dx + py * py)
            if d < best:
                best = d
            pa = _model_absorb(half, radius, p_w, p_p, px, py)
            if pa >= 1.0:
                break
            if rng.random() < pa:
                break
        if l_d - best >= level:
            hits += 1
    return hits


@njit(cache=True)
def _max_resamples(radius, lam_w, lam_p, x0, y0, n_jumps, rng):
    worst = 0
    for _ in range(n_jumps):
        _, _, k = _jump(radius, lam_w, lam_p, x0, y0, rng)
        if k > worst:
            worst = k
    return worst


# --- public operations ------------------------------------------------------

def segment_sphere_geometry(center: np.ndarray, radius: float,
                            v: np.ndarray, w: np.ndarray) -> SegmentSphereHit:
    """Intersection record of segment [v, w] with the circle around ``center``.

    Near-tangent grazes count as no intersection; with both endpoints
    outside, crossings are reported only when the full chord lies on the
    segment.
    """
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    d = w - v
    dist = math.hypot(d[0], d[1])
    if dist == 0.0:
        raise ValueError("segment endpoints must be distinct")
    ux, uy = d[0] / dist, d[1] / dist
    pv = v - np.asarray(center, dtype=float)
    found, s1, s2 = _circle_roots(radius, pv[0], pv[1], ux, uy)
    if not found:
        return SegmentSphereHit(intersects=False)
    v_in = pv[0] ** 2 + pv[1] ** 2 <= radius ** 2
    pw = pv + d
    w_in = pw[0] ** 2 + pw[1] ** 2 <= radius ** 2
    u = np.array([ux, uy])
    if v_in and w_in:
        return SegmentSphereHit(intersects=False)
    if v_in or w_in:
        s = s2 if v_in else s1
        s = min(max(s, 0.0), dist)
        return SegmentSphereHit(intersects=True, c=v + s * u)
    eps = 1e-12 * radius
    if s1 >= -eps and s2 <= dist + eps:
        a = min(max(s1, 0.0), dist)
        b = min(max(s2, a), dist)
        return SegmentSphereHit(intersects=True, c1=v + a * u, c2=v + b * u)
    return SegmentSphereHit(intersects=False)


def _point(p) -> np.ndarray:
    a = np.asarray(p, dtype=float).reshape(-1)
    if a.size != 2:
        raise ValueError("expected a 2D point")
    return a


def sample_jump_2d(params: Model2DParams, from_point, rng: np.random.Generator) -> np.ndarray:
    """Sample the next collision point of a flight started at ``from_point``."""
    p = _point(from_point)
    if not _in_box(params.L / 2, p[0], p[1]):
        raise ValueError("flights start inside the box")
    px, py, _ = _jump(params.l, params.lambda_w, params.lambda_p, p[0], p[1], rng)
    return np.array([px, py])


def log_q_2d(params: Model2DParams, x_n, x_np1) -> float:
    """Log density of the next collision point ``x_np1`` given ``x_n``."""
    a = _point(x_n)
    b = _point(x_np1)
    if a[0] == b[0] and a[1] == b[1]:
        raise ValueError("collision-point density is singular at zero distance")
    if not _in_box(params.L / 2, a[0], a[1]):
        raise ValueError("the conditioning point must lie inside the box")
    return float(_log_q(params.l, params.lambda_w, params.lambda_p,
                        a[0], a[1], b[0], b[1]))


def sample_trajectory_2d(params: Model2DParams, rng: np.random.Generator) -> Trajectory:
    """Sample an unconditional trajectory (collision points until absorption)."""
    pts = _sample_traj(params.L / 2, params.l, params.lambda_w, params.lambda_p,
                       params.P_w, params.P_p, -params.s_x, 0.0, rng)
    return Trajectory(pts)


def log_pdf_2d(params: Model2DParams, x: Trajectory) -> float:
    """Log-density of a trajectory under the transport model's path law."""
    if x.dim != 2:
        raise ValueError("expected a 2D trajectory")
    return float(_log_pdf(params.L / 2, params.l, params.lambda_w, params.lambda_p,
                          params.P_w, params.P_p, -params.s_x, 0.0, x.points))


def perturbed_absorption_prob(params: Model2DParams, kparams: Kernel2DParams,
                              step_kind: str, x_i, y_i) -> float:
    """Absorption probability of perturbed point ``y_i`` given historical ``x_i``.

    ``step_kind`` is "before_n" for steps with remaining history and "at_n"
    for the step aligned with the history's final point.
    """
    a = _point(x_i)
    b = _point(y_i)
    args = (params.L / 2, params.l, params.P_w, params.P_p,
            kparams.Q_w, kparams.Q_p, a[0], a[1], b[0], b[1])
    if step_kind == "before_n":
        return float(_absorb_before_n(*args))
    if step_kind == "at_n":
        return float(_absorb_at_n(*args))
    raise ValueError("step_kind must be 'before_n' or 'at_n'")


def sample_perturbed_2d(params: Model2DParams, kparams: Kernel2DParams,
                        x: Trajectory, rng: np.random.Generator) -> Trajectory:
    """Sample from the perturbation kernel conditioned on historical ``x``."""
    if x.dim != 2:
        raise ValueError("expected a 2D trajectory")
    pts = _sample_perturbed(params.L / 2, params.l, params.lambda_w,
                            params.lambda_p, params.P_w, params.P_p,
                            kparams.Q_w, kparams.Q_p,
                            math.sqrt(kparams.sigma2_tilde),
                            -params.s_x, 0.0, x.points, rng)
    return Trajectory(pts)


def log_kernel_pdf_2d(params: Model2DParams, kparams: Kernel2DParams,
                      x: Trajectory, y: Trajectory) -> float:
    """Log-density of ``y`` under the kernel conditioned on historical ``x``."""
    if x.dim != 2 or y.dim != 2:
        raise ValueError("expected 2D trajectories")
    return float(_log_kernel(params.L / 2, params.l, params.lambda_w,
                             params.lambda_p, params.P_w, params.P_p,
                             kparams.Q_w, kparams.Q_p, kparams.sigma2_tilde,
                             -params.s_x, 0.0, x.points, y.points))


def objective_2d(params: Model2DParams, x: Trajectory) -> float:
    """Detector reach: ``l_d`` minus the closest approach to the detector center."""
    return float(_objective_pts(params.l_d, params.d_x, x.points))


def chain_spec_2d(params: Model2DParams) -> AbsorbedChainSpec:
    """The transport model as a generic absorbed-chain spec (reference route)."""
    half, radius = params.L / 2, params.l

    def absorption_prob(i: int, point: np.ndarray) -> float:
        return float(_model_absorb(half, radius, params.P_w, params.P_p,
                                   point[0], point[1]))

    def log_transition(i: int, prev: np.ndarray, point: np.ndarray) -> float:
        return float(_log_q(radius, params.lambda_w, params.lambda_p,
                            prev[0], prev[1], point[0], point[1]))

    return AbsorbedChainSpec(params.source, absorption_prob, log_transition)


def kernel_chain_spec_2d(params: Model2DParams, kparams: Kernel2DParams,
                         x: Trajectory) -> AbsorbedChainSpec:
    """The perturbation kernel given ``x`` as a generic absorbed-chain spec."""
    if x.dim != 2:
        raise ValueError("expected a 2D trajectory")
    half, radius = params.L / 2, params.l
    xs = x.points
    n = xs.shape[0]
    sig2_t = kparams.sigma2_tilde
    log_norm = -math.log(2.0 * math.pi * sig2_t)

    def absorption_prob(i: int, point: np.ndarray) -> float:
        args = (half, radius, params.P_w, params.P_p, kparams.Q_w, kparams.Q_p)
        if i <= n - 1:
            return float(_absorb_before_n(*args, xs[i - 1, 0], xs[i - 1, 1],
                                          point[0], point[1]))
        if i == n:
            return float(_absorb_at_n(*args, xs[n - 1, 0], xs[n - 1, 1],
                                      point[0], point[1]))
        return float(_model_absorb(half, radius, params.P_w, params.P_p,
                                   point[0], point[1]))

    def log_transition(i: int, prev: np.ndarray, point: np.ndarray) -> float:
        if i <= n:
            dx = point[0] - xs[i - 1, 0]
            dy = point[1] - xs[i - 1, 1]
            return log_norm - 0.5 * (dx * dx + dy * dy) / sig2_t
        return float(_log_q(radius, params.lambda_w, params.lambda_p,
                            prev[0], prev[1], point[0], point[1]))

    return AbsorbedChainSpec(params.source, absorption_prob, log_transition)


class Model2D:
    """Bundles the 2D model and kernel parameters behind the driver interface."""

    def __init__(self, params: Model2DParams, kparams: Kernel2DParams | None = None):
        self.params = params
        self.kparams = kparams

    def _kp(self) -> Kernel2DParams:
        if self.kparams is None:
            raise ValueError("kernel parameters were not provided")
        return self.kparams

    def objective(self, x: Trajectory) -> float:
        return objective_2d(self.params, x)

    def log_pdf(self, x: Trajectory) -> float:
        return log_pdf_2d(self.params, x)

    def log_kernel_pdf(self, x: Trajectory, y: Trajectory) -> float:
        return log_kernel_pdf_2d(self.params, self._kp(), x, y)

    def sample(self, rng: np.random.Generator) -> Trajectory:
        return sample_trajectory_2d(self.params, rng)

    def sample_perturbed(self, x: Trajectory, rng: np.random.Generator) -> Trajectory:
        return sample_perturbed_2d(self.params, self._kp(), x, rng)

    def hm_block(self, x: Trajectory, t: float, n_steps: int,
                 rng: np.random.Generator) -> tuple[Trajectory, int]:
        """Compiled equivalent of ``n_steps`` generic HM rounds (same RNG stream)."""
        p, k = self.params, self._kp()
        pts, accepted = _hm_block(p.L / 2, p.l, p.lambda_w, p.lambda_p,
                                  p.P_w, p.P_p, k.Q_w, k.Q_p,
                                  math.sqrt(k.sigma2_tilde), k.sigma2_tilde,
                                  -p.s_x, 0.0, p.l_d, p.d_x,
                                  x.points, t, n_steps, rng)
        return Trajectory(pts), int(accepted)

    def count_exceedances(self, level: float, n_trials: int,
                          rng: np.random.Generator) -> int:
        """Count unconditional samples with objective >= level (compiled loop)."""
        p = self.params
        return int(_count_exceedances(p.L / 2, p.l, p.lambda_w, p.lambda_p,
                                      p.P_w, p.P_p, -p.s_x, 0.0, p.l_d, p.d_x,
                                      level, n_trials, rng))
