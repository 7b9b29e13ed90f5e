"""Executable validation suites for the whole estimation stack.

Each suite checks one family of invariants against an independent oracle:
closed-form Gaussian integrals and numeric quadrature for the samplers'
bin masses, survival-complement identities for the 2D collision density,
exact binomial enumeration for the Clopper-Pearson interval, algebraic
identities for the Hastings-Metropolis balance, and double-run comparison
for determinism.  ``run_suites`` executes them all (or a selection) and
returns structured pass/fail results; the CLI ``validate`` subcommand is
a thin wrapper around it.

Seeds are fixed constants so every suite is deterministic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtr
from scipy.stats import binom, ncx2

from . import model_1d, model_2d
from .analytic import AnalyticModel
from .baseline import clopper_pearson, simple_mc, vlmc
from .harness import ExperimentConfig, run_experiment
from .last_particle import confidence_interval, run_ideal, run_practical
from .model_1d import Kernel1DParams, Model1D, Model1DParams
from .model_2d import Kernel2DParams, Model2D, Model2DParams, log_q_2d
from .path_space import Trajectory

__all__ = ["SuiteResult", "SUITES", "run_suites"]


@dataclass(frozen=True)
class SuiteResult:
    key: str
    name: str
    passed: bool
    detail: str


# parameter sets exercised throughout: a flip-free configuration and one
# with in-domain absorption and kernel flips, plus the 2D defaults
_P1_FLAT = Model1DParams(lower=-10.0, upper=1.0, sigma2=1.0, p_absorb=0.0)
_K1_FLAT = Kernel1DParams(sigma2_tilde=0.01, q_flip=0.0)
_P1_DEEP = Model1DParams(lower=-15.0, upper=1.0, sigma2=1.0, p_absorb=0.45)
_K1_DEEP = Kernel1DParams(sigma2_tilde=0.01, q_flip=0.2)
_P2 = Model2DParams(L=10.0, l=2.0, l_d=0.5, d_x=3.0, s_x=3.0,
                    lambda_w=0.2, lambda_p=2.0, P_w=0.2, P_p=0.5)
_K2 = Kernel2DParams(sigma2_tilde=0.25, Q_w=0.05, Q_p=0.1)


# --- (a) detailed balance ----------------------------------------------------

def _balance_worst(model, sampler_pairs, n_pairs: int) -> tuple[float, int]:
    worst = 0.0
    used = 0
    for x, y in sampler_pairs(n_pairs):
        fx, fy = model.log_pdf(x), model.log_pdf(y)
        kxy, kyx = model.log_kernel_pdf(x, y), model.log_kernel_pdf(y, x)
        if not all(np.isfinite(v) for v in (fx, fy, kxy, kyx)):
            continue
        log_r = fy + kyx - (fx + kxy)
        lhs = fx + kxy + min(0.0, log_r)
        rhs = fy + kyx + min(0.0, -log_r)
        worst = max(worst, abs(lhs - rhs))
        used += 1
    return worst, used


def suite_detailed_balance() -> SuiteResult:
    """Metropolis balance identity f(x)k(x,y)a(x,y) = f(y)k(y,x)a(y,x)."""
    rng = np.random.default_rng(101)
    m1 = Model1D(_P1_DEEP, _K1_DEEP)
    m2 = Model2D(_P2, _K2)

    def pairs(model):
        def gen(n):
            for _ in range(n):
                x = model.sample(rng)
                yield x, model.sample_perturbed(x, rng)
        return gen

    w1, n1 = _balance_worst(m1, pairs(m1), 1000)
    w2, n2 = _balance_worst(m2, pairs(m2), 1000)
    ok = w1 <= 1e-9 and w2 <= 1e-9 and n1 >= 900 and n2 >= 900
    return SuiteResult("a", "detailed_balance", ok,
                       f"worst 1D {w1:.2e} ({n1} pairs), 2D {w2:.2e} ({n2} pairs)")


# --- (b) 2D collision-density normalization ----------------------------------

def _ray_breaks(params: Model2DParams, origin: np.ndarray, u: np.ndarray,
                r_max: float) -> list[tuple[float, float, float, float]]:
    """Pieces (lo, hi, rate, absorb) of [0, r_max] along origin + r*u.

    ``rate`` is the collision rate of the medium on the piece and
    ``absorb`` the model absorption probability of a collision there.
    """
    half = params.L / 2
    found, s1, s2 = model_2d._circle_roots(params.l, origin[0], origin[1],
                                           u[0], u[1])
    inside = origin[0] ** 2 + origin[1] ** 2 <= params.l ** 2
    cuts = {0.0, r_max}
    if found:
        for s in (s1, s2):
            if 0.0 < s < r_max:
                cuts.add(s)
    # first exit from the square box
    r_box = math.inf
    for coord, direction in ((origin[0], u[0]), (origin[1], u[1])):
        if direction > 0:
            r_box = min(r_box, (half - coord) / direction)
        elif direction < 0:
            r_box = min(r_box, (-half - coord) / direction)
    if 0.0 < r_box < r_max:
        cuts.add(r_box)
    edges = sorted(cuts)
    pieces = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (lo + hi)
        if inside:
            in_disc = mid < s2 if found else True
        else:
            in_disc = found and s1 < mid < s2
        rate = params.lambda_p if in_disc else params.lambda_w
        if mid > r_box:
            absorb = 1.0
        elif in_disc:
            absorb = params.P_p
        else:
            absorb = params.P_w
        pieces.append((lo, hi, rate, absorb))
    return pieces


def _ray_survival(pieces, r: float) -> float:
    """exp(-optical depth) from 0 to r along the pieced ray."""
    tau = 0.0
    for lo, hi, rate, _ in pieces:
        if r <= lo:
            break
        tau += rate * (min(r, hi) - lo)
    return math.exp(-tau)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def suite_q_normalization() -> SuiteResult:
    """Numeric integral of the collision density against its survival identity."""
    rng = np.random.default_rng(202)
    n_theta = 384
    thetas = (np.arange(n_theta) + 0.5) * (2 * math.pi / n_theta)
    origins = []
    while len(origins) < 10:  # water origins inside the box
        pt = rng.uniform(-4.5, 4.5, size=2)
        if pt[0] ** 2 + pt[1] ** 2 > (_P2.l + 0.05) ** 2:
            origins.append(pt)
    while len(origins) < 20:  # poison origins
        pt = rng.uniform(-_P2.l, _P2.l, size=2)
        if pt[0] ** 2 + pt[1] ** 2 < (_P2.l - 0.05) ** 2:
            origins.append(pt)
    r_max = 60.0  # lambda_w * r_max = 12: truncation loss under 1e-5
    worst = 0.0
    lowest_capture = 1.0
    for origin in origins:
        total = 0.0
        captured = 0.0
        for th in thetas:
            u = np.array([math.cos(th), math.sin(th)])
            pieces = _ray_breaks(_P2, origin, u, r_max)
            for lo, hi, _, _ in pieces:
                mid = 0.5 * (hi - lo) * _GL_NODES + 0.5 * (hi + lo)
                w = 0.5 * (hi - lo) * _GL_WEIGHTS
                for r, wr in zip(mid, w):
                    y = origin + r * u
                    total += wr * r * math.exp(
                        model_2d._log_q(_P2.l, _P2.lambda_w, _P2.lambda_p,
                                        origin[0], origin[1], y[0], y[1]))
            captured += 1.0 - _ray_survival(pieces, r_max)
        total *= 2 * math.pi / n_theta
        captured /= n_theta
        worst = max(worst, abs(total - captured))
        lowest_capture = min(lowest_capture, captured)
        if abs(total - captured) > 1e-3:
            return SuiteResult("b", "q_normalization", False,
                               f"origin {origin}: integral {total:.6f} vs "
                               f"captured {captured:.6f}")
    ok = lowest_capture > 0.999
    return SuiteResult("b", "q_normalization", ok,
                       f"20 origins, worst |integral - captured| = {worst:.2e}, "
                       f"captured >= {lowest_capture:.6f}")


# --- (c) geometry -------------------------------------------------------------

def suite_geometry() -> SuiteResult:
    """Segment/circle intersections against direct quadratic root solving."""
    from .model_2d import segment_sphere_geometry
    center = np.zeros(2)
    radius = 2.0
    h = segment_sphere_geometry(center, radius, np.array([-5.0, 0.0]),
                                np.array([5.0, 0.0]))
    if not (h.intersects and np.allclose(h.c1, [-2, 0], atol=1e-12)
            and np.allclose(h.c2, [2, 0], atol=1e-12)):
        return SuiteResult("c", "geometry", False, "axis traversal failed")
    if segment_sphere_geometry(center, radius, np.array([-5.0, 3.0]),
                               np.array([5.0, 3.0])).intersects:
        return SuiteResult("c", "geometry", False, "high segment should miss")
    h = segment_sphere_geometry(center, radius, np.array([0.0, 0.0]),
                                np.array([5.0, 0.0]))
    if not (h.intersects and np.allclose(h.c, [2, 0], atol=1e-12)):
        return SuiteResult("c", "geometry", False, "radial exit failed")
    rng = np.random.default_rng(303)
    worst = 0.0
    for _ in range(3000):
        v, w = rng.uniform(-6, 6, size=2), rng.uniform(-6, 6, size=2)
        if np.allclose(v, w):
            continue
        hit = segment_sphere_geometry(center, radius, v, w)
        d = w - v
        a = float(d @ d)
        b = 2.0 * float(v @ d)
        c = float(v @ v) - radius ** 2
        disc = b * b - 4 * a * c
        roots = []
        if disc > 0:
            for sgn in (-1.0, 1.0):
                t = (-b + sgn * math.sqrt(disc)) / (2 * a)
                if 0.0 <= t <= 1.0:
                    roots.append(t)
        v_in, w_in = c <= 0, float(w @ w) <= radius ** 2
        expect = len(roots) > 0 and not (v_in and w_in)
        if hit.intersects != expect:
            return SuiteResult("c", "geometry", False,
                               f"flag mismatch for {v}, {w}")
        for pt in (hit.c1, hit.c2, hit.c):
            if pt is None:
                continue
            worst = max(worst, abs(math.hypot(*pt) - radius))
            t = float((pt - v) @ d) / a
            if not -1e-9 <= t <= 1.0 + 1e-9:
                return SuiteResult("c", "geometry", False,
                                   "crossing left the segment")
    ok = worst < 1e-9
    return SuiteResult("c", "geometry", ok, f"worst |crossing radius - l| = {worst:.2e}")


# --- (d) sampler/pdf binning --------------------------------------------------

def _phi(u: float) -> float:
    return math.exp(-0.5 * u * u) / math.sqrt(2 * math.pi)


def _bin_check(counts: dict, masses: dict, n: int) -> tuple[bool, str]:
    worst = 0.0
    for name, mass in masses.items():
        emp = counts.get(name, 0) / n
        sd = math.sqrt(max(mass * (1 - mass), 1e-12) / n)
        z = abs(emp - mass) / sd
        worst = max(worst, z)
        if z > 3.0:
            return False, f"bin {name}: empirical {emp:.5f} vs {mass:.5f} (z={z:.1f})"
    return True, f"worst z = {worst:.2f}"


def _binning_model_1d(params: Model1DParams, seed: int, n_draws: int) -> tuple[bool, str]:
    A, B, sig, P = params.lower, params.upper, math.sqrt(params.sigma2), params.p_absorb
    s0 = params.source

    def below(u):  # terminal mass below A from point u
        return ndtr((A - u) / sig)

    def above(u):
        return 1.0 - ndtr((B - u) / sig)

    def inside(u):
        return ndtr((B - u) / sig) - ndtr((A - u) / sig)

    masses = {"len1_below": below(s0), "len1_above": above(s0)}
    if P > 0:
        masses["len1_inside"] = P * inside(s0)
    edges = np.linspace(A, B, 4)

    def len2_density(u):
        tail = below(u) + above(u) + P * inside(u)
        return _phi((u - s0) / sig) / sig * (1 - P) * tail

    for j, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        masses[f"len2_seg{j}"] = quad(len2_density, a, b, epsabs=1e-12)[0]
    total_len2 = quad(len2_density, A, B, epsabs=1e-12)[0]
    masses["len3plus"] = 1.0 - sum(v for k, v in masses.items()
                                   if k.startswith("len1")) - total_len2
    rng = np.random.default_rng(seed)
    counts: dict = {}
    for _ in range(n_draws):
        t = model_1d.sample_trajectory_1d(params, rng)
        pts = t.points[:, 0]
        if len(pts) == 1:
            v = pts[0]
            key = ("len1_below" if v <= A else
                   "len1_above" if v >= B else "len1_inside")
        elif len(pts) == 2:
            key = f"len2_seg{min(np.searchsorted(edges, pts[0]) - 1, 2)}"
        else:
            key = "len3plus"
        counts[key] = counts.get(key, 0) + 1
    return _bin_check(counts, masses, n_draws)


def _binning_kernel_1d(params: Model1DParams, kparams: Kernel1DParams,
                       seed: int, n_draws: int) -> tuple[bool, str]:
    A, B = params.lower, params.upper
    Q = kparams.q_flip
    st = math.sqrt(kparams.sigma2_tilde)
    rng = np.random.default_rng(seed)
    x = model_1d.sample_trajectory_1d(params, rng)
    while len(x) < 3:
        x = model_1d.sample_trajectory_1d(params, rng)
    xs = x.points[:, 0]
    mu1 = xs[0]  # first proposal mean: y0 + x1 - x0 with y0 = x0 = source
    d2 = xs[1] - xs[0]

    def below(u, s):
        return ndtr((A - u) / s)

    def above(u, s):
        return 1.0 - ndtr((B - u) / s)

    def inside(u, s):
        return ndtr((B - u) / s) - ndtr((A - u) / s)

    # step 1 and 2 are both "history continues" steps since len(x) >= 3
    masses = {
        "len1_out": below(mu1, st) + above(mu1, st),
        "len1_flip": Q * inside(mu1, st),
    }

    def len2_term(u):
        t2 = below(u + d2, st) + above(u + d2, st) + Q * inside(u + d2, st)
        return _phi((u - mu1) / st) / st * (1 - Q) * t2
    masses["len2"] = quad(len2_term, A, B, epsabs=1e-13)[0]
    masses["len3plus"] = 1.0 - masses["len1_out"] - masses["len1_flip"] \
        - masses["len2"]
    counts: dict = {}
    for _ in range(n_draws):
        y = model_1d.sample_perturbed_1d(params, kparams, x, rng)
        m = len(y)
        if m == 1:
            v = y.points[0, 0]
            key = "len1_out" if (v <= A or v >= B) else "len1_flip"
        elif m == 2:
            key = "len2"
        else:
            key = "len3plus"
        counts[key] = counts.get(key, 0) + 1
    if Q == 0:
        masses.pop("len1_flip")  # zero-mass bin when flips are disabled
    return _bin_check(counts, masses, n_draws)


def _first_collision_mass(params: Model2DParams, origin: np.ndarray,
                          th_lo: float, th_hi: float, r_lo: float,
                          r_hi: float, zone: str, n_theta: int = 2048,
                          ) -> float:
    """Mass of {first collision absorbed-or-not in the polar window and zone}.

    ``zone`` restricts to collisions in the named region ("out" = outside
    the box, "S" = the disc, "BS" = box minus disc, "any").  The returned
    value is P(first collision lands there), without absorption weighting.
    """
    acc = 0.0
    step = (th_hi - th_lo) / n_theta
    for k in range(n_theta):
        th = th_lo + (k + 0.5) * step
        u = np.array([math.cos(th), math.sin(th)])
        pieces = _ray_breaks(params, origin, u, max(r_hi, 1e3))
        for lo, hi, rate, absorb in pieces:
            a = max(lo, r_lo)
            b = min(hi, r_hi)
            if b <= a:
                continue
            if zone == "S" and absorb != params.P_p:
                continue
            if zone == "BS" and absorb != params.P_w:
                continue
            if zone == "out" and absorb != 1.0:
                continue
            acc += _ray_survival(pieces, a) - _ray_survival(pieces, b)
    return acc * step / (2 * math.pi)


def _binning_model_2d(params: Model2DParams, seed: int, n_draws: int) -> tuple[bool, str]:
    src = params.source
    inf = 1e3
    # absorbed-at-first-collision masses: weight each zone by its absorption
    m_out = _first_collision_mass(params, src, 0, 2 * math.pi, 0, inf, "out")
    m_s = _first_collision_mass(params, src, 0, 2 * math.pi, 0, inf, "S")
    m_bs_near = _first_collision_mass(params, src, 0, 2 * math.pi, 0, 3.0, "BS")
    m_bs_far = _first_collision_mass(params, src, 0, 2 * math.pi, 3.0, inf, "BS")
    masses = {
        "len1_out": m_out,
        "len1_S": params.P_p * m_s,
        "len1_BS_near": params.P_w * m_bs_near,
        "len1_BS_far": params.P_w * m_bs_far,
    }
    masses["len2plus"] = 1.0 - sum(masses.values())
    rng = np.random.default_rng(seed)
    counts: dict = {}
    half = params.L / 2
    for _ in range(n_draws):
        t = model_2d.sample_trajectory_2d(params, rng)
        if len(t) >= 2:
            key = "len2plus"
        else:
            p = t.points[0]
            r = math.hypot(p[0] - src[0], p[1] - src[1])
            if not (abs(p[0]) <= half and abs(p[1]) <= half):
                key = "len1_out"
            elif p[0] ** 2 + p[1] ** 2 <= params.l ** 2:
                key = "len1_S"
            else:
                key = "len1_BS_near" if r <= 3.0 else "len1_BS_far"
        counts[key] = counts.get(key, 0) + 1
    return _bin_check(counts, masses, n_draws)


def _gauss_zone_masses(params: Model2DParams, center: np.ndarray,
                       sig: float) -> tuple[float, float, float]:
    """(disc, box-minus-disc, outside-box) masses of N(center, sig^2 I)."""
    half = params.L / 2
    m_box = ((ndtr((half - center[0]) / sig) - ndtr((-half - center[0]) / sig))
             * (ndtr((half - center[1]) / sig) - ndtr((-half - center[1]) / sig)))
    nc = (center[0] ** 2 + center[1] ** 2) / sig ** 2
    m_disc = float(ncx2.cdf(params.l ** 2 / sig ** 2, 2, nc))
    return m_disc, max(m_box - m_disc, 0.0), 1.0 - m_box


def _binning_kernel_2d(params: Model2DParams, kparams: Kernel2DParams,
                       seed: int, n_draws: int) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    x = model_2d.sample_trajectory_2d(params, rng)
    while len(x) < 3:
        x = model_2d.sample_trajectory_2d(params, rng)
    xs = x.points
    n = xs.shape[0]
    sig = math.sqrt(kparams.sigma2_tilde)
    in_disc = [float(p[0] ** 2 + p[1] ** 2) <= params.l ** 2 for p in xs]

    def absorb_mean(i: int) -> float:
        # E[a_i(Y_i)] with Y_i ~ N(x_i, sig^2 I): zones weigh table values
        m_s, m_bs, m_out = _gauss_zone_masses(params, xs[i], sig)
        if i <= n - 2:
            a_s = kparams.Q_p if in_disc[i] else params.P_p
            a_bs = params.P_w if in_disc[i] else kparams.Q_w
            half = params.L / 2
            if not (abs(xs[i][0]) <= half and abs(xs[i][1]) <= half):
                a_bs = params.P_w
                a_s = params.P_p
        else:
            half = params.L / 2
            x_in_box = abs(xs[i][0]) <= half and abs(xs[i][1]) <= half
            a_s = (1 - kparams.Q_p) if in_disc[i] else params.P_p
            a_bs = (1 - kparams.Q_w) if (x_in_box and not in_disc[i]) else params.P_w
        return m_s * a_s + m_bs * a_bs + m_out * 1.0

    surv = 1.0
    masses = {}
    for k in range(1, n + 1):
        ak = absorb_mean(k - 1)
        masses[f"len{k}"] = surv * ak
        surv *= 1.0 - ak
    masses["longer"] = surv
    counts: dict = {}
    for _ in range(n_draws):
        y = model_2d.sample_perturbed_2d(params, kparams, x, rng)
        m = len(y)
        key = f"len{m}" if m <= n else "longer"
        counts[key] = counts.get(key, 0) + 1
    return _bin_check(counts, masses, n_draws)


def suite_binning() -> SuiteResult:
    """Sampler frequencies against integrated densities, model and kernel."""
    n = 200_000
    # a wide flip-free kernel, so the early-death bins carry real mass
    wide = Kernel1DParams(sigma2_tilde=1.0, q_flip=0.0)
    parts = {
        "1d_model_flat": _binning_model_1d(_P1_FLAT, 11, n),
        "1d_model_deep": _binning_model_1d(_P1_DEEP, 12, n),
        "1d_kernel_flat": _binning_kernel_1d(_P1_FLAT, wide, 13, n),
        "1d_kernel_deep": _binning_kernel_1d(_P1_DEEP, _K1_DEEP, 14, n),
        "2d_model": _binning_model_2d(_P2, 15, n),
        "2d_kernel": _binning_kernel_2d(_P2, _K2, 16, n),
    }
    bad = {k: d for k, (ok, d) in parts.items() if not ok}
    if bad:
        return SuiteResult("d", "binning", False, "; ".join(
            f"{k}: {v}" for k, v in bad.items()))
    detail = "; ".join(f"{k}: {d}" for k, (_, d) in parts.items())
    return SuiteResult("d", "binning", True, detail)


# --- (e) kernel closed-form reduction at P=0, Q=0 -----------------------------

def _log_kernel_flipfree(params: Model1DParams, kparams: Kernel1DParams,
                         x: Trajectory, y: Trajectory) -> float:
    """Closed-form kernel density in the flip-free case, written directly.

    With no in-domain absorption the kernel's density splits into two
    cases: the perturbed path dies within the history (all proposal
    factors, last point outside) or it outlives it (proposal factors for
    the history, walk factors after).
    """
    A, B = params.lower, params.upper
    s2t, s2 = kparams.sigma2_tilde, params.sigma2
    xs, ys = x.points[:, 0], y.points[:, 0]
    n, m = len(xs), len(ys)

    def lphi(mean, var, v):
        return -0.5 * (v - mean) ** 2 / var - 0.5 * math.log(2 * math.pi * var)

    def in_d(v):
        return A < v < B

    total = 0.0
    prev = params.source
    prev_hist = params.source
    if m <= n:
        for i in range(1, m):
            mu = prev + xs[i - 1] - prev_hist
            if not in_d(ys[i - 1]):
                return -math.inf
            total += lphi(mu, s2t, ys[i - 1])
            prev, prev_hist = ys[i - 1], xs[i - 1]
        total += lphi(prev + xs[m - 1] - prev_hist, s2t, ys[m - 1])
        return total if not in_d(ys[m - 1]) else -math.inf
    for i in range(1, n + 1):
        mu = prev + xs[i - 1] - prev_hist
        if not in_d(ys[i - 1]):
            return -math.inf
        total += lphi(mu, s2t, ys[i - 1])
        prev, prev_hist = ys[i - 1], xs[i - 1]
    for i in range(n + 1, m + 1):
        if i > n + 1 and not in_d(ys[i - 2]):
            return -math.inf
        total += lphi(ys[i - 2], s2, ys[i - 1])
    return total if not in_d(ys[m - 1]) else -math.inf


def suite_kernel_reduction() -> SuiteResult:
    """General kernel density equals the flip-free closed form at P=Q=0."""
    rng = np.random.default_rng(404)
    worst = 0.0
    for _ in range(400):
        x = model_1d.sample_trajectory_1d(_P1_FLAT, rng)
        y = model_1d.sample_perturbed_1d(_P1_FLAT, _K1_FLAT, x, rng)
        a = model_1d.log_kernel_pdf_1d(_P1_FLAT, _K1_FLAT, x, y)
        b = _log_kernel_flipfree(_P1_FLAT, _K1_FLAT, x, y)
        if a == -math.inf and b == -math.inf:
            continue
        worst = max(worst, abs(a - b) / max(abs(b), 1.0))
    ok = worst <= 1e-12
    return SuiteResult("e", "kernel_reduction", ok,
                       f"worst relative gap {worst:.2e} over 400 pairs")


# --- (f) Clopper-Pearson exact coverage ---------------------------------------

def suite_cp_coverage() -> SuiteResult:
    """Exact coverage of the binomial interval by full enumeration."""
    worst = {}
    for p in (0.5, 0.1, 0.01):
        for n in (10, 100):
            cover = 0.0
            for s in range(n + 1):
                low, high = clopper_pearson(s, n, 0.95)
                if low <= p <= high:
                    cover += float(binom.pmf(s, n, p))
            worst[(p, n)] = cover
            if cover < 0.95:
                return SuiteResult("f", "cp_coverage", False,
                                   f"coverage {cover:.4f} < 0.95 at p={p}, n={n}")
    lo = min(worst.values())
    return SuiteResult("f", "cp_coverage", True,
                       f"minimum exact coverage {lo:.4f} over 6 cases")


# --- (g) confidence interval closed-form values --------------------------------

def suite_ci_values() -> SuiteResult:
    """The multiplicative interval against hand-computed values."""
    if confidence_interval(1.0, 200) != (1.0, 1.0):
        return SuiteResult("g", "ci_values", False, "degenerate case broke")
    low, high = confidence_interval(0.13, 200)
    exact = (0.13 * math.exp(-1.96 * math.sqrt(-math.log(0.13) / 200)),
             0.13 * math.exp(+1.96 * math.sqrt(-math.log(0.13) / 200)))
    if abs(low - exact[0]) > 1e-12 or abs(high - exact[1]) > 1e-12:
        return SuiteResult("g", "ci_values", False, "direct evaluation mismatch")
    if not (abs(low - 0.10665) < 1e-3 and abs(high - 0.15846) < 1e-3):
        return SuiteResult("g", "ci_values", False,
                           f"(0.13, 200) gave ({low:.5f}, {high:.5f})")
    lo8, hi8 = confidence_interval(6.6e-8, 200)
    ratio = hi8 / lo8
    want = math.exp(2 * 1.96 * math.sqrt(-math.log(6.6e-8) / 200))
    if abs(ratio - want) > 1e-9 or abs(ratio - 3.0873) > 0.01:
        return SuiteResult("g", "ci_values", False, f"width ratio {ratio:.4f}")
    return SuiteResult("g", "ci_values", True,
                       f"interval ({low:.6f}, {high:.6f}), ratio {ratio:.4f}")


# --- (h) determinism -----------------------------------------------------------

def _strip_walltime(obj):
    if isinstance(obj, dict):
        return {k: _strip_walltime(v) for k, v in obj.items()
                if "wall_time" not in k}
    if isinstance(obj, list):
        return [_strip_walltime(v) for v in obj]
    return obj


def suite_determinism() -> SuiteResult:
    """Identical seeds give identical results, bit for bit, for every driver."""
    m1 = Model1D(_P1_FLAT, _K1_FLAT)
    m2 = Model2D(_P2, _K2)
    runs = [
        lambda: run_practical(m1, 50, 20, 0.0, 7).to_dict(),
        lambda: run_practical(m2, 30, 15, -1.0, 8).to_dict(),
        lambda: run_ideal(AnalyticModel(), 50, AnalyticModel.level_for(1e-3), 9).to_dict(),
        lambda: simple_mc(m1, 200_000, 0.0, 10, n_shards=4).to_dict(),
        lambda: vlmc(m1, 300_000, 0.0, 11, batch_size=100_000).to_dict(),
    ]
    for i, fn in enumerate(runs):
        a, b = _strip_walltime(fn()), _strip_walltime(fn())
        if json.dumps(a, sort_keys=True) != json.dumps(b, sort_keys=True):
            return SuiteResult("h", "determinism", False, f"driver case {i} diverged")
    cfg = ExperimentConfig(model="one_d", method="last_particle", seed=5,
                           n_particles=40, hm_rounds=15, level=0.0,
                           replicates=3, p_ref=0.13)
    ra = _strip_walltime(run_experiment(cfg))
    rb = _strip_walltime(run_experiment(cfg))
    if json.dumps(ra, sort_keys=True) != json.dumps(rb, sort_keys=True):
        return SuiteResult("h", "determinism", False, "experiment report diverged")
    return SuiteResult("h", "determinism", True,
                       "5 drivers and a 3-replicate report, bit-identical")


SUITES = {
    "a": suite_detailed_balance,
    "b": suite_q_normalization,
    "c": suite_geometry,
    "d": suite_binning,
    "e": suite_kernel_reduction,
    "f": suite_cp_coverage,
    "g": suite_ci_values,
    "h": suite_determinism,
}


def run_suites(keys=None) -> list[SuiteResult]:
    """Run the selected suites (all by default) and return their results."""
    selected = list(SUITES) if keys is None else list(keys)
    results = []
    for key in selected:
        if key not in SUITES:
            raise ValueError(f"unknown suite {key!r}; known: {', '.join(SUITES)}")
        results.append(SUITES[key]())
    return results
