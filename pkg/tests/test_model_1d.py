"""1D walk model: sampler, densities, perturbation kernel, objective."""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import ndtr

from lastparticle.model_1d import (Kernel1DParams, Model1D, Model1DParams,
                                   chain_spec_1d, kernel_chain_spec_1d,
                                   log_kernel_pdf_1d, log_pdf_1d, objective_1d,
                                   sample_perturbed_1d, sample_trajectory_1d)
from lastparticle.path_space import Trajectory, log_pdf_absorbed_chain

FLAT = Model1DParams(lower=-10.0, upper=1.0, sigma2=1.0, p_absorb=0.0)
DEEP = Model1DParams(lower=-15.0, upper=1.0, sigma2=1.0, p_absorb=0.45)
K_FLAT = Kernel1DParams(sigma2_tilde=0.01, q_flip=0.0)
K_DEEP = Kernel1DParams(sigma2_tilde=0.01, q_flip=0.2)


def log_phi(mean, var, v):
    return -0.5 * (v - mean) ** 2 / var - 0.5 * math.log(2 * math.pi * var)


class TestParams:
    def test_source_must_sit_inside(self):
        with pytest.raises(ValueError):
            Model1DParams(lower=-1.0, upper=1.0, sigma2=1.0, p_absorb=0.0,
                          source=2.0)

    def test_p_absorb_below_one(self):
        with pytest.raises(ValueError):
            Model1DParams(lower=-1.0, upper=1.0, sigma2=1.0, p_absorb=1.0)

    def test_variances_positive(self):
        with pytest.raises(ValueError):
            Model1DParams(lower=-1.0, upper=1.0, sigma2=0.0, p_absorb=0.0)
        with pytest.raises(ValueError):
            Kernel1DParams(sigma2_tilde=0.0, q_flip=0.0)

    def test_flip_requires_absorption(self):
        # a flip probability makes no sense when the model never absorbs inside
        with pytest.raises(ValueError):
            Model1D(FLAT, Kernel1DParams(sigma2_tilde=0.01, q_flip=0.2))


class TestObjective:
    def test_hand_values(self):
        deep = Model1DParams(lower=-15.0, upper=1.0, sigma2=1.0, p_absorb=0.45)
        assert objective_1d(deep, Trajectory([0.5, -0.3, -12.0])) == -3.0
        assert objective_1d(FLAT, Trajectory([-10.0])) == 0.0
        assert objective_1d(FLAT, Trajectory([0.3, -12.0])) == 2.0


class TestSampler:
    def test_near_certain_first_collision_absorption(self):
        params = Model1DParams(lower=-10.0, upper=1.0, sigma2=1.0,
                               p_absorb=0.999999)
        rng = np.random.default_rng(0)
        lengths = [len(sample_trajectory_1d(params, rng)) for _ in range(2000)]
        assert np.mean(np.asarray(lengths) == 1) > 0.999

    def test_moderate_event_rate(self):
        # P(min <= -10) for the flip-free walk, one hundred thousand samples
        rng = np.random.default_rng(1)
        hits = 0
        n = 100_000
        for _ in range(n):
            t = sample_trajectory_1d(FLAT, rng)
            hits += t.points[:, 0].min() <= FLAT.lower
        assert hits / n == pytest.approx(0.13, abs=0.004)

    def test_all_points_from_source_walk(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            t = sample_trajectory_1d(FLAT, rng)
            pts = t.points[:, 0]
            # every non-terminal point is interior, P=0 forces exterior end
            assert np.all((pts[:-1] > FLAT.lower) & (pts[:-1] < FLAT.upper))
            assert pts[-1] <= FLAT.lower or pts[-1] >= FLAT.upper


class TestLogPdf:
    def test_single_exterior_point(self):
        got = log_pdf_1d(FLAT, Trajectory([2.0]))
        assert got == pytest.approx(-2.0 - 0.5 * math.log(2 * math.pi), abs=1e-12)
        assert got == pytest.approx(-2.918939, abs=1e-6)

    def test_interior_terminal_point_impossible_without_absorption(self):
        assert log_pdf_1d(FLAT, Trajectory([0.5])) == -math.inf

    def test_two_factor_hand_value(self):
        got = log_pdf_1d(DEEP, Trajectory([0.5, 3.0]))
        want = log_phi(0.0, 1.0, 0.5) + math.log(1 - 0.45) + log_phi(0.5, 1.0, 3.0)
        assert got == pytest.approx(want, abs=1e-12)
        assert got == pytest.approx(-5.6857141, abs=1e-7)
        assert got == pytest.approx(-5.685688, abs=5e-5)

    def test_interior_terminal_with_absorption_weighs_p(self):
        got = log_pdf_1d(DEEP, Trajectory([0.5]))
        assert got == pytest.approx(log_phi(0.0, 1.0, 0.5) + math.log(0.45),
                                    abs=1e-12)

    def test_mid_path_exterior_point_impossible(self):
        assert log_pdf_1d(DEEP, Trajectory([3.0, 0.5])) == -math.inf

    def test_matches_reference_composer(self):
        rng = np.random.default_rng(3)
        for params in (FLAT, DEEP):
            spec = chain_spec_1d(params)
            for _ in range(100):
                x = sample_trajectory_1d(params, rng)
                fast = log_pdf_1d(params, x)
                slow = log_pdf_absorbed_chain(spec, x)
                assert fast == pytest.approx(slow, rel=1e-12)

    def test_sampled_paths_have_finite_density(self):
        rng = np.random.default_rng(4)
        for params in (FLAT, DEEP):
            for _ in range(300):
                x = sample_trajectory_1d(params, rng)
                assert log_pdf_1d(params, x) > -math.inf


class TestPerturbedSampler:
    def test_degenerate_variance_concentrates_on_history(self):
        tiny = Kernel1DParams(sigma2_tilde=1e-12, q_flip=0.0)
        rng = np.random.default_rng(5)
        x = sample_trajectory_1d(FLAT, rng)
        while len(x) < 3:
            x = sample_trajectory_1d(FLAT, rng)
        for _ in range(50):
            y = sample_perturbed_1d(FLAT, tiny, x, rng)
            assert len(y) == len(x)
            assert np.allclose(y.points, x.points, atol=1e-4)

    def test_single_step_trace_outside_domain(self):
        # exterior length-1 history: y1 ~ N(x1, var); exterior y1 ends it
        x = Trajectory([4.0])
        rng = np.random.default_rng(6)
        ys = [sample_perturbed_1d(FLAT, K_FLAT, x, rng) for _ in range(500)]
        assert all(len(y) == 1 for y in ys)
        first = np.array([y.points[0, 0] for y in ys])
        assert first.mean() == pytest.approx(4.0, abs=0.02)
        assert first.std() == pytest.approx(0.1, rel=0.15)

    def test_perturbed_paths_have_finite_kernel_density(self):
        rng = np.random.default_rng(7)
        for params, kparams in ((FLAT, K_FLAT), (DEEP, K_DEEP)):
            for _ in range(200):
                x = sample_trajectory_1d(params, rng)
                y = sample_perturbed_1d(params, kparams, x, rng)
                assert log_kernel_pdf_1d(params, kparams, x, y) > -math.inf
                assert log_pdf_1d(params, y) > -math.inf

    def test_length_distribution_against_integrated_kernel(self):
        # empirical P(len(y) = k | x) against quadrature of the kernel pdf
        rng = np.random.default_rng(8)
        x = sample_trajectory_1d(DEEP, rng)
        while len(x) < 3:
            x = sample_trajectory_1d(DEEP, rng)
        xs = x.points[:, 0]
        A, B, st = DEEP.lower, DEEP.upper, math.sqrt(K_DEEP.sigma2_tilde)
        Q = K_DEEP.q_flip
        mu1 = xs[0]
        # exact masses for absorption at step 1 and 2 (history continues)
        m1 = ndtr((A - mu1) / st) + 1 - ndtr((B - mu1) / st) \
            + Q * (ndtr((B - mu1) / st) - ndtr((A - mu1) / st))
        d2 = xs[1] - xs[0]

        def f2(u):
            mu2 = u + d2
            t2 = ndtr((A - mu2) / st) + 1 - ndtr((B - mu2) / st) \
                + Q * (ndtr((B - mu2) / st) - ndtr((A - mu2) / st))
            return math.exp(log_phi(mu1, st ** 2, u)) * (1 - Q) * t2

        m2 = quad(f2, A, B, epsabs=1e-13)[0]
        n = 100_000
        lens = np.array([len(sample_perturbed_1d(DEEP, K_DEEP, x, rng))
                         for _ in range(n)])
        for k, mass in ((1, m1), (2, m2)):
            emp = float(np.mean(lens == k))
            sd = math.sqrt(mass * (1 - mass) / n)
            assert abs(emp - mass) <= 3 * sd, (k, emp, mass)


class TestKernelPdf:
    def test_last_point_only_difference_hand_formula(self):
        # m = n, both terminal points exterior, shared prefix
        rng = np.random.default_rng(9)
        x = sample_trajectory_1d(DEEP, rng)
        while len(x) < 3 or not (x.points[-1, 0] <= DEEP.lower
                                 or x.points[-1, 0] >= DEEP.upper):
            x = sample_trajectory_1d(DEEP, rng)
        xs = x.points[:, 0]
        n = len(xs)
        ys = xs.copy()
        ys[-1] = DEEP.upper + 0.5  # still exterior, different value
        y = Trajectory(ys)
        got = log_kernel_pdf_1d(DEEP, K_DEEP, x, y)
        want = 0.0
        prev_y, prev_x = DEEP.source, DEEP.source
        for i in range(n - 1):
            mu = prev_y + xs[i] - prev_x
            want += log_phi(mu, K_DEEP.sigma2_tilde, ys[i]) + math.log(1 - 0.2)
            prev_y, prev_x = ys[i], xs[i]
        want += log_phi(prev_y + xs[n - 1] - prev_x, K_DEEP.sigma2_tilde, ys[-1])
        assert got == pytest.approx(want, rel=1e-12)

    def test_mid_path_exterior_point_is_impossible(self):
        x = Trajectory([-0.5, -1.0, -16.0])
        y = Trajectory([-0.5, 2.0, -16.0])  # survived an exterior point
        assert log_kernel_pdf_1d(DEEP, K_DEEP, x, y) == -math.inf

    def test_matches_reference_composer(self):
        rng = np.random.default_rng(10)
        for params, kparams in ((FLAT, K_FLAT), (DEEP, K_DEEP)):
            for _ in range(100):
                x = sample_trajectory_1d(params, rng)
                y = sample_perturbed_1d(params, kparams, x, rng)
                fast = log_kernel_pdf_1d(params, kparams, x, y)
                slow = log_pdf_absorbed_chain(kernel_chain_spec_1d(params, kparams, x), y)
                assert fast == pytest.approx(slow, rel=1e-12)

    def test_flipfree_reduction_runs_in_validation_suite(self):
        from lastparticle.validation import suite_kernel_reduction
        r = suite_kernel_reduction()
        assert r.passed, r.detail


class TestModelClass:
    def test_hm_block_matches_generic_loop(self):
        from lastparticle.last_particle import hm_conditional_sample
        model = Model1D(DEEP, K_DEEP)
        rng = np.random.default_rng(11)
        x = model.sample(rng)
        t = model.objective(x) - 1.0
        rng_a = np.random.default_rng(12)
        rng_b = np.random.default_rng(12)
        ya, acc_a = model.hm_block(x, t, 40, rng_a)
        yb, acc_b = hm_conditional_sample(model, t, x, 40, rng_b)
        assert ya == yb
        assert acc_a == pytest.approx(acc_b * 40)  # block counts, loop averages

    def test_count_exceedances_matches_python_loop(self):
        model = Model1D(FLAT, K_FLAT)
        rng_fast = np.random.default_rng(13)
        fast = model.count_exceedances(0.0, 5000, rng_fast)
        rng_slow = np.random.default_rng(13)
        slow = sum(model.objective(model.sample(rng_slow)) >= 0.0
                   for _ in range(5000))
        assert fast == slow
