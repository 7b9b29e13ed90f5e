"""Acceptance criteria, one test per criterion.

Each test reruns its study at full scale with a frozen seed, prints the
measured numbers (visible under ``pytest -rA``), and asserts the gate.
The shared replication runs live in session fixtures so criteria that
reuse a study (1/2, 5/10, 6, 7) pay for it once.
"""

import numpy as np
import pytest

from lastparticle import (ExperimentConfig, build_model, quality_ratio,
                          run_experiment, run_suites, simple_mc, substream)

CFG_2D_MODERATE = dict(model="two_d", sigma2_tilde=0.05)
CFG_2D_SMALL = dict(model="two_d", l=2.5, lambda_w=2.0, lambda_p=3.0,
                    P_w=0.5, P_p=0.7, sigma2_tilde=0.05)


def _estimates(report):
    return np.array([r["result"]["p_hat"] for r in report["replicates"]])


def _line(num, ok, detail):
    print(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def moderate_1d_t300():
    return run_experiment(ExperimentConfig(model="one_d", method="last_particle",
                                           replicates=100, seed=1, p_ref=0.13))


@pytest.fixture(scope="session")
def moderate_1d_t30():
    return run_experiment(ExperimentConfig(model="one_d", method="last_particle",
                                           hm_rounds=30, replicates=100, seed=1,
                                           p_ref=0.13))


@pytest.fixture(scope="session")
def small_1d():
    return run_experiment(ExperimentConfig(model="one_d", method="last_particle",
                                           lower=-15.0, p_absorb=0.45, q_flip=0.2,
                                           replicates=20, seed=5, p_ref=6.6e-8))


@pytest.fixture(scope="session")
def moderate_2d_mc():
    model = build_model(ExperimentConfig(method="simple_mc", **CFG_2D_MODERATE))
    return simple_mc(model, 10_000_000, 0.0, 2024)


@pytest.fixture(scope="session")
def moderate_2d_lp(moderate_2d_mc):
    return run_experiment(ExperimentConfig(method="last_particle", replicates=50,
                                           seed=6, p_ref=moderate_2d_mc.p_tilde,
                                           **CFG_2D_MODERATE))


@pytest.fixture(scope="session")
def small_2d_lp():
    return run_experiment(ExperimentConfig(method="last_particle", replicates=10,
                                           seed=7, p_ref=1.76e-8, **CFG_2D_SMALL))


@pytest.fixture(scope="session")
def small_2d_mc():
    return run_experiment(ExperimentConfig(method="simple_mc", n_trials=5_000_000,
                                           replicates=50, seed=70, p_ref=1.76e-8,
                                           **CFG_2D_SMALL))


def test_criterion_01_moderate_1d_unbiased_and_covered(moderate_1d_t300):
    s = moderate_1d_t300["summary"]
    bias = abs(s["mean"] - 0.13)
    limit = 3 * s["sd"] / np.sqrt(100)
    cover = s["coverage_fraction"]
    ok = bias <= limit and 0.88 <= cover <= 0.99
    _line(1, ok, f"mean={s['mean']:.5f} |mean-0.13|={bias:.5f} (limit {limit:.5f}), "
                 f"coverage={cover:.2f}")
    assert bias <= limit
    assert 0.88 <= cover <= 0.99


def test_criterion_02_fewer_sampler_rounds_inflate_variance(moderate_1d_t300,
                                                            moderate_1d_t30):
    s300, s30 = moderate_1d_t300["summary"], moderate_1d_t30["summary"]
    ok = (s30["sd"] > s300["sd"]
          and s30["coverage_fraction"] < s300["coverage_fraction"])
    _line(2, ok, f"sd: {s30['sd']:.4f} (T=30) vs {s300['sd']:.4f} (T=300); "
                 f"coverage: {s30['coverage_fraction']:.2f} vs "
                 f"{s300['coverage_fraction']:.2f}")
    assert s30["sd"] > s300["sd"]
    assert s30["coverage_fraction"] < s300["coverage_fraction"]


def test_criterion_03_simple_mc_baseline():
    model = build_model(ExperimentConfig(model="one_d", method="simple_mc"))
    r = simple_mc(model, 1_000_000, 0.0, 3)
    ok = 0.127 <= r.p_tilde <= 0.133
    _line(3, ok, f"p_tilde={r.p_tilde:.6f} in [0.127, 0.133]")
    assert 0.127 <= r.p_tilde <= 0.133


def test_criterion_04_first_collision_absorption():
    model = build_model(ExperimentConfig(model="one_d", method="simple_mc",
                                         lower=-15.0, p_absorb=0.45))
    rng = substream(np.random.SeedSequence(4), 0)
    n = 1_000_000
    ones = sum(1 for _ in range(n) if len(model.sample(rng)) == 1)
    frac = ones / n
    # Gaussian-cdf oracle: P(exit (A,B) at step 1) + P(stay)*P
    ok = abs(frac - 0.537260) <= 0.002
    _line(4, ok, f"P(length=1)={frac:.6f}, oracle 0.537260 +- 0.002")
    assert abs(frac - 0.537260) <= 0.002


def test_criterion_05_small_1d_calibration(small_1d):
    s = small_1d["summary"]
    gm = s["geometric_mean"]
    est = _estimates(small_1d)
    # reference band from a billion-trial binomial interval, widened x/1.5
    lo, hi = 5.1e-8 / 1.5, 8.4e-8 * 1.5
    inside = float(np.mean((est >= lo) & (est <= hi)))
    ok = 6.6e-8 / 2 <= gm <= 6.6e-8 * 2 and inside >= 0.60
    _line(5, ok, f"geomean={gm:.3e} (target 6.6e-8 x/2), "
                 f"{inside:.0%} of replicates in [{lo:.2e}, {hi:.2e}]")
    assert 6.6e-8 / 2 <= gm <= 6.6e-8 * 2
    assert inside >= 0.60


def test_criterion_06_moderate_2d_agrees_with_mc(moderate_2d_mc, moderate_2d_lp):
    p_tilde = moderate_2d_mc.p_tilde
    s = moderate_2d_lp["summary"]
    dev = abs(s["mean"] - p_tilde)
    limit = 3 * s["sd"] / np.sqrt(50)
    cover = s["coverage_fraction"]
    ok = dev <= limit and 0.88 <= cover <= 0.99
    _line(6, ok, f"p_tilde={p_tilde:.4e} ({moderate_2d_mc.successes} hits), "
                 f"mean={s['mean']:.4e}, |diff|={dev:.2e} (limit {limit:.2e}), "
                 f"coverage={cover:.2f}")
    assert dev <= limit
    assert 0.88 <= cover <= 0.99


def test_criterion_07_small_2d_beats_mc(small_2d_lp, small_2d_mc):
    s_lp, s_mc = small_2d_lp["summary"], small_2d_mc["summary"]
    gm = s_lp["geometric_mean"]
    ratio = quality_ratio(s_mc["mean_wall_time"], s_mc["rmse"],
                          s_lp["mean_wall_time"], s_lp["rmse"])
    ok = 1.76e-8 / 2 <= gm <= 1.76e-8 * 2 and ratio >= 3
    _line(7, ok, f"geomean={gm:.3e} (target 1.76e-8 x/2); quality ratio={ratio:.2f} "
                 f"(t_mc={s_mc['mean_wall_time']:.2f}s rmse_mc={s_mc['rmse']:.2e} "
                 f"t_lp={s_lp['mean_wall_time']:.2f}s rmse_lp={s_lp['rmse']:.2e})")
    assert 1.76e-8 / 2 <= gm <= 1.76e-8 * 2
    assert ratio >= 3


def test_criterion_08_ideal_driver_statistics():
    for p, seed in ((1e-3, 8), (1e-6, 80)):
        report = run_experiment(ExperimentConfig(model="analytic", method="ideal",
                                                 n_particles=100, replicates=500,
                                                 seed=seed, p_target=p, p_ref=p))
        est = _estimates(report)
        m_minus_1 = np.array([r["result"]["m"] - 1 for r in report["replicates"]],
                             dtype=float)
        rel = abs(est.mean() / p - 1)
        var_log = np.var(np.log(est), ddof=1)
        var_target = -np.log(p) / 100
        m_target = -100 * np.log(p)
        m_dev = abs(m_minus_1.mean() - m_target)
        m_limit = 3 * np.std(m_minus_1, ddof=1) / np.sqrt(500)
        ok = (rel < 0.05 and 0.8 * var_target <= var_log <= 1.2 * var_target
              and m_dev <= m_limit)
        _line(8, ok, f"p={p}: |mean/p-1|={rel:.4f}, Var(log)={var_log:.4f} "
                     f"(target {var_target:.4f}), mean(m-1) off by {m_dev:.2f} "
                     f"(limit {m_limit:.2f})")
        assert rel < 0.05
        assert 0.8 * var_target <= var_log <= 1.2 * var_target
        assert m_dev <= m_limit


def test_criterion_09_invariant_suites():
    results = run_suites()
    for r in results:
        print(f"  {'PASS' if r.passed else 'FAIL'} ({r.key}) {r.name}: {r.detail}")
    ok = all(r.passed for r in results)
    _line(9, ok, f"{sum(r.passed for r in results)}/{len(results)} suites passed")
    assert ok, [r.key for r in results if not r.passed]


def test_criterion_10_acceptance_rate_decays(small_1d):
    log = small_1d["replicates"][0]["result"]["acceptance_log"]
    rates = np.asarray(log)
    n = len(rates)
    decile = n // 10
    slope = np.polyfit(np.arange(1, n + 1), rates, 1)[0]
    first, last = rates[:decile].mean(), rates[-decile:].mean()
    ok = slope < 0 and last < first / 2
    _line(10, ok, f"slope={slope:.2e} over {n} iterations; "
                  f"decile means {first:.3f} -> {last:.3f}")
    assert slope < 0
    assert last < first / 2
