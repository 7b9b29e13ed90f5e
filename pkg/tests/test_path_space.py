"""Trajectory data model and the generic absorbed-chain density composer."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lastparticle.path_space import (AbsorbedChainSpec, Trajectory,
                                     load_trajectories, log_pdf_absorbed_chain,
                                     read_trajectories_csv, save_trajectories,
                                     trajectory_from_line, trajectory_to_line,
                                     write_trajectories_csv)

LOG_PHI_0_1_2 = -2.0 - 0.5 * math.log(2 * math.pi)  # log N(0,1) density at 2


def walk_spec(lower=-10.0, upper=1.0):
    """1D unit-variance walk from 0, absorbed surely outside (lower, upper)."""

    def absorb(i, y):
        return 0.0 if lower < y[0] < upper else 1.0

    def log_q(i, prev, y):
        return -0.5 * (y[0] - prev[0]) ** 2 - 0.5 * math.log(2 * math.pi)

    return AbsorbedChainSpec(source=np.zeros(1), absorption_prob=absorb,
                             log_transition_density=log_q)


class TestTrajectory:
    def test_one_dim_input_is_reshaped(self):
        t = Trajectory([1.0, 2.0, 3.0])
        assert t.points.shape == (3, 1)
        assert t.dim == 1 and t.length == 3 and len(t) == 3

    def test_points_are_read_only(self):
        t = Trajectory([[0.0, 1.0]])
        with pytest.raises(ValueError):
            t.points[0, 0] = 5.0

    def test_rejects_empty(self):
        with pytest.raises(ValueError, match="at least"):
            Trajectory(np.empty((0, 1)))

    def test_rejects_bad_dimension(self):
        with pytest.raises(ValueError, match="dimension"):
            Trajectory(np.zeros((2, 3)))
        with pytest.raises(ValueError, match="array"):
            Trajectory(np.zeros((2, 2, 2)))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError, match="finite"):
            Trajectory([1.0, math.inf])
        with pytest.raises(ValueError, match="finite"):
            Trajectory([[0.0, math.nan]])

    def test_equality_and_hash(self):
        a = Trajectory([[1.0], [2.0]])
        b = Trajectory([1.0, 2.0])
        c = Trajectory([1.0, 2.5])
        assert a == b and hash(a) == hash(b)
        assert a != c
        assert a != "not a trajectory"


class TestComposer:
    def test_single_point_outside_domain(self):
        # absorbed at the first collision: log f = log phi(0,1,2) since a1 = 1
        got = log_pdf_absorbed_chain(walk_spec(), Trajectory([2.0]))
        assert got == pytest.approx(LOG_PHI_0_1_2, abs=1e-12)
        assert got == pytest.approx(-2.918939, abs=1e-6)

    def test_zero_terminal_absorption_gives_minus_inf(self):
        # point inside the domain: a_1 = 0 kills the density exactly
        assert log_pdf_absorbed_chain(walk_spec(), Trajectory([0.5])) == -math.inf

    def test_certain_absorption_collapses_to_transition(self):
        spec = AbsorbedChainSpec(
            source=np.zeros(1),
            absorption_prob=lambda i, y: 1.0,
            log_transition_density=lambda i, prev, y: -0.5 * (y[0] - prev[0]) ** 2
            - 0.5 * math.log(2 * math.pi))
        got = log_pdf_absorbed_chain(spec, Trajectory([2.0]))
        assert got == pytest.approx(LOG_PHI_0_1_2, abs=1e-12)
        # total mass over length-1 trajectories is then the full Gaussian: 1
        from scipy.integrate import quad
        mass = quad(lambda v: math.exp(
            log_pdf_absorbed_chain(spec, Trajectory([v]))), -10, 10)[0]
        assert mass == pytest.approx(1.0, abs=1e-9)

    def test_intermediate_certain_absorption_gives_minus_inf(self):
        # second collision exists although the first absorbed surely
        got = log_pdf_absorbed_chain(walk_spec(), Trajectory([2.0, 3.0]))
        assert got == -math.inf

    def test_two_step_hand_value(self):
        # survive at -0.5 (a=0), step to 2.0, absorbed surely
        spec = walk_spec()
        got = log_pdf_absorbed_chain(spec, Trajectory([-0.5, 2.0]))
        want = (-0.5 * 0.25 - 0.5 * math.log(2 * math.pi)) \
            + (-0.5 * 6.25 - 0.5 * math.log(2 * math.pi))
        assert got == pytest.approx(want, abs=1e-12)

    def test_vanishing_transition_gives_minus_inf(self):
        spec = AbsorbedChainSpec(
            source=np.zeros(1),
            absorption_prob=lambda i, y: 1.0,
            log_transition_density=lambda i, prev, y: -math.inf)
        assert log_pdf_absorbed_chain(spec, Trajectory([1.0])) == -math.inf

    def test_dimension_mismatch_raises(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            log_pdf_absorbed_chain(walk_spec(), Trajectory([[1.0, 2.0]]))

    def test_nan_transition_raises(self):
        spec = AbsorbedChainSpec(
            source=np.zeros(1),
            absorption_prob=lambda i, y: 1.0,
            log_transition_density=lambda i, prev, y: math.nan)
        with pytest.raises(ValueError, match="NaN"):
            log_pdf_absorbed_chain(spec, Trajectory([1.0]))

    def test_bad_absorption_prob_raises(self):
        spec = AbsorbedChainSpec(
            source=np.zeros(1),
            absorption_prob=lambda i, y: 1.5,
            log_transition_density=lambda i, prev, y: 0.0)
        with pytest.raises(ValueError, match=r"outside \[0, 1\]"):
            log_pdf_absorbed_chain(spec, Trajectory([1.0]))

    def test_never_nan_on_random_inputs(self):
        rng = np.random.default_rng(3)
        spec = walk_spec()
        for _ in range(200):
            pts = rng.normal(size=rng.integers(1, 6))
            v = log_pdf_absorbed_chain(spec, Trajectory(pts))
            assert not math.isnan(v)

    def test_translation_invariance_of_gaussian_walk(self):
        # shifting the source, domain and all points leaves the density alone
        from lastparticle.model_1d import (Model1DParams, chain_spec_1d,
                                           sample_trajectory_1d)
        rng = np.random.default_rng(4)
        base = Model1DParams(lower=-10.0, upper=1.0, sigma2=1.0, p_absorb=0.0)
        for shift in (-3.0, 0.7, 12.0):
            moved = Model1DParams(lower=-10.0 + shift, upper=1.0 + shift,
                                  sigma2=1.0, p_absorb=0.0, source=shift)
            for _ in range(20):
                x = sample_trajectory_1d(base, rng)
                y = Trajectory(x.points + shift)
                a = log_pdf_absorbed_chain(chain_spec_1d(base), x)
                b = log_pdf_absorbed_chain(chain_spec_1d(moved), y)
                assert a == pytest.approx(b, rel=1e-12)


class TestPartitionConsistency:
    def test_first_collision_absorption_mass(self):
        # P(length = 1) for the deep-domain walk with in-domain absorption:
        # tail mass outside (-15, 1) plus 0.45 times the interior mass
        from scipy.special import ndtr
        from lastparticle.model_1d import Model1DParams, sample_trajectory_1d
        interior = ndtr(1.0) - ndtr(-15.0)
        oracle = (1.0 - interior) + 0.45 * interior
        assert oracle == pytest.approx(0.537260, abs=5e-7)
        params = Model1DParams(lower=-15.0, upper=1.0, sigma2=1.0, p_absorb=0.45)
        rng = np.random.default_rng(5)
        hits = sum(len(sample_trajectory_1d(params, rng)) == 1
                   for _ in range(1_000_000))
        assert hits / 1e6 == pytest.approx(oracle, abs=2e-3)


class TestSerialization:
    def test_line_round_trip_is_exact(self):
        t = Trajectory([[-1.5, 2.25], [0.1, -1e-17]])
        back = trajectory_from_line(trajectory_to_line(t))
        assert back == t

    def test_line_format_shape(self):
        line = trajectory_to_line(Trajectory([1.0, -2.0]))
        assert line.startswith("1;")
        assert line.count(";") == 2

    def test_malformed_lines_raise(self):
        with pytest.raises(ValueError, match="malformed"):
            trajectory_from_line("2")
        with pytest.raises(ValueError, match="dimension"):
            trajectory_from_line("x;1.0")
        with pytest.raises(ValueError, match="coordinates"):
            trajectory_from_line("2;1.0;2.0,3.0")

    def test_file_round_trip(self, tmp_path):
        rng = np.random.default_rng(6)
        trajs = [Trajectory(rng.normal(size=(rng.integers(1, 5), 2)))
                 for _ in range(10)]
        path = tmp_path / "trajs.txt"
        save_trajectories(path, trajs)
        assert load_trajectories(path) == trajs

    def test_csv_round_trip(self, tmp_path):
        rng = np.random.default_rng(7)
        trajs = [Trajectory(rng.normal(size=(rng.integers(1, 5), 2)))
                 for _ in range(5)]
        path = tmp_path / "trajs.csv"
        write_trajectories_csv(path, trajs)
        assert read_trajectories_csv(path) == trajs
        header = path.read_text().splitlines()[0]
        assert header == "traj_id,step,x1,x2"

    def test_csv_rejects_mixed_dimensions(self, tmp_path):
        with pytest.raises(ValueError, match="dimension"):
            write_trajectories_csv(tmp_path / "t.csv",
                                   [Trajectory([1.0]), Trajectory([[1.0, 2.0]])])

    def test_csv_rejects_empty(self, tmp_path):
        with pytest.raises(ValueError, match="no trajectories"):
            write_trajectories_csv(tmp_path / "t.csv", [])

    def test_csv_rejects_bad_header(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError, match="header"):
            read_trajectories_csv(p)

    def test_csv_rejects_non_contiguous_steps(self, tmp_path):
        p = tmp_path / "gap.csv"
        p.write_text("traj_id,step,x1\n0,1,0.5\n0,3,0.7\n")
        with pytest.raises(ValueError, match="non-contiguous"):
            read_trajectories_csv(p)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(
        st.lists(
            st.tuples(
                st.floats(allow_nan=False, allow_infinity=False, width=64),
                st.floats(allow_nan=False, allow_infinity=False, width=64)),
            min_size=1, max_size=6),
        min_size=1, max_size=5))
    def test_round_trips_preserve_any_finite_trajectory(self, tmp_path_factory, data):
        trajs = [Trajectory(np.asarray(rows, dtype=np.float64)) for rows in data]
        for t in trajs:
            assert trajectory_from_line(trajectory_to_line(t)) == t
        tmp = tmp_path_factory.mktemp("roundtrip")
        save_trajectories(tmp / "t.txt", trajs)
        assert load_trajectories(tmp / "t.txt") == trajs
        write_trajectories_csv(tmp / "t.csv", trajs)
        assert read_trajectories_csv(tmp / "t.csv") == trajs
