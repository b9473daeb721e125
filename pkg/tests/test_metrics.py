import numpy as np
import pytest

from babblereach.arm import planar_arm
from babblereach.babble import Trajectory
from babblereach.metrics import (MetricReport, end_effector_error, norm_jerk,
                                 norm_jerk_checked, report, summarize)


class TestJerk:
    def test_constant(self):
        assert norm_jerk(np.ones((10, 3))) == 0.0

    def test_quadratic(self):
        i = np.arange(12, dtype=float)
        assert norm_jerk(np.stack([i ** 2, 3 * i ** 2], 1)) == pytest.approx(0.0, abs=1e-9)

    def test_cubic(self):
        i = np.arange(9, dtype=float)
        assert norm_jerk(i ** 3) == pytest.approx(6.0)

    def test_matches_numpy_diff(self):
        q = np.random.default_rng(0).normal(size=(30, 4))
        ref = np.linalg.norm(np.diff(q, n=3, axis=0), axis=1).mean()
        assert norm_jerk(q) == pytest.approx(ref)

    def test_short_is_degenerate(self):
        assert norm_jerk_checked(np.zeros((3, 2))) == (0.0, True)

    def test_accepts_trajectory(self):
        i = np.arange(6, dtype=float)[:, None]
        assert norm_jerk(Trajectory(i ** 3, np.zeros_like(i), 0.1)) == pytest.approx(6.0)


class TestError:
    @pytest.fixture
    def arm(self):
        return planar_arm((1.0, 1.0))

    def test_zero_at_goal(self, arm):
        assert end_effector_error([2.0, 0.0, 0.0], [0.0, 0.0], arm) == pytest.approx(0.0)

    def test_three_four_five(self, arm):
        # FK at zero is (2, 0, 0); goal (2, 3, 4) is 5 away
        assert end_effector_error([2.0, 3.0, 4.0], [0.0, 0.0], arm) == pytest.approx(5.0)

    def test_translation_invariant(self, arm):
        shift = np.array([0.3, -1.2, 0.7])
        pose = np.eye(4)
        pose[:3, 3] = shift
        moved = arm.with_base_pose(pose)
        goal = np.array([0.5, 1.1, 0.2])
        q = [0.4, -0.9]
        assert end_effector_error(goal + shift, q, moved) == pytest.approx(
            end_effector_error(goal, q, arm))

    def test_report(self, arm):
        traj = Trajectory(np.zeros((5, 2)), np.zeros((5, 2)), 0.1)
        r = report([2.0, 0.5, 0.0], traj, arm)
        assert r == MetricReport(0.0, pytest.approx(0.5), 0.5, False)


class TestSummary:
    def test_single(self):
        s = summarize([MetricReport(0.2, 0.01, 0.3)])
        assert s["norm_jerk"]["median"] == s["norm_jerk"]["mean"] == 0.2
        assert s["norm_jerk"]["std"] == 0.0

    def test_median(self):
        reps = [MetricReport(v, v, v) for v in (1.0, 2.0, 3.0)]
        assert summarize(reps)["end_effector_error"]["median"] == 2.0

    def test_permutation_invariant(self):
        rng = np.random.default_rng(5)
        reps = [MetricReport(*rng.uniform(size=3)) for _ in range(40)]
        a = summarize(reps)
        b = summarize([reps[k] for k in rng.permutation(40)])
        assert a["norm_jerk"] == pytest.approx(b["norm_jerk"])
        for row_a, row_b in zip(a["by_goal_y"], b["by_goal_y"], strict=True):
            assert row_a == pytest.approx(row_b)
        assert sum(row["count"] for row in a["by_goal_y"]) == 40

    def test_empty(self):
        with pytest.raises(ValueError):
            summarize([])
