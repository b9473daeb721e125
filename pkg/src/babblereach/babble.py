"""Motor babbling: smooth joint-space reaches from fixed starts to arc goals."""

from dataclasses import dataclass, field

import numpy as np

from . import serialization
from .arm import (ArcSpec, JointState, forward_kinematics, inverse_kinematics,
                  sample_arc_targets)
from .errors import BabbleReachError, ConfigurationError

DATASET_FORMAT = "babblereach.dataset"


@dataclass
class Trajectory:
    """Joint positions/velocities sampled at a constant timestep.

    ``positions`` and ``velocities`` are (steps, n_joints) arrays.
    """

    positions: np.ndarray
    velocities: np.ndarray
    timestep: float

    def __post_init__(self):
        self.positions = np.atleast_2d(np.asarray(self.positions, dtype=float))
        self.velocities = np.atleast_2d(np.asarray(self.velocities, dtype=float))
        if self.positions.shape != self.velocities.shape:
            raise ConfigurationError("positions and velocities must share a shape")
        if len(self.positions) < 1:
            raise ConfigurationError("a trajectory needs samples")
        if not self.timestep > 0:
            raise ConfigurationError("timestep must be positive")

    def __len__(self):
        return len(self.positions)

    @property
    def features(self):
        """(steps, 2 * n_joints) array of positions then velocities."""
        return np.hstack([self.positions, self.velocities])

    @property
    def samples(self):
        return [JointState(q, v) for q, v in zip(self.positions, self.velocities)]

    @property
    def final(self):
        return JointState(self.positions[-1], self.velocities[-1])

    def to_dict(self):
        return {"timestep": self.timestep, "positions": self.positions.tolist(),
                "velocities": self.velocities.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["positions"]), np.array(d["velocities"]), d["timestep"])


@dataclass
class BabbleProtocol:
    starts: list
    arc: ArcSpec
    n_train_per_start: int = 700
    n_test_per_start: int = 300
    steps_per_trajectory: int = 50
    timestep: float = 0.1
    rng_seed: int = 0

    def __post_init__(self):
        self.starts = [s if isinstance(s, JointState) else JointState(s)
                       for s in self.starts]
        if not self.starts:
            raise ConfigurationError("protocol needs at least one start")
        if min(self.n_train_per_start, self.n_test_per_start) < 1:
            raise ConfigurationError("train/test counts must be >= 1")
        if self.steps_per_trajectory < 2:
            raise ConfigurationError("steps_per_trajectory must be >= 2")

    def to_dict(self):
        return {
            "starts": [s.positions.tolist() for s in self.starts],
            "arc": self.arc.to_dict(),
            "n_train_per_start": self.n_train_per_start,
            "n_test_per_start": self.n_test_per_start,
            "steps_per_trajectory": self.steps_per_trajectory,
            "timestep": self.timestep,
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_dict(cls, d):
        return cls([JointState(s) for s in d["starts"]], ArcSpec.from_dict(d["arc"]),
                   d["n_train_per_start"], d["n_test_per_start"],
                   d["steps_per_trajectory"], d["timestep"], d["rng_seed"])


@dataclass
class Dataset:
    train: list
    test_goals: list
    protocol: BabbleProtocol
    train_goals: list = field(default_factory=list)

    def train_features(self):
        return np.vstack([t.features for t in self.train])

    def test_starts(self):
        return [s for s, _ in self.test_goals]

    def to_dict(self):
        return {
            "format": DATASET_FORMAT,
            "version": 1,
            "protocol": self.protocol.to_dict(),
            "train": [t.to_dict() for t in self.train],
            "train_goals": [np.asarray(g).tolist() for g in self.train_goals],
            "test_goals": [{"start": s.positions.tolist(), "goal": np.asarray(g).tolist()}
                           for s, g in self.test_goals],
        }

    @classmethod
    def from_dict(cls, d):
        serialization.check_header(d, DATASET_FORMAT, 1)
        return cls(
            train=[Trajectory.from_dict(t) for t in d["train"]],
            test_goals=[(JointState(g["start"]), np.array(g["goal"]))
                        for g in d["test_goals"]],
            protocol=BabbleProtocol.from_dict(d["protocol"]),
            train_goals=[np.array(g) for g in d.get("train_goals", [])],
        )

    def save(self, path):
        return serialization.write_json(path, self.to_dict())

    @classmethod
    def load(cls, path):
        return cls.from_dict(serialization.read_json(path))


def quintic_profile(steps):
    """Minimum-jerk blend s(t) in [0, 1] and ds/dtau on ``steps`` uniform knots.

    tau runs from 0 to 1; callers divide the derivative by the duration.
    """
    tau = np.linspace(0.0, 1.0, steps)
    s = tau ** 3 * (10 - 15 * tau + 6 * tau ** 2)
    ds = 30 * tau ** 2 * (1 - tau) ** 2
    return s, ds


def joint_trajectory(q_start, q_goal, steps, timestep):
    """Quintic joint-space interpolation with zero end velocities/accelerations."""
    q_start = np.asarray(q_start, dtype=float)
    q_goal = np.asarray(q_goal, dtype=float)
    duration = (steps - 1) * timestep
    s, ds = quintic_profile(steps)
    delta = q_goal - q_start
    positions = q_start + s[:, None] * delta
    velocities = (ds / duration)[:, None] * delta
    positions[0], positions[-1] = q_start, q_goal
    return Trajectory(positions, velocities, timestep)


def generate_trajectory(start, goal, steps, timestep, arm):
    """Reach from joint state ``start`` to Cartesian ``goal``.

    The goal configuration is the IK solution seeded at the start pose.
    """
    if steps < 2:
        raise ConfigurationError("steps must be >= 2")
    q_goal = inverse_kinematics(goal, arm, seed=start).positions
    return joint_trajectory(start.positions, q_goal, steps, timestep)


def _check_arc(arc, arm):
    base = arm.base_pose[:3, 3]
    lo, hi = arc.angle_range
    far = np.linalg.norm(arc.point(np.linspace(lo, hi, 721)) - base, axis=1).max()
    if far > arm.reach:
        raise ConfigurationError(
            f"arc.radius={arc.radius} with arc.center={arc.center.tolist()} reaches "
            f"{far:.3f} m from the base, beyond the arm's reach {arm.reach:.3f} m"
        )


def generate_dataset(protocol, arm):
    """Training reaches and independent test goals for every start pose."""
    _check_arc(protocol.arc, arm)
    streams = np.random.SeedSequence(protocol.rng_seed).spawn(2 * len(protocol.starts))
    train, train_goals, test_goals = [], [], []
    for k, start in enumerate(protocol.starts):
        if not start.within_limits(arm):
            raise ConfigurationError(f"start pose {k} violates the joint limits")
        goals = sample_arc_targets(protocol.arc, protocol.n_train_per_start, streams[2 * k])
        for goal in goals:
            try:
                traj = generate_trajectory(start, goal, protocol.steps_per_trajectory,
                                           protocol.timestep, arm)
            except BabbleReachError as exc:
                raise ConfigurationError(
                    f"arc goal {goal.tolist()} (arc.angle_range={protocol.arc.angle_range}) "
                    f"cannot be reached from start {k}: {exc}"
                ) from exc
            train.append(traj)
            train_goals.append(goal)
        tests = sample_arc_targets(protocol.arc, protocol.n_test_per_start,
                                   streams[2 * k + 1])
        test_goals.extend((start, g) for g in tests)
    return Dataset(train, test_goals, protocol, train_goals)


def held_out_trajectories(dataset, arm):
    """Reference reaches toward the test goals (used for held-out codec error)."""
    p = dataset.protocol
    return [generate_trajectory(s, g, p.steps_per_trajectory, p.timestep, arm)
            for s, g in dataset.test_goals]


def multi_start_poses(arm, arc, n=8, radius_gain=1.45):
    """``n`` start poses whose hands sit evenly on an outer arc beyond ``arc``.

    The outer arc shares the goal arc's centre, plane and angle range and has
    ``radius_gain`` times its radius.
    """
    outer = ArcSpec(arc.center, arc.radius * radius_gain, arc.normal, arc.angle_range)
    _check_arc(outer, arm)
    angles = np.linspace(*arc.angle_range, n)
    starts = []
    for point in outer.point(angles):
        starts.append(inverse_kinematics(point, arm, seed=np.zeros(arm.n_joints)))
    return starts


def reached_point(traj, arm):
    return forward_kinematics(traj.positions[-1], arm)
