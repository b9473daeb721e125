import numpy as np
import pytest

from babblereach.arm import (IK_TOLERANCE, ArcSpec, JointState, default_arc,
                             forward_kinematics, humanoid_arm, planar_arm)
from babblereach.babble import (BabbleProtocol, Dataset, generate_dataset,
                                generate_trajectory, joint_trajectory)
from babblereach.errors import ConfigurationError


@pytest.fixture
def planar():
    return planar_arm((1.0, 1.0))


def test_null_motion(planar):
    start = JointState([0.3, 0.4])
    goal = forward_kinematics(start, planar)
    traj = generate_trajectory(start, goal, 10, 0.1, planar)
    np.testing.assert_allclose(traj.positions, np.tile(start.positions, (10, 1)), atol=1e-6)
    np.testing.assert_allclose(traj.velocities, 0.0, atol=1e-5)


def test_reach_straight_up(planar):
    traj = generate_trajectory(JointState([0.0, 0.0]), [0.0, 2.0, 0.0], 50, 0.1, planar)
    assert len(traj) == 50
    # the outstretched pose is singular, so a 1e-4 hand error allows a
    # larger angular offset (it grows like the square root of the error)
    np.testing.assert_allclose(traj.positions[-1], [np.pi / 2, 0.0], atol=0.03)
    assert np.linalg.norm(forward_kinematics(traj.positions[-1], planar)
                          - [0, 2, 0]) <= IK_TOLERANCE
    np.testing.assert_array_equal(traj.positions[0], [0.0, 0.0])


def test_velocity_is_derivative_of_interpolant():
    q0, q1 = np.array([0.1, -0.4]), np.array([1.2, 0.3])
    steps, dt = 2001, 0.001
    traj = joint_trajectory(q0, q1, steps, dt)
    fd = np.gradient(traj.positions, dt, axis=0)
    np.testing.assert_allclose(traj.velocities[1:-1], fd[1:-1], atol=1e-5)
    np.testing.assert_array_equal(traj.velocities[[0, -1]], 0.0)


@pytest.mark.parametrize("dt", [1e-3, 1e-4])
def test_endpoint_accelerations_vanish(dt):
    # a unit quintic over one second has jerk 60 at the ends, so a one-step
    # difference of velocity sees about 30 * dt; a nonzero true acceleration
    # would not shrink with dt
    traj = joint_trajectory([0.0], [1.0], int(round(1 / dt)) + 1, dt)
    acc = np.diff(traj.velocities[:, 0]) / dt
    assert abs(acc[0]) <= 31 * dt
    assert abs(acc[-1]) <= 31 * dt


@pytest.fixture(scope="module")
def humanoid_dataset():
    arm = humanoid_arm()
    protocol = BabbleProtocol([np.zeros(5)], default_arc(arm), 40, 15, rng_seed=4)
    return arm, generate_dataset(protocol, arm)


def test_dataset_sizes_and_arc(humanoid_dataset):
    arm, data = humanoid_dataset
    assert len(data.train) == 40 and len(data.test_goals) == 15
    arc = data.protocol.arc
    for traj in data.train:
        end = forward_kinematics(traj.positions[-1], arm)
        assert abs(np.linalg.norm(end - arc.center) - arc.radius) <= IK_TOLERANCE
        assert len(traj) == 50
    for _, g in data.test_goals:
        assert abs(np.linalg.norm(g - arc.center) - arc.radius) < 1e-9


def test_dataset_reproducible(humanoid_dataset):
    arm, data = humanoid_dataset
    again = generate_dataset(data.protocol, arm)
    assert again.to_dict() == data.to_dict()


def test_dataset_round_trip(tmp_path, humanoid_dataset):
    _, data = humanoid_dataset
    path = tmp_path / "data.json"
    data.save(path)
    assert Dataset.load(path).to_dict() == data.to_dict()


def test_multi_start_count():
    arm = humanoid_arm()
    from babblereach.babble import multi_start_poses
    starts = multi_start_poses(arm, default_arc(arm))
    protocol = BabbleProtocol(starts, default_arc(arm), 3, 2, steps_per_trajectory=5)
    data = generate_dataset(protocol, arm)
    assert len(data.train) == 24 and len(data.test_goals) == 16


def test_minimal_dataset(planar):
    arc = default_arc(planar)
    protocol = BabbleProtocol([JointState([0.0, 0.5])], arc, 1, 1, 2)
    data = generate_dataset(protocol, planar)
    assert len(data.train) == 1 and len(data.train[0]) == 2


def test_unreachable_arc_names_parameter(planar):
    arc = ArcSpec((0, 0, 0), 2.5, (0, 0, 1), (0.0, 1.0))
    protocol = BabbleProtocol([JointState([0.0, 0.0])], arc, 2, 1)
    with pytest.raises(ConfigurationError, match="arc.radius"):
        generate_dataset(protocol, planar)
