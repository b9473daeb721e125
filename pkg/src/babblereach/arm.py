"""Kinematic simulator for a serial arm of revolute joints.

The arm is a chain: joint ``i`` rotates about its local axis and is followed by
a straight link of ``link_lengths[i]`` along the rotated local x axis.  The
whole chain is placed in the world by a 4x4 homogeneous ``base_pose``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ConvergenceError, ReachabilityError

IK_TOLERANCE = 1e-4

_AXES = {
    "x": np.array([1.0, 0.0, 0.0]),
    "y": np.array([0.0, 1.0, 0.0]),
    "z": np.array([0.0, 0.0, 1.0]),
}


@dataclass(frozen=True)
class ArmConfig:
    link_lengths: tuple
    joint_limits: tuple
    joint_axes: tuple = None
    base_pose: np.ndarray = field(default_factory=lambda: np.eye(4))
    velocity_limit: float = 3.0
    name: str = "custom"

    def __post_init__(self):
        lengths = tuple(float(v) for v in self.link_lengths)
        limits = tuple((float(lo), float(hi)) for lo, hi in self.joint_limits)
        axes = self.joint_axes or ("z",) * len(lengths)
        object.__setattr__(self, "link_lengths", lengths)
        object.__setattr__(self, "joint_limits", limits)
        object.__setattr__(self, "joint_axes", tuple(axes))
        pose = np.array(self.base_pose, dtype=float)
        object.__setattr__(self, "base_pose", pose)

        if len(lengths) < 2:
            raise ConfigurationError("an arm needs at least 2 joints")
        if len(limits) != len(lengths) or len(axes) != len(lengths):
            raise ConfigurationError(
                "link_lengths, joint_limits and joint_axes must have equal length"
            )
        if any(v <= 0 for v in lengths):
            raise ConfigurationError("link lengths must be positive")
        if any(lo >= hi for lo, hi in limits):
            raise ConfigurationError("joint limits need min < max")
        if any(a not in _AXES for a in axes):
            raise ConfigurationError(f"joint axes must be among {sorted(_AXES)}")
        if pose.shape != (4, 4):
            raise ConfigurationError("base_pose must be a 4x4 homogeneous transform")

    @property
    def n_joints(self):
        return len(self.link_lengths)

    @property
    def reach(self):
        return sum(self.link_lengths)

    @property
    def lower(self):
        return np.array([lo for lo, _ in self.joint_limits])

    @property
    def upper(self):
        return np.array([hi for _, hi in self.joint_limits])

    def clamp(self, q):
        return np.clip(q, self.lower, self.upper)

    def with_base_pose(self, pose):
        return ArmConfig(self.link_lengths, self.joint_limits, self.joint_axes,
                         pose, self.velocity_limit, self.name)

    def to_dict(self):
        return {
            "name": self.name,
            "link_lengths": list(self.link_lengths),
            "joint_limits": [list(lim) for lim in self.joint_limits],
            "joint_axes": list(self.joint_axes),
            "base_pose": self.base_pose.tolist(),
            "velocity_limit": self.velocity_limit,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["link_lengths"], d["joint_limits"], d.get("joint_axes"),
                   np.array(d.get("base_pose", np.eye(4))),
                   d.get("velocity_limit", 3.0), d.get("name", "custom"))


@dataclass(frozen=True)
class JointState:
    positions: np.ndarray
    velocities: np.ndarray = None

    def __post_init__(self):
        q = np.array(self.positions, dtype=float).reshape(-1)
        v = (np.zeros_like(q) if self.velocities is None
             else np.array(self.velocities, dtype=float).reshape(-1))
        if v.shape != q.shape:
            raise ConfigurationError("positions and velocities differ in length")
        object.__setattr__(self, "positions", q)
        object.__setattr__(self, "velocities", v)

    @property
    def features(self):
        """Positions followed by velocities."""
        return np.concatenate([self.positions, self.velocities])

    def within_limits(self, arm, tol=1e-12):
        q, v = self.positions, self.velocities
        return (q.shape == (arm.n_joints,)
                and bool(np.all(q >= arm.lower - tol))
                and bool(np.all(q <= arm.upper + tol))
                and bool(np.all(np.abs(v) <= arm.velocity_limit + tol)))


@dataclass(frozen=True)
class ArcSpec:
    center: np.ndarray
    radius: float
    normal: np.ndarray
    angle_range: tuple

    def __post_init__(self):
        c = np.array(self.center, dtype=float).reshape(3)
        n = np.array(self.normal, dtype=float).reshape(3)
        lo, hi = (float(a) for a in self.angle_range)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "angle_range", (lo, hi))
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius <= 0:
            raise ConfigurationError("arc radius must be positive")
        if lo > hi:
            raise ConfigurationError("arc angle_range needs lo <= hi")
        if abs(np.linalg.norm(n) - 1.0) > 1e-9:
            raise ConfigurationError("arc normal must be a unit vector")

    def basis(self):
        """In-plane orthonormal pair (u, v); angle 0 points along u.

        u is the world x axis projected onto the arc plane (world y if x is
        parallel to the normal).
        """
        n = self.normal
        ref = _AXES["x"] if abs(n[0]) < 0.9 else _AXES["y"]
        u = ref - np.dot(ref, n) * n
        u /= np.linalg.norm(u)
        return u, np.cross(n, u)

    def point(self, theta):
        u, v = self.basis()
        theta = np.asarray(theta, dtype=float)[..., None]
        return self.center + self.radius * (np.cos(theta) * u + np.sin(theta) * v)

    def to_dict(self):
        return {"center": self.center.tolist(), "radius": self.radius,
                "normal": self.normal.tolist(), "angle_range": list(self.angle_range)}

    @classmethod
    def from_dict(cls, d):
        return cls(d["center"], d["radius"], d["normal"], tuple(d["angle_range"]))


def planar_arm(link_lengths=(1.0, 1.0), limit=np.pi):
    """Planar arm rotating about world z; used for analytic unit tests."""
    n = len(link_lengths)
    return ArmConfig(link_lengths, [(-limit, limit)] * n, ("z",) * n, name="planar2")


def humanoid_arm():
    """5-DOF spatial arm: shoulder yaw/pitch/roll then elbow flex and twist.

    Zero angles hold the arm straight out along world +x.
    """
    return ArmConfig(
        link_lengths=(0.28, 0.28, 0.10, 0.18, 0.10),
        joint_limits=((-1.6, 1.6), (-1.6, 1.6), (-1.6, 1.6), (-2.6, 2.6), (-1.6, 1.6)),
        joint_axes=("z", "y", "x", "y", "z"),
        name="humanoid5",
    )


PRESETS = {"planar2": planar_arm, "humanoid5": humanoid_arm}


def make_arm(preset):
    try:
        return PRESETS[preset]()
    except KeyError:
        raise ConfigurationError(f"unknown arm preset {preset!r}") from None


def _rotation(axis, angle):
    c, s = np.cos(angle), np.sin(angle)
    if axis == "x":
        return np.array([[1, 0, 0], [0, c, -s], [0, s, c]])
    if axis == "y":
        return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]])
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])


def _chain(q, arm):
    """World joint origins, world joint axes and the end-effector position."""
    R = arm.base_pose[:3, :3].copy()
    p = arm.base_pose[:3, 3].copy()
    origins, axes = [], []
    for angle, axis, length in zip(q, arm.joint_axes, arm.link_lengths):
        origins.append(p.copy())
        axes.append(R @ _AXES[axis])
        R = R @ _rotation(axis, angle)
        p = p + length * R[:, 0]
    return np.array(origins), np.array(axes), p


def _positions(joints, arm):
    q = joints.positions if isinstance(joints, JointState) else np.asarray(joints, float)
    if q.shape != (arm.n_joints,):
        raise ConfigurationError(
            f"expected {arm.n_joints} joint values, got {q.shape[0] if q.ndim else 0}"
        )
    return q


def forward_kinematics(joints, arm):
    """End-effector position in the world frame as a 3-vector."""
    return _chain(_positions(joints, arm), arm)[2]


def jacobian(joints, arm):
    """3 x n positional Jacobian."""
    origins, axes, tip = _chain(_positions(joints, arm), arm)
    return np.cross(axes, tip - origins).T


def inverse_kinematics(target, arm, seed=None, tol=IK_TOLERANCE, damping=1e-2,
                       max_iter=200, max_step=0.5):
    """Damped-least-squares IK for the end-effector position.

    Starts at ``seed`` (zeros by default) and clamps to joint limits after each
    step, so the returned configuration is the one the iteration reaches from
    the seed, i.e. a nearby solution for redundant arms.
    """
    target = np.asarray(target, dtype=float).reshape(3)
    base = arm.base_pose[:3, 3]
    if np.linalg.norm(target - base) > arm.reach + 1e-12:
        raise ReachabilityError(
            f"target {target.tolist()} is {np.linalg.norm(target - base):.4f} m from "
            f"the base, beyond reach {arm.reach:.4f} m"
        )
    q = np.zeros(arm.n_joints) if seed is None else _positions(seed, arm).copy()
    q = arm.clamp(q)
    lam2 = damping ** 2
    for _ in range(max_iter + 1):
        origins, axes, tip = _chain(q, arm)
        err = target - tip
        residual = np.linalg.norm(err)
        if residual <= tol:
            return JointState(q, np.zeros_like(q))
        J = np.cross(axes, tip - origins).T
        dq = J.T @ np.linalg.solve(J @ J.T + lam2 * np.eye(3), err)
        step = np.linalg.norm(dq)
        if step > max_step:
            dq *= max_step / step
        q = arm.clamp(q + dq)
    raise ConvergenceError(
        f"IK did not converge in {max_iter} iterations (residual {residual:.3e} m)",
        residual,
    )


def sample_arc_targets(arc, n, rng_seed):
    """``n`` points on ``arc`` with angles i.i.d. uniform over its angle range."""
    if n < 1:
        raise ConfigurationError("n must be >= 1")
    rng = np.random.default_rng(rng_seed)
    lo, hi = arc.angle_range
    return arc.point(rng.uniform(lo, hi, size=n))


def default_arc(arm):
    """Horizontal goal arc in front of the arm used by the presets."""
    if arm.name == "planar2":
        return ArcSpec((0.0, 0.0, 0.0), 1.4, (0.0, 0.0, 1.0), (0.2, 1.4))
    return ArcSpec((0.0, 0.0, -0.25), 0.55, (0.0, 0.0, 1.0), (-0.5, 1.0))
