"""
Reaching with a two-link planar arm
===================================

Babble 120 reaches, squeeze the motor-sensory states into two numbers,
grow a neural map over those two numbers and let spreading activation plan
a reach to a goal the arm never babbled towards.  Writes ``planar_reach.svg``.
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from babblereach.arm import JointState, default_arc, forward_kinematics, planar_arm
from babblereach.babble import BabbleProtocol, generate_dataset
from babblereach.bundles import BundleConfig, form_bundles
from babblereach.codec import TrainHyper, encode_states, fit_norm_stats, train_autoencoder
from babblereach.metrics import report
from babblereach.neural_map import build_map, compute_resolution
from babblereach.planner import PlannerConfig, plan

# the arm, and the arc its babbling reaches land on
arm = planar_arm((1.0, 1.0))
arc = default_arc(arm)
start = JointState([0.0, 0.3])

# 120 quintic reaches from one start pose, plus 10 held-out goals on the same arc;
# with only a few dozen reaches the two-unit codec stays too blurry to plan well
data = generate_dataset(BabbleProtocol([start], arc, 120, 10, 30, rng_seed=1), arm)
print("babbled", len(data.train), "reaches of", len(data.train[0]), "samples")

# 4 features (2 angles, 2 velocities) -> 2 reduced coordinates
codec = train_autoencoder(data, fit_norm_stats(data), 2, TrainHyper(epochs=60))
print("codec train RMSE %.4f" % codec.history["train_rmse"])

# neurons on a grid whose spacing is the median step of the reduced trajectories
reduced = [encode_states(t.features, codec) for t in data.train]
nmap = build_map(reduced, compute_resolution(reduced))
form_bundles(nmap, reduced, BundleConfig(phi=3))
print(len(nmap), "neurons,", len(nmap.F), "synapses")

# plan every held-out goal; warmup lets activation reach the start first
cfg = PlannerConfig(warmup_steps=100)
fig, ax = plt.subplots(figsize=(5, 5))
for _, goal in data.test_goals:
    result = plan(nmap, start, goal, cfg, codec, arm)
    m = report(goal, result.joint_trajectory, arm)
    print("goal (%.2f, %.2f): %s in %d steps, error %.3f m, jerk %.4f"
          % (goal[0], goal[1], "reached" if result.success else "missed",
             result.steps_used, m.end_effector_error, m.norm_jerk))
    hand = np.array([forward_kinematics(q, arm) for q in result.joint_trajectory.positions])
    ax.plot(hand[:, 0], hand[:, 1], "-", lw=1)
    ax.plot(*goal[:2], "kx")

theta = np.linspace(*arc.angle_range, 100)
ax.plot(*arc.point(theta)[:, :2].T, "k:", lw=0.8, label="goal arc")
ax.set_aspect("equal")
ax.legend()
fig.savefig("planar_reach.svg")
