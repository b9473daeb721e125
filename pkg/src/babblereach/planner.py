"""Goal-driven spreading activation and winner-take-all path execution.

Activation ``beta`` spreads backwards from the goal neuron through the
reverse-time synapses.  Execution walks forward synapses from the current
neuron; each candidate successor competes with ``lambda * beta + F`` and the
winner becomes refractory for the rest of the session.
"""

import heapq
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import serialization
from .arm import inverse_kinematics
from .babble import Trajectory
from .codec import decode_states, encode_states
from .errors import ConfigurationError, PlanningError
from .neural_map import augment, firing_neurons_batch

log = logging.getLogger(__name__)

PLAN_FORMAT = "babblereach.plan"
START_COVER_CELLS = 3


@dataclass(frozen=True)
class PlannerConfig:
    eta_b: float = 0.1
    tau_b: float = 1e3
    lam: float = 1e3
    max_step: int = 80
    warmup_steps: int = 0
    warmup_threshold: float = None
    stochastic: bool = False
    rng_seed: int = 0
    timestep: float = 0.1
    goal_bundled_only: bool = False

    def __post_init__(self):
        if not (self.eta_b > 0 and self.tau_b > 0 and self.lam > 0):
            raise ConfigurationError("eta_b, tau_b and lambda must be positive")
        if self.max_step < 1 or self.warmup_steps < 0:
            raise ConfigurationError("need max_step >= 1 and warmup_steps >= 0")

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class PlannerState:
    beta: np.ndarray
    gamma: np.ndarray
    current: int
    fired: set = field(default_factory=set)
    chi: dict = field(default_factory=dict)

    @classmethod
    def initial(cls, n, start, goal):
        gamma = np.zeros(n)
        gamma[goal] = 1.0
        return cls(np.zeros(n), gamma, start, {start})


@dataclass
class PlanResult:
    neuron_path: list
    reduced_path: np.ndarray
    joint_trajectory: Trajectory
    success: bool
    steps_used: int
    start_neuron: int
    goal_neuron: int
    goal_distance: float = 0.0
    warmup_used: int = 0
    reason: str = ""
    trace: list = field(default_factory=list)

    @property
    def final_state(self):
        return self.joint_trajectory.final

    def to_dict(self):
        return {
            "format": PLAN_FORMAT,
            "version": 1,
            "neuron_path": [int(i) for i in self.neuron_path],
            "reduced_path": np.asarray(self.reduced_path).tolist(),
            "joint_trajectory": self.joint_trajectory.to_dict(),
            "success": self.success,
            "steps_used": self.steps_used,
            "start_neuron": self.start_neuron,
            "goal_neuron": self.goal_neuron,
            "goal_distance": self.goal_distance,
            "warmup_used": self.warmup_used,
            "reason": self.reason,
        }

    @classmethod
    def from_dict(cls, d):
        serialization.check_header(d, PLAN_FORMAT, 1)
        return cls(d["neuron_path"], np.array(d["reduced_path"]),
                   Trajectory.from_dict(d["joint_trajectory"]), d["success"],
                   d["steps_used"], d["start_neuron"], d["goal_neuron"],
                   d["goal_distance"], d["warmup_used"], d["reason"])

    def save(self, path):
        return serialization.write_json(path, self.to_dict())

    def write_trace(self, path):
        """Per-step diagnostics as tab-separated text."""
        with open(path, "w") as fh:
            fh.write("step\twinner\tchi_max\tbeta_goal\n")
            for row in self.trace:
                fh.write("{}\t{}\t{!r}\t{!r}\n".format(*row))


def spread_step(state, nmap, cfg):
    """Synchronous Euler step of the goal-driven activation dynamics."""
    beta = state.beta
    drive = nmap.forward_matrix() @ beta + state.gamma
    state.beta = np.clip(beta + cfg.eta_b * drive * (1.0 - beta) - beta / cfg.tau_b,
                         0.0, 1.0)
    return state


def encode_state(joints, codec):
    return encode_states(np.asarray(joints.features)[None], codec)[0]


def _nearest(nmap, a_prime, subset=None):
    ids, acts = firing_neurons_batch(nmap, a_prime[None], 1, subset)
    i = int(ids[0, 0])
    dist = float(np.linalg.norm(nmap.centers[i] - augment(a_prime, nmap.scale)))
    return i, dist


def select_goal_neuron(nmap, goal, arm, codec, start, bundled_only=False,
                       return_distance=False):
    """Neuron representing the resting arm configuration that reaches ``goal``.

    The goal configuration is the IK solution seeded at the start pose, with
    zero velocity.  With ``bundled_only`` the search is limited to neurons
    that belong to some bundle (others can never be reached).
    """
    if len(nmap) == 0:
        raise ConfigurationError("the map has no neurons")
    q_goal = inverse_kinematics(goal, arm, seed=start)
    subset = nmap.bundled() if bundled_only and len(nmap.bundled()) else None
    i, dist = _nearest(nmap, encode_state(q_goal, codec), subset)
    return (i, dist) if return_distance else i


def select_start_neuron(nmap, start, codec):
    a = encode_state(start, codec)
    i, _ = _nearest(nmap, a)
    gap = np.abs(nmap.cells[i] - a / nmap.spacing).max()
    if gap > START_COVER_CELLS:
        raise PlanningError(
            f"start not covered by babbling: nearest neuron is {gap:.1f} cells away")
    return i


def decode_path(nmap, neuron_path, codec, arm, timestep):
    """Reduced centers of the path neurons and the joint trajectory they decode to."""
    reduced = nmap.reduced_center(neuron_path)
    raw = decode_states(reduced, codec)
    n = arm.n_joints
    q = arm.clamp(raw[:, :n])
    v = raw[:, n:]
    if len(q) == 1:
        q, v = np.repeat(q, 2, axis=0), np.zeros((2, n))
    return reduced, Trajectory(q, v, timestep)


def run_competition(nmap, start_neuron, goal_neuron, cfg):
    """Spreading activation and winner selection on neuron ids only.

    Returns ``(path, success, steps_used, warmup_used, reason, trace)``.
    """
    state = PlannerState.initial(len(nmap), start_neuron, goal_neuron)
    rng = np.random.default_rng(cfg.rng_seed) if cfg.stochastic else None
    path, trace = [start_neuron], []

    warm = 0
    while warm < cfg.warmup_steps:
        if (cfg.warmup_threshold is not None
                and state.beta[start_neuron] >= cfg.warmup_threshold):
            break
        spread_step(state, nmap, cfg)
        warm += 1

    r, step, reason = start_neuron, 0, ""
    if r == goal_neuron:
        return path, True, 0, warm, "start is goal", trace
    succ, _ = nmap.forward_neighbors(r)
    if len(succ) == 0 or all(int(n) in state.fired for n in succ):
        return path, False, 0, warm, "no forward synapse out of start", trace

    while step < cfg.max_step:
        spread_step(state, nmap, cfg)
        step += 1
        succ, weights = nmap.forward_neighbors(r)
        open_ = np.array([n not in state.fired for n in succ.tolist()], dtype=bool)
        if not open_.any():
            reason = "dead end: every successor is refractory"
            break
        beta = state.beta[succ]
        ok = open_ & (beta > 0) & (weights > 0)
        if not ok.any():
            trace.append((step, -1, 0.0, float(state.beta[goal_neuron])))
            continue
        cand, chi = succ[ok], cfg.lam * beta[ok] + weights[ok]
        state.chi = dict(zip(cand.tolist(), chi.tolist()))
        best = chi.max()
        winners = cand[chi == best]
        if rng is not None and len(winners) > 1:
            r = int(rng.choice(winners))
        else:
            r = int(winners.min())
        state.current = r
        state.fired.add(r)
        path.append(r)
        trace.append((step, r, float(best), float(state.beta[goal_neuron])))
        if r == goal_neuron:
            return path, True, step, warm, "reached goal", trace
    return path, False, step, warm, reason or "max_step reached", trace


def plan(nmap, start, goal, cfg, codec, arm):
    """Plan and execute a reach from joint state ``start`` to Cartesian ``goal``."""
    start_neuron = select_start_neuron(nmap, start, codec)
    goal_neuron, goal_dist = select_goal_neuron(nmap, goal, arm, codec, start,
                                                cfg.goal_bundled_only, return_distance=True)
    path, success, steps, warm, reason, trace = run_competition(
        nmap, start_neuron, goal_neuron, cfg)
    reduced, traj = decode_path(nmap, path, codec, arm, cfg.timestep)
    log.debug("plan %d -> %d: %s after %d steps", start_neuron, goal_neuron, reason, steps)
    return PlanResult(path, reduced, traj, success, steps, start_neuron, goal_neuron,
                      goal_dist, warm, reason, trace)


def oracle_path(nmap, start, goal):
    """Most probable forward path: Dijkstra over positive F edges, cost -log F.

    Returns None when ``goal`` is unreachable from ``start``.
    """
    if start == goal:
        return [start]
    adj = {}
    for (i, j), w in nmap.F.items():
        if w > 0:
            adj.setdefault(i, []).append((j, -math.log(w)))
    dist, prev = {start: 0.0}, {}
    heap = [(0.0, start)]
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == goal:
            break
        for v, c in adj.get(u, ()):
            nd = d + c
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                prev[v] = u
                heapq.heappush(heap, (nd, v))
    if goal not in done:
        return None
    out = [goal]
    while out[-1] != start:
        out.append(prev[out[-1]])
    return out[::-1]
