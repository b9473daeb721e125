"""Smoothness and accuracy metrics for planned reaches, plus sweep summaries."""

from dataclasses import dataclass

import numpy as np

from .arm import forward_kinematics
from .codec import decode_states


@dataclass(frozen=True)
class MetricReport:
    norm_jerk: float
    end_effector_error: float
    goal_y: float
    degenerate: bool = False


def norm_jerk(traj):
    """Mean norm of the third forward difference of joint positions (step 1).

    Accepts a Trajectory or a (steps, joints) array.  Fewer than four samples
    give 0.0; use :func:`norm_jerk_checked` to see that flag.
    """
    return norm_jerk_checked(traj)[0]


def norm_jerk_checked(traj):
    q = getattr(traj, "positions", traj)
    q = np.asarray(q, dtype=float)
    if q.ndim == 1:
        q = q[:, None]
    if len(q) < 4:
        return 0.0, True
    d3 = q[3:] - 3 * q[2:-1] + 3 * q[1:-2] - q[:-3]
    return float(np.linalg.norm(d3, axis=1).mean()), False


def end_effector_error(goal, final_joints, arm):
    """Distance between ``goal`` and the hand position of ``final_joints``."""
    return float(np.linalg.norm(np.asarray(goal, dtype=float)
                                - forward_kinematics(final_joints, arm)))


def report(goal, traj, arm):
    jerk, degenerate = norm_jerk_checked(traj)
    return MetricReport(jerk, end_effector_error(goal, traj.positions[-1], arm),
                        float(np.asarray(goal)[1]), degenerate)


def task_space_spacing(nmap, codec, arm):
    """Median hand distance between decoded centers of axis-adjacent neurons.

    Gives the map's grid spacing in metres, a natural unit for judging the
    end-effector error of planned reaches.
    """
    if len(nmap) < 2:
        raise ValueError("need at least two neurons")
    n = arm.n_joints
    q = arm.clamp(decode_states(nmap.reduced_center(np.arange(len(nmap))), codec)[:, :n])
    hand = np.array([forward_kinematics(row, arm) for row in q])
    gaps = []
    for d in range(nmap.dim):
        step = np.zeros(nmap.dim, dtype=np.int64)
        step[d] = 1
        for i, cell in enumerate(nmap.cells):
            j = nmap.grid_index.get(tuple((cell + step).tolist()))
            if j is not None:
                gaps.append(np.linalg.norm(hand[i] - hand[j]))
    if not gaps:
        raise ValueError("no axis-adjacent neuron pairs")
    return float(np.median(gaps))


def _stats(x):
    x = np.asarray(x, dtype=float)
    q1, med, q3 = np.percentile(x, [25, 50, 75])
    return {"median": float(med), "mean": float(x.mean()), "std": float(x.std()),
            "q1": float(q1), "q3": float(q3), "min": float(x.min()), "max": float(x.max())}


def summarize(reports, n_bins=10):
    """Order statistics per metric and per-bin means over the goal y coordinate."""
    if not reports:
        raise ValueError("nothing to summarize")
    jerk = np.array([r.norm_jerk for r in reports])
    err = np.array([r.end_effector_error for r in reports])
    y = np.array([r.goal_y for r in reports])
    lo, hi = y.min(), y.max()
    edges = np.linspace(lo, hi, n_bins + 1) if hi > lo else np.array([lo, lo])
    bins = np.clip(np.searchsorted(edges, y, side="right") - 1, 0, len(edges) - 2)
    by_y = []
    for b in range(len(edges) - 1):
        mask = bins == b
        if mask.any():
            by_y.append({"y_lo": float(edges[b]), "y_hi": float(edges[b + 1]),
                         "count": int(mask.sum()),
                         "norm_jerk_mean": float(jerk[mask].mean()),
                         "norm_jerk_std": float(jerk[mask].std()),
                         "ee_error_mean": float(err[mask].mean()),
                         "ee_error_std": float(err[mask].std())})
    return {"count": len(reports), "norm_jerk": _stats(jerk),
            "end_effector_error": _stats(err), "by_goal_y": by_y}
