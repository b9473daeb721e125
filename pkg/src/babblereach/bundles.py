"""Trajectory bundle formation in the backward map (and its forward mirror)."""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .neural_map import firing_neurons_batch

VARIANTS = ("lnrConnections", "fixConnections", "parConnections")


@dataclass(frozen=True)
class BundleConfig:
    phi: int = 1
    eta_f: float = 0.05
    tau_f: float = 1e3
    variant: str = "lnrConnections"

    def __post_init__(self):
        if self.phi < 1:
            raise ConfigurationError("phi must be >= 1")
        if not 0 < self.eta_f <= 1:
            raise ConfigurationError("eta_f must lie in (0, 1]")
        if not self.tau_f > 0:
            raise ConfigurationError("tau_f must be positive")
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"variant must be one of {VARIANTS}")

    def to_dict(self):
        return dict(self.__dict__)


def calculate_weight(rank_i, rank_j, phi, variant="lnrConnections"):
    """Synapse strength between firing ranks ``rank_i`` (time t) and ``rank_j`` (t+1).

    Returns None where the variant makes no connection.
    """
    if not (0 <= rank_i < phi and 0 <= rank_j < phi):
        raise ConfigurationError(f"ranks ({rank_i}, {rank_j}) outside [0, {phi})")
    if variant == "lnrConnections":
        return (phi - max(rank_i, rank_j)) / phi
    if variant == "fixConnections":
        return 1.0
    if variant == "parConnections":
        return (phi - rank_i) / phi if rank_i == rank_j else None
    raise ConfigurationError(f"unknown bundle variant {variant!r}")


def update_connection(nmap, source, target, w, eta_f, tau_f):
    """One Euler step of the saturating Hebbian rule on B[source -> target].

    ``source`` fired one step after ``target``.  The forward mirror entry is
    kept equal.
    """
    b = nmap.B.get((source, target), 0.0)
    b = min(1.0, max(0.0, b + eta_f * w * (1.0 - b) - b / tau_f))
    nmap.B[(source, target)] = b
    nmap.F[(target, source)] = b
    return b


def _pairs(phi, variant):
    out = []
    for ri in range(phi):
        for rj in range(phi):
            w = calculate_weight(ri, rj, phi, variant)
            if w is not None:
                out.append((ri, rj, w))
    return out


def form_bundles(nmap, reduced_trajectories, cfg):
    """Strengthen synapses between the firing sets of consecutive samples.

    For each step t -> t+1 every neuron firing at t+1 gets a reverse-time
    synapse onto the neurons that fired at t, weighted by bundle rank.  A
    neuron that fires at both steps gets no synapse onto itself.
    """
    trajs = [np.atleast_2d(t) for t in reduced_trajectories]
    if not trajs:
        raise ConfigurationError("no trajectories to bundle")
    pairs = _pairs(cfg.phi, cfg.variant)
    for traj in trajs:
        ids, _ = firing_neurons_batch(nmap, traj, cfg.phi)
        ids = ids.tolist()
        for now, nxt in zip(ids[:-1], ids[1:]):
            for ri, rj, w in pairs:
                if ri < len(now) and rj < len(nxt) and nxt[rj] != now[ri]:
                    update_connection(nmap, nxt[rj], now[ri], w, cfg.eta_f, cfg.tau_f)
    nmap.touch()
    return nmap
