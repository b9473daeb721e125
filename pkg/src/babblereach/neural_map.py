"""Sparse grid of RBF neurons shared by the backward, forward and competition maps.

Neurons sit on a regular grid in the reduced space.  Every neuron center is
lifted to a unit vector by prepending a pseudo-feature, so a neuron's
activation for a query is a plain dot product and the activation order equals
the Euclidean distance order of the lifted vectors.

Synapses are stored as ``(source, target)`` pairs: ``B[(i, j)]`` is the
reverse-time synapse from neuron ``i`` (later in time) onto neuron ``j``
(earlier), and ``F[(j, i)]`` is the same synapse in forward time.
"""

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree

from . import serialization
from .errors import ConfigurationError, DegenerateFeatureError

log = logging.getLogger(__name__)

MAP_FORMAT = "babblereach.map"
SCALE_MARGIN = 1.05


def compute_resolution(reduced_trajectories):
    """Per-feature median of |a'[i+1] - a'[i]| over all trajectories.

    A zero median falls back to the smallest positive difference of that
    feature.
    """
    diffs = [np.abs(np.diff(np.atleast_2d(t), axis=0)) for t in reduced_trajectories]
    diffs = [d for d in diffs if len(d)]
    if not diffs:
        raise ConfigurationError("need at least one pair of consecutive points")
    D = np.vstack(diffs)
    res = np.median(D, axis=0)
    for j in np.flatnonzero(res <= 0):
        positive = D[:, j][D[:, j] > 0]
        if positive.size == 0:
            raise DegenerateFeatureError(f"reduced feature {j} never changes")
        res[j] = positive.min()
    return res


def augment(a_prime, scale, return_clamped=False):
    """Lift reduced coordinates to unit vectors ``[pseudo, scale * a']``.

    Rows whose scaled norm exceeds one are pulled back radially onto the unit
    sphere (pseudo-feature 0).  Works on one point or a 2-D batch.
    """
    w = scale * np.asarray(a_prime, dtype=float)
    single = w.ndim == 1
    w = np.atleast_2d(w)
    sq = np.sum(w * w, axis=1)
    over = sq > 1.0
    if over.any():
        w = w.copy()
        w[over] /= np.sqrt(sq[over])[:, None]
        sq = np.where(over, 1.0, sq)
    out = np.hstack([np.sqrt(np.maximum(0.0, 1.0 - sq))[:, None], w])
    out = out[0] if single else out
    if return_clamped:
        return out, int(np.count_nonzero(over))
    return out


@dataclass
class NeuralMap:
    resolution: np.ndarray
    res_multiplier: float
    scale: float
    cells: np.ndarray
    B: dict = field(default_factory=dict)
    F: dict = field(default_factory=dict)
    clamped_centers: int = 0

    def __post_init__(self):
        self.resolution = np.asarray(self.resolution, dtype=float)
        self.cells = np.asarray(self.cells, dtype=np.int64).reshape(-1, len(self.resolution))
        if np.any(self.resolution <= 0):
            raise ConfigurationError("resolutions must be positive")
        self.grid_index = {tuple(c): i for i, c in enumerate(self.cells.tolist())}
        if len(self.grid_index) != len(self.cells):
            raise ConfigurationError("duplicate grid cells")
        self.centers, self.clamped_centers = augment(self.cell_coordinates(), self.scale,
                                                     return_clamped=True)
        self._cache = {}

    def __len__(self):
        return len(self.cells)

    @property
    def dim(self):
        return len(self.resolution)

    @property
    def spacing(self):
        """Grid spacing per reduced feature."""
        return self.resolution * self.res_multiplier

    def cell_of(self, a_prime):
        return np.rint(np.asarray(a_prime, dtype=float) / self.spacing).astype(np.int64)

    def cell_coordinates(self, ids=None):
        cells = self.cells if ids is None else self.cells[np.asarray(ids)]
        return cells * self.spacing

    def reduced_center(self, ids):
        """Reduced coordinates of neuron centers (inverse of the lifting)."""
        return self.centers[np.asarray(ids), 1:] / self.scale

    def lookup(self, a_prime):
        """Neuron whose cell contains ``a_prime``, or None."""
        return self.grid_index.get(tuple(self.cell_of(a_prime).tolist()))

    # ---- synapses --------------------------------------------------------

    def touch(self):
        self._cache.pop("F", None)
        self._cache.pop("bundled", None)

    def forward_matrix(self):
        """CSR matrix with F[i, j] = forward weight from neuron i onto j.

        Its matrix-vector product with activations is the input every neuron
        receives through the backward synapses (B[j, i] == F[i, j]).
        """
        if "F" not in self._cache:
            n = len(self)
            if self.F:
                keys = np.array(list(self.F.keys()), dtype=np.int64)
                vals = np.fromiter(self.F.values(), dtype=float, count=len(self.F))
                M = sparse.csr_matrix((vals, (keys[:, 0], keys[:, 1])), shape=(n, n))
            else:
                M = sparse.csr_matrix((n, n))
            M.sort_indices()
            self._cache["F"] = M
        return self._cache["F"]

    def backward_matrix(self):
        """CSR matrix with B[i, j] = reverse-time weight from neuron i onto j."""
        return self.forward_matrix().T.tocsr()

    def forward_neighbors(self, r):
        """(ids, weights) of neurons that neuron ``r`` projects onto in F."""
        M = self.forward_matrix()
        lo, hi = M.indptr[r], M.indptr[r + 1]
        return M.indices[lo:hi], M.data[lo:hi]

    def forward_weight(self, i, j):
        return self.F.get((i, j), 0.0)

    def bundled(self):
        """Sorted ids of neurons that take part in at least one synapse."""
        if "bundled" not in self._cache:
            ids = set()
            for i, j in self.F:
                ids.add(i)
                ids.add(j)
            self._cache["bundled"] = np.array(sorted(ids), dtype=np.int64)
        return self._cache["bundled"]

    # ---- queries ---------------------------------------------------------

    def tree(self, subset=None):
        key = ("tree", None if subset is None else np.asarray(subset).tobytes())
        if key not in self._cache:
            pts = self.centers if subset is None else self.centers[subset]
            self._cache[key] = cKDTree(pts)
        return self._cache[key]

    # ---- persistence -----------------------------------------------------

    def to_dict(self):
        b = sorted((i, j, w) for (i, j), w in self.B.items())
        return {
            "format": MAP_FORMAT,
            "version": 1,
            "resolution": self.resolution.tolist(),
            "res_multiplier": self.res_multiplier,
            "scale": self.scale,
            "cells": self.cells.tolist(),
            "B": [[int(i), int(j), float(w)] for i, j, w in b],
        }

    @classmethod
    def from_dict(cls, d):
        serialization.check_header(d, MAP_FORMAT, 1)
        m = cls(np.array(d["resolution"]), d["res_multiplier"], d["scale"],
                np.array(d["cells"], dtype=np.int64).reshape(-1, len(d["resolution"])))
        for i, j, w in d["B"]:
            m.B[(i, j)] = w
            m.F[(j, i)] = w
        return m

    def content_hash(self):
        return serialization.content_hash(self.to_dict())

    def save(self, path):
        return serialization.write_json(path, self.to_dict())

    @classmethod
    def load(cls, path):
        return cls.from_dict(serialization.read_json(path))


def fit_scale(points):
    """Scale that puts every point strictly inside the unit ball (5% margin)."""
    r = np.linalg.norm(np.atleast_2d(points), axis=1).max()
    return 1.0 / (SCALE_MARGIN * r) if r > 0 else 1.0


def build_map(reduced_trajectories, resolution, res_multiplier=1.0, scale=None):
    """Neurons at every visited grid cell and at its 2 * |A'| axis neighbours."""
    resolution = np.asarray(resolution, dtype=float)
    if np.any(resolution <= 0):
        raise ConfigurationError("resolutions must be positive")
    points = np.vstack([np.atleast_2d(t) for t in reduced_trajectories])
    if points.shape[1] != len(resolution):
        raise ConfigurationError("resolution length differs from the reduced dimension")
    spacing = resolution * res_multiplier
    visited = np.unique(np.rint(points / spacing).astype(np.int64), axis=0)
    dim = visited.shape[1]
    offsets = np.vstack([np.zeros((1, dim), dtype=np.int64),
                         np.eye(dim, dtype=np.int64), -np.eye(dim, dtype=np.int64)])
    cells = np.unique((visited[:, None, :] + offsets[None]).reshape(-1, dim), axis=0)
    nmap = NeuralMap(resolution, float(res_multiplier),
                     fit_scale(points) if scale is None else float(scale), cells)
    if nmap.clamped_centers:
        log.debug("%d neighbour centers clamped onto the unit sphere", nmap.clamped_centers)
    log.info("map: %d visited cells, %d neurons", len(visited), len(nmap))
    return nmap


def _rank_rows(nmap, q, ids, subset):
    acts = nmap.centers[ids] @ q
    order = np.lexsort((ids, -acts))
    return ids[order], acts[order]


def find_firing_neurons(nmap, a_prime, phi, subset=None):
    """Top-``phi`` neurons for one reduced point, most active first.

    Activation is the dot product of the lifted query with each center; ties
    go to the lower id.  ``subset`` restricts the search to a sorted id array.
    """
    ids, acts = firing_neurons_batch(nmap, np.atleast_2d(a_prime), phi, subset)
    return list(zip(ids[0].tolist(), acts[0].tolist()))


def firing_neurons_batch(nmap, points, phi, subset=None):
    """Vectorised :func:`find_firing_neurons`; returns (ids, activations) arrays."""
    if len(nmap) == 0:
        raise ConfigurationError("the map has no neurons")
    if phi < 1:
        raise ConfigurationError("phi must be >= 1")
    pool = len(nmap) if subset is None else len(subset)
    if phi > pool:
        warnings.warn(f"phi={phi} exceeds the {pool} available neurons", stacklevel=2)
        phi = pool
    Q = augment(np.atleast_2d(points), nmap.scale)
    tree = nmap.tree(subset)
    out_ids = np.empty((len(Q), phi), dtype=np.int64)
    out_act = np.empty((len(Q), phi))
    k = min(pool, phi + 4)
    _, idx = tree.query(Q, k=k)
    idx = idx.reshape(len(Q), k)
    for row, q in enumerate(Q):
        cand = idx[row]
        kk = k
        while True:
            ids = cand if subset is None else subset[cand]
            ids, acts = _rank_rows(nmap, q, ids, subset)
            # a tie with the worst candidate could hide equal neurons beyond k
            if kk == pool or acts[-1] < acts[phi - 1] - 1e-12:
                break
            kk = min(pool, 2 * kk)
            cand = np.atleast_1d(tree.query(q, k=kk)[1])
        out_ids[row], out_act[row] = ids[:phi], acts[:phi]
    return out_ids, out_act
