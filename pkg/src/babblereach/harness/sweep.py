"""Parameter sweeps: rebuild what the swept value affects, then plan every test goal."""

import csv
import logging
import math
import time
from dataclasses import astuple, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .. import serialization
from ..babble import held_out_trajectories
from ..errors import BabbleReachError, ConfigurationError
from ..metrics import report as metric_report
from ..planner import plan
from . import pipeline
from .config import SWEEP_KINDS

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepRow:
    sweep_kind: str
    param_value: str
    trial: int
    goal_x: float
    goal_y: float
    goal_z: float
    success: bool
    norm_jerk: float
    ee_error: float
    steps_used: int
    wall_ms: int


COLUMNS = tuple(f.name for f in fields(SweepRow))
_PARSERS = {"sweep_kind": str, "param_value": str, "trial": int, "goal_x": float,
            "goal_y": float, "goal_z": float, "success": lambda s: s == "1",
            "norm_jerk": float, "ee_error": float, "steps_used": int, "wall_ms": int}


def _cell(value):
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def param_label(value):
    """Canonical text for a swept value (``2.0`` and ``2`` both become ``2``)."""
    if isinstance(value, (float, np.floating)) and float(value).is_integer():
        return str(int(value))
    return str(value)


@dataclass
class SweepResult:
    kind: str
    rows: list = field(default_factory=list)
    codec_stats: list = field(default_factory=list)

    def values(self):
        seen = []
        for r in self.rows:
            if r.param_value not in seen:
                seen.append(r.param_value)
        return seen

    def column(self, name, value=None, finite=True):
        vals = np.array([getattr(r, name) for r in self.rows
                         if value is None or r.param_value == param_label(value)], dtype=float)
        return vals[np.isfinite(vals)] if finite else vals

    def success_rate(self, value=None):
        return float(np.mean(self.column("success", value)))

    def write_csv(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(COLUMNS)
            for row in self.rows:
                writer.writerow([_cell(v) for v in astuple(row)])

    @classmethod
    def read_csv(cls, path, kind=None):
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = tuple(next(reader))
            if header != COLUMNS:
                raise ConfigurationError(f"{path}: unexpected columns {header}")
            rows = [SweepRow(*(_PARSERS[c](v) for c, v in zip(COLUMNS, line)))
                    for line in reader]
        return cls(kind or (rows[0].sweep_kind if rows else ""), rows)


class ArtifactCache:
    """Datasets and codecs shared between sweep values (and between sweeps).

    Entries are never modified after creation; maps are rebuilt per value.
    """

    def __init__(self, cfg):
        self.cfg = cfg
        self._data, self._held_out, self._codecs, self._reduced = {}, {}, {}, {}

    def dataset(self, seed, n_train=None):
        if seed not in self._data:
            self._data[seed] = pipeline.babble(self.cfg.with_seed(seed))
        full = self._data[seed]
        if n_train is None or n_train == full.protocol.n_train_per_start:
            return full
        return pipeline.subset_dataset(full, n_train)

    def held_out(self, seed):
        if seed not in self._held_out:
            with pipeline.stage("train"):
                self._held_out[seed] = held_out_trajectories(self.dataset(seed),
                                                             self.cfg.arm_config)
        return self._held_out[seed]

    def codec(self, seed, bottleneck, n_train=None):
        key = (seed, bottleneck, n_train)
        if key not in self._codecs:
            data = self.dataset(seed, n_train)
            self._codecs[key] = pipeline.train(self.cfg.with_seed(seed), data, bottleneck,
                                               self.held_out(seed))
        return self._codecs[key]

    def reduced(self, seed, bottleneck, n_train=None):
        key = (seed, bottleneck, n_train)
        if key not in self._reduced:
            self._reduced[key] = pipeline.reduce(self.dataset(seed, n_train),
                                                 self.codec(seed, bottleneck, n_train))
        return self._reduced[key]


def _setting(cfg, kind, value):
    """(bottleneck, n_train, res_multiplier, bundle config) for one swept value."""
    bottleneck = cfg.bottlenecks[0]
    n_train = None
    mult = cfg.res_multipliers[0]
    bcfg = cfg.bundles[0]
    if kind == "dim":
        bottleneck = int(value)
    elif kind == "train_size":
        n_train = int(value)
    elif kind == "resolution":
        mult = float(value)
    elif kind == "phi":
        bcfg = replace(bcfg, phi=int(value))
    elif kind == "bundle_variant":
        bcfg = replace(bcfg, variant=str(value))
    else:
        raise ConfigurationError(f"unknown sweep kind {kind!r}; use one of {SWEEP_KINDS}")
    return bottleneck, n_train, mult, bcfg


def evaluate(nmap, codec, arm, goals, planner_cfg, kind="", value="", trial=0,
             record_wall_time=False):
    """Plan each (start, goal) pair; failures become rows with NaN metrics."""
    rows, plans = [], []
    for start, goal in goals:
        t0 = time.perf_counter()
        try:
            result = plan(nmap, start, goal, planner_cfg, codec, arm)
            rep = metric_report(goal, result.joint_trajectory, arm)
            success, jerk, err, steps = (result.success, rep.norm_jerk,
                                         rep.end_effector_error, result.steps_used)
        except BabbleReachError as exc:
            log.warning("trial %s=%s goal %s failed: %s", kind, value, goal, exc)
            result, success, jerk, err, steps = None, False, math.nan, math.nan, 0
        ms = int(round(1000 * (time.perf_counter() - t0))) if record_wall_time else 0
        g = np.asarray(goal, dtype=float)
        rows.append(SweepRow(kind, param_label(value), trial, float(g[0]), float(g[1]),
                             float(g[2]), bool(success), float(jerk), float(err),
                             int(steps), ms))
        plans.append(result)
    return rows, plans


def run_sweep(cfg, kind, values=None, out_dir=None, trials=1, cache=None, plots=True):
    """Run one sweep and write ``sweep_<kind>.csv`` (plus plots) under ``out_dir``.

    Each trial reruns the whole pipeline with seed ``cfg.rng_seed + trial``.
    Per-goal failures are recorded as rows and never stop the sweep.
    """
    if kind not in SWEEP_KINDS:
        raise ConfigurationError(f"unknown sweep kind {kind!r}; use one of {SWEEP_KINDS}")
    values = list(cfg.sweeps[kind] if values is None else values)
    if not values:
        raise ConfigurationError(f"sweep {kind} has no values")
    cache = cache or ArtifactCache(cfg)
    arm = cfg.arm_config
    result = SweepResult(kind)
    for trial in range(trials):
        seed = cfg.rng_seed + trial
        for value in values:
            bottleneck, n_train, mult, bcfg = _setting(cfg, kind, value)
            codec = cache.codec(seed, bottleneck, n_train)
            reduced = cache.reduced(seed, bottleneck, n_train)
            nmap = pipeline.bundle(pipeline.map_for(cfg, reduced, mult), reduced, bcfg)
            goals = cache.dataset(seed).test_goals[:cfg.n_test_goals]
            rows, _ = evaluate(nmap, codec, arm, goals, cfg.planner, kind, value, trial,
                               cfg.record_wall_time)
            result.rows.extend(rows)
            h = codec.history
            result.codec_stats.append({
                "param_value": param_label(value), "trial": trial,
                "train_size": len(cache.dataset(seed, n_train).train),
                "bottleneck": bottleneck, "neurons": len(nmap),
                "test_rmse": h.get("test_rmse"),
                "explained_variance": h.get("test_explained_variance"),
            })
            log.info("sweep %s=%s trial %d: success %.2f", kind, value, trial,
                     result.success_rate(value))
    if out_dir is not None:
        save_sweep(result, out_dir, plots)
    return result


def save_sweep(result, out_dir, plots=True):
    out = Path(out_dir)
    result.write_csv(out / f"sweep_{result.kind}.csv")
    serialization.write_json(out / f"sweep_{result.kind}_codecs.json", result.codec_stats)
    if plots and result.rows:
        from .plots import plot_sweep
        plot_sweep(result, out / "plots")


def load_sweep(out_dir, kind):
    out = Path(out_dir)
    result = SweepResult.read_csv(out / f"sweep_{kind}.csv", kind)
    stats_path = out / f"sweep_{kind}_codecs.json"
    if stats_path.exists():
        result.codec_stats = serialization.read_json(stats_path)
    return result
