"""Experiment configuration read from a JSON or YAML file.

Every section is optional; missing keys fall back to the defaults below.
Example (YAML)::

    arm: humanoid5            # or planar2
    rng_seed: 0
    out_dir: runs/demo
    babble:
      starts: single          # single, multi, or a list of joint vectors
      n_train_per_start: 700
      n_test_per_start: 300
      steps_per_trajectory: 50
      timestep: 0.1
      arc: {center: [0, 0, -0.25], radius: 0.55, normal: [0, 0, 1],
            angle_range: [-0.5, 1.0]}
    codec: {bottlenecks: [5], learning_rate: 0.1, epochs: 60, hidden: 16}
    map: {res_multipliers: [1]}
    bundles: [{phi: 1, eta_f: 0.05, tau_f: 1000, variant: lnrConnections}]
    planner: {eta_b: 0.1, tau_b: 1000, lam: 1000, max_step: 80, warmup_steps: 100}
    sweeps: {phi: [1, 3, 6, 10]}
    n_test_goals: 100         # null plans every test goal
"""

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np
import yaml

from ..arm import ArcSpec, JointState, default_arc, make_arm
from ..babble import BabbleProtocol, multi_start_poses
from ..bundles import VARIANTS, BundleConfig
from ..codec import TrainHyper
from ..errors import ConfigurationError
from ..planner import PlannerConfig

SWEEP_KINDS = ("dim", "train_size", "phi", "resolution", "bundle_variant")

DEFAULT_SWEEPS = {
    "dim": [3, 4, 5],
    "train_size": [100, 200, 300, 500, 700],
    "phi": [1, 3, 6, 10],
    "resolution": [1, 2, 3],
    "bundle_variant": list(VARIANTS),
}


@dataclass
class ExperimentConfig:
    arm: str = "humanoid5"
    starts: object = "single"
    n_train_per_start: int = 700
    n_test_per_start: int = 300
    steps_per_trajectory: int = 50
    timestep: float = 0.1
    arc: dict = None
    bottlenecks: list = field(default_factory=lambda: [5])
    codec: TrainHyper = field(default_factory=lambda: TrainHyper(epochs=60))
    res_multipliers: list = field(default_factory=lambda: [1.0])
    bundles: list = field(default_factory=lambda: [BundleConfig()])
    planner: PlannerConfig = field(default_factory=lambda: PlannerConfig(warmup_steps=100))
    sweeps: dict = field(default_factory=lambda: {k: list(v) for k, v in DEFAULT_SWEEPS.items()})
    n_test_goals: int = None
    record_wall_time: bool = False
    out_dir: str = "out"
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("bottlenecks", "res_multipliers", "bundles"):
            if not getattr(self, name):
                raise ConfigurationError(f"{name} must not be empty")
        unknown = set(self.sweeps) - set(SWEEP_KINDS)
        if unknown:
            raise ConfigurationError(f"unknown sweep kinds {sorted(unknown)}")
        for kind, values in self.sweeps.items():
            if not values:
                raise ConfigurationError(f"sweeps.{kind} must not be empty")
        if self.n_test_goals is not None and self.n_test_goals < 1:
            raise ConfigurationError("n_test_goals must be positive")
        make_arm(self.arm)

    # ---- derived objects -------------------------------------------------

    @property
    def arm_config(self):
        return make_arm(self.arm)

    @property
    def arc_spec(self):
        if self.arc is None:
            return default_arc(self.arm_config)
        return ArcSpec(**self.arc)

    def start_poses(self):
        arm = self.arm_config
        if isinstance(self.starts, str):
            if self.starts == "single":
                return [JointState(np.zeros(arm.n_joints))]
            if self.starts == "multi":
                return multi_start_poses(arm, self.arc_spec)
            raise ConfigurationError("starts must be 'single', 'multi' or a list of poses")
        return [JointState(s) for s in self.starts]

    def protocol(self, n_train_per_start=None):
        return BabbleProtocol(self.start_poses(), self.arc_spec,
                              n_train_per_start or self.n_train_per_start,
                              self.n_test_per_start, self.steps_per_trajectory,
                              self.timestep, self.rng_seed)

    def codec_hyper(self):
        return replace(self.codec, rng_seed=self.rng_seed)

    def with_seed(self, seed):
        return replace(self, rng_seed=int(seed))

    # ---- (de)serialisation ---------------------------------------------

    def to_dict(self):
        return {
            "arm": self.arm,
            "rng_seed": self.rng_seed,
            "out_dir": str(self.out_dir),
            "n_test_goals": self.n_test_goals,
            "record_wall_time": self.record_wall_time,
            "babble": {
                "starts": self.starts if isinstance(self.starts, str)
                else [list(map(float, s)) for s in self.starts],
                "n_train_per_start": self.n_train_per_start,
                "n_test_per_start": self.n_test_per_start,
                "steps_per_trajectory": self.steps_per_trajectory,
                "timestep": self.timestep,
                "arc": self.arc,
            },
            "codec": {"bottlenecks": list(self.bottlenecks), **self.codec.to_dict()},
            "map": {"res_multipliers": list(self.res_multipliers)},
            "bundles": [b.to_dict() for b in self.bundles],
            "planner": self.planner.to_dict(),
            "sweeps": {k: list(v) for k, v in self.sweeps.items()},
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d or {})
        known = {"arm", "rng_seed", "out_dir", "n_test_goals", "record_wall_time",
                 "babble", "codec", "map", "bundles", "planner", "sweeps"}
        extra = set(d) - known
        if extra:
            raise ConfigurationError(f"unknown config keys {sorted(extra)}")
        kw = {k: d[k] for k in ("arm", "rng_seed", "out_dir", "n_test_goals",
                                "record_wall_time") if k in d}
        babble = dict(d.get("babble") or {})
        for key in ("starts", "n_train_per_start", "n_test_per_start",
                    "steps_per_trajectory", "timestep", "arc"):
            if key in babble:
                kw[key] = babble.pop(key)
        _no_leftovers("babble", babble)

        codec = dict(d.get("codec") or {})
        if "bottlenecks" in codec:
            kw["bottlenecks"] = [int(b) for b in codec.pop("bottlenecks")]
        hyper_keys = {f.name for f in fields(TrainHyper)}
        kw["codec"] = TrainHyper(**{"epochs": 60,
                                    **{k: codec.pop(k) for k in list(codec)
                                       if k in hyper_keys}})
        _no_leftovers("codec", codec)

        mp = dict(d.get("map") or {})
        if "res_multipliers" in mp:
            kw["res_multipliers"] = [float(m) for m in mp.pop("res_multipliers")]
        _no_leftovers("map", mp)

        if "bundles" in d:
            kw["bundles"] = [BundleConfig(**b) for b in d["bundles"]]
        if "planner" in d:
            kw["planner"] = PlannerConfig(**{"warmup_steps": 100, **d["planner"]})
        if "sweeps" in d:
            sweeps = {k: list(v) for k, v in DEFAULT_SWEEPS.items()}
            sweeps.update(d["sweeps"] or {})
            kw["sweeps"] = sweeps
        try:
            return cls(**kw)
        except TypeError as exc:
            raise ConfigurationError(str(exc)) from exc


def _no_leftovers(section, d):
    if d:
        raise ConfigurationError(f"unknown keys in {section}: {sorted(d)}")


def load_config(path):
    """Read an ExperimentConfig from a ``.json``, ``.yaml`` or ``.yml`` file."""
    path = Path(path)
    text = path.read_text()
    try:
        data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigurationError(f"cannot parse {path}: {exc}") from exc
    if data is not None and not isinstance(data, dict):
        raise ConfigurationError(f"{path} must hold a mapping at the top level")
    return ExperimentConfig.from_dict(data)
