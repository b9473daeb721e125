"""The three training passes, run end to end with persisted artifacts.

Stages and the files they leave in the output directory:

=========  ====================
babble     ``dataset.json``
train      ``codec.json``
build-map  ``map.json``
bundle     ``map_bundled.json``
=========  ====================

``manifest.json`` records the SHA-256 of each file written.  A failing stage
raises :class:`StageError` tagged with its name; whatever was written before
it stays on disk.
"""

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

from .. import serialization
from ..babble import Dataset, generate_dataset, held_out_trajectories
from ..bundles import form_bundles
from ..codec import Autoencoder, encode_states, fit_norm_stats, train_autoencoder
from ..errors import BabbleReachError, StageError
from ..neural_map import NeuralMap, build_map, compute_resolution

log = logging.getLogger(__name__)

ARTIFACT_FILES = {
    "babble": "dataset.json",
    "train": "codec.json",
    "build-map": "map.json",
    "bundle": "map_bundled.json",
}


@dataclass
class PipelineArtifacts:
    dataset: Dataset
    codec: Autoencoder
    map: NeuralMap
    hashes: dict = field(default_factory=dict)
    out_dir: Path = None


class stage:
    """Context manager that tags any package or numeric error with a stage name."""

    def __init__(self, name):
        self.name = name

    def __enter__(self):
        log.info("stage %s", self.name)
        return self

    def __exit__(self, kind, exc, tb):
        if exc is None or isinstance(exc, StageError):
            return False
        if isinstance(exc, (BabbleReachError, ValueError, ArithmeticError, OSError,
                            KeyError)):
            raise StageError(self.name, exc) from exc
        return False


# ---- individual stages ------------------------------------------------------

def babble(cfg, n_train_per_start=None):
    with stage("babble"):
        return generate_dataset(cfg.protocol(n_train_per_start), cfg.arm_config)


def subset_dataset(dataset, n_train):
    """The first ``n_train`` training reaches of every start, same test goals."""
    p = dataset.protocol
    per = p.n_train_per_start
    if n_train > per:
        raise StageError("babble", f"asked for {n_train} reaches per start, have {per}")
    keep = [t for k in range(len(p.starts)) for t in dataset.train[k * per:k * per + n_train]]
    goals = [g for k in range(len(p.starts))
             for g in dataset.train_goals[k * per:k * per + n_train]]
    return Dataset(keep, dataset.test_goals, replace(p, n_train_per_start=n_train), goals)


def train(cfg, dataset, bottleneck=None, test_trajectories=None):
    """Fit the autoencoder; held-out error uses reference reaches to the test goals."""
    with stage("train"):
        if test_trajectories is None:
            test_trajectories = held_out_trajectories(dataset, cfg.arm_config)
        stats = fit_norm_stats(dataset)
        return train_autoencoder(dataset, stats, bottleneck or cfg.bottlenecks[0],
                                 cfg.codec_hyper(), test_trajectories)


def reduce(dataset, codec):
    return [encode_states(t.features, codec) for t in dataset.train]


def map_for(cfg, reduced, res_multiplier=None):
    with stage("build-map"):
        res = compute_resolution(reduced)
        mult = cfg.res_multipliers[0] if res_multiplier is None else res_multiplier
        return build_map(reduced, res, mult)


def bundle(nmap, reduced, bundle_cfg):
    """Bundle into a fresh copy so ``nmap`` itself is left untouched."""
    with stage("bundle"):
        fresh = NeuralMap(nmap.resolution, nmap.res_multiplier, nmap.scale, nmap.cells)
        return form_bundles(fresh, reduced, bundle_cfg)


# ---- end to end ---------------------------------------------------------------

def _persist(out, name, obj, hashes):
    path = out / ARTIFACT_FILES[name]
    with stage(name):
        hashes[ARTIFACT_FILES[name]] = obj.save(path)
        serialization.write_json(out / "manifest.json", hashes)


def run_pipeline(cfg, out_dir=None):
    """babble -> train -> build-map -> bundle, saving each artifact as it appears."""
    out = Path(out_dir or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    hashes = {}
    dataset = babble(cfg)
    _persist(out, "babble", dataset, hashes)
    codec = train(cfg, dataset)
    _persist(out, "train", codec, hashes)
    reduced = reduce(dataset, codec)
    nmap = map_for(cfg, reduced)
    _persist(out, "build-map", nmap, hashes)
    bundled = bundle(nmap, reduced, cfg.bundles[0])
    _persist(out, "bundle", bundled, hashes)
    return PipelineArtifacts(dataset, codec, bundled, hashes, out)


def load_artifact(out_dir, name):
    """Load one persisted artifact by stage name."""
    path = Path(out_dir) / ARTIFACT_FILES[name]
    loader = {"babble": Dataset, "train": Autoencoder,
              "build-map": NeuralMap, "bundle": NeuralMap}[name]
    with stage(name):
        if not path.exists():
            raise StageError(name, f"missing artifact {path}; run the {name} stage first")
        return loader.load(path)
