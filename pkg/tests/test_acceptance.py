"""Acceptance criteria, one test each, on the simulated five-joint arm.

Run with ``pytest tests/test_acceptance.py``; the terminal summary prints one
PASS/FAIL line per criterion.  The headline sweeps share one babbled dataset
and cache the trained codecs, and plan the full 300 held-out goals.
"""

import time
from dataclasses import replace

import numpy as np
import pytest

from babblereach.arm import JointState, default_arc, planar_arm
from babblereach.babble import BabbleProtocol, generate_dataset
from babblereach.bundles import BundleConfig, form_bundles
from babblereach.codec import (Autoencoder, TrainHyper, encode_states, fit_norm_stats,
                               loss_and_gradients, train_autoencoder)
from babblereach.harness import pipeline
from babblereach.harness.config import ExperimentConfig
from babblereach.harness.sweep import ArtifactCache, run_sweep
from babblereach.metrics import task_space_spacing
from babblereach.neural_map import NeuralMap, build_map, compute_resolution
from babblereach.planner import PlannerConfig, PlannerState, oracle_path, plan, \
    run_competition, spread_step

TEST_GOALS = 300
ACTS = ("tanh", "tanh", "tanh", "logistic")


@pytest.fixture(scope="module")
def base_cfg():
    return ExperimentConfig(n_test_goals=TEST_GOALS)


@pytest.fixture(scope="module")
def cache(base_cfg):
    return ArtifactCache(base_cfg)


def with_phi(cfg, phi, **kw):
    return replace(cfg, bundles=[BundleConfig(phi=phi, **kw)])


def medians(result, column):
    return {v: float(np.median(result.column(column, v))) for v in result.values()}


def means(result, column):
    return {v: float(np.mean(result.column(column, v))) for v in result.values()}


def fmt(d, scale=1.0, digits=4):
    return ", ".join(f"{k}: {scale * v:.{digits}f}" for k, v in d.items())


# ---------------------------------------------------------------------------
# 1. property suite

def _random_map(rng):
    n = int(rng.integers(3, 10))
    nmap = NeuralMap([1.0], 1.0, 0.5 / n, np.arange(n)[:, None])
    mask = rng.uniform(size=(n, n)) < 0.3
    np.fill_diagonal(mask, False)
    for i, j in zip(*np.nonzero(mask)):
        w = float(rng.uniform(0.05, 1.0))
        nmap.F[(int(i), int(j))] = w
        nmap.B[(int(j), int(i))] = w
    nmap.touch()
    return nmap


def _walk_ok(nmap, path):
    return (len(set(path)) == len(path)
            and all(nmap.forward_weight(a, b) > 0 for a, b in zip(path, path[1:])))


def test_criterion_1_property_suite(verdicts):
    t0 = time.perf_counter()
    failures = []

    # gradients against central differences, three seeds
    for seed in range(3):
        model = Autoencoder.initialise((10, 16, 5, 16, 10), ACTS, rng_seed=seed)
        X = np.random.default_rng(100 + seed).uniform(0, 1, (20, 10))
        _, grad = loss_and_gradients(model, X)
        eps = 1e-6
        fd = np.empty_like(grad)
        for k in range(grad.size):
            up, dn = model.theta.copy(), model.theta.copy()
            up[k] += eps
            dn[k] -= eps
            fd[k] = (loss_and_gradients(model, X, theta=up)[0]
                     - loss_and_gradients(model, X, theta=dn)[0]) / (2 * eps)
        rel = np.abs(grad - fd) / np.maximum(np.abs(fd), 1e-8)
        big = np.abs(fd) > 1e-8
        if not np.all(rel[big] <= 1e-4) or not np.all(np.abs(grad - fd)[~big] <= 1e-10):
            failures.append(f"gradient seed {seed} max rel {rel[big].max():.2e}")

    # a small babbled map on the planar arm
    arm = planar_arm((1.0, 1.0))
    start = JointState([0.0, 0.3])
    data = generate_dataset(BabbleProtocol([start], default_arc(arm), 40, 20, 30,
                                           rng_seed=2), arm)
    codec = train_autoencoder(data, fit_norm_stats(data), 2, TrainHyper(epochs=40))
    reduced = [encode_states(t.features, codec) for t in data.train]
    nmap = build_map(reduced, compute_resolution(reduced))
    norms = np.linalg.norm(nmap.centers, axis=1)
    if np.abs(norms - 1).max() > 1e-9:
        failures.append(f"center norm off by {np.abs(norms - 1).max():.1e}")
    form_bundles(nmap, reduced, BundleConfig(phi=3))
    F = nmap.forward_matrix().toarray()
    if not np.array_equal(F, nmap.backward_matrix().toarray().T) or not all(
            nmap.F[(j, i)] == w for (i, j), w in nmap.B.items()):
        failures.append("F differs from the transpose of B")

    before = nmap.content_hash()
    cfg = PlannerConfig(warmup_steps=100)
    for s, g in data.test_goals:
        r = plan(nmap, s, g, cfg, codec, arm)
        if not _walk_ok(nmap, r.neuron_path):
            failures.append(f"plan path {r.neuron_path} is not a forward walk")
    if nmap.content_hash() != before:
        failures.append("planning changed the map")

    # isolated goal neuron: beta fixed point for the reference parameters
    iso = NeuralMap([1.0], 1.0, 0.1, [[0], [1]])
    state = PlannerState.initial(2, 0, 1)
    for _ in range(20_000):
        spread_step(state, iso, PlannerConfig())
    if abs(state.beta[1] - 100 / 101) > 1e-6:
        failures.append(f"beta fixed point {state.beta[1]!r}")

    # oracle soundness on 100 random small maps
    rng = np.random.default_rng(11)
    succeeded = 0
    for _ in range(100):
        m = _random_map(rng)
        s, g = (int(x) for x in rng.choice(len(m), 2, replace=False))
        path, ok, *_ = run_competition(m, s, g, PlannerConfig(warmup_steps=50, max_step=40))
        succeeded += ok
        if not _walk_ok(m, path):
            failures.append(f"random-map path {path} is not a forward walk")
        if ok and oracle_path(m, s, g) is None:
            failures.append("plan succeeded where the oracle finds no path")

    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 300
    detail = (f"{len(failures)} violations {failures[:3]}; {succeeded}/100 random plans "
              f"succeeded; {elapsed:.0f} s")
    verdicts.check(1, "property suite", ok, detail)


# ---------------------------------------------------------------------------
# 2. codec accuracy against training size

def test_criterion_2_codec_accuracy_vs_train_size(verdicts, base_cfg, cache):
    t0 = time.perf_counter()
    rmse = {}
    for n in (100, 200, 300, 500, 700):
        codec = cache.codec(base_cfg.rng_seed, 5, n)
        rmse[n] = codec.history["test_rmse"]
    elapsed = time.perf_counter() - t0
    ok = (all(rmse[n] <= 0.05 for n in (300, 500, 700))
          and all(rmse[n] < rmse[100] for n in (300, 500, 700)) and elapsed <= 1800)
    verdicts.check(2, "codec test RMSE vs training size", ok,
                   f"RMSE {fmt(rmse)}; {elapsed:.0f} s")


# ---------------------------------------------------------------------------
# 3-6. sweeps

def test_criterion_3_dimension_trend(verdicts, base_cfg, cache):
    t0 = time.perf_counter()
    res = run_sweep(with_phi(base_cfg, 1), "dim", [3, 4, 5], cache=cache)
    jerk, err = medians(res, "norm_jerk"), medians(res, "ee_error")
    elapsed = time.perf_counter() - t0
    # the tolerance asks for strict ordering of the medians
    ok = (len(res.column("success", 3)) >= 100 and jerk["5"] < jerk["3"]
          and err["5"] < err["3"] and elapsed <= 3600)
    verdicts.check(3, "median jerk and error fall from |A'|=3 to 5", ok,
                   f"jerk {fmt(jerk)}; error mm {fmt(err, 1000, 2)}; {elapsed:.0f} s")


def test_criterion_4_bundle_width_trend(verdicts, base_cfg, cache):
    t0 = time.perf_counter()
    res = run_sweep(base_cfg, "phi", [1, 3, 6], cache=cache)
    jerk, err = medians(res, "norm_jerk"), medians(res, "ee_error")
    success = {v: res.success_rate(v) for v in res.values()}
    elapsed = time.perf_counter() - t0
    ok = err["6"] <= err["1"] and jerk["6"] >= jerk["1"] and elapsed <= 3600
    verdicts.check(4, "wider bundles: error not higher, jerk not lower", ok,
                   f"error mm {fmt(err, 1000, 2)}; jerk {fmt(jerk)}; "
                   f"success {fmt(success, digits=2)}; {elapsed:.0f} s")


def test_criterion_5_resolution_trend(verdicts, base_cfg, cache):
    res = run_sweep(with_phi(base_cfg, 3), "resolution", [1, 2, 3], cache=cache)
    jerk, err = medians(res, "norm_jerk"), medians(res, "ee_error")
    change = max(abs(err[v] - err["1"]) / err["1"] for v in err)
    ok = jerk["1"] < jerk["2"] < jerk["3"] and change <= 0.25
    verdicts.check(5, "coarser grid: jerk rises, error within 25%", ok,
                   f"jerk {fmt(jerk)}; error mm {fmt(err, 1000, 2)}; "
                   f"largest error change {100 * change:.0f}%")


def test_criterion_6_bundle_variant_trend(verdicts, base_cfg, cache):
    res = run_sweep(with_phi(base_cfg, 3), "bundle_variant", None, cache=cache)
    jerk = means(res, "norm_jerk")
    n = min(len(res.column("norm_jerk", v)) for v in res.values())
    ok = n >= 100 and (jerk["lnrConnections"] <= jerk["parConnections"]
                       <= jerk["fixConnections"])
    verdicts.check(6, "mean jerk lnr <= par <= fix", ok, f"mean jerk {fmt(jerk)}; {n} goals")


# ---------------------------------------------------------------------------
# 7. end to end

def test_criterion_7_end_to_end(verdicts, base_cfg, cache):
    cfg = with_phi(base_cfg, 3)
    seed = cfg.rng_seed
    codec = cache.codec(seed, 5)
    reduced = cache.reduced(seed, 5)
    nmap = pipeline.bundle(pipeline.map_for(cfg, reduced), reduced, cfg.bundles[0])
    spacing = task_space_spacing(nmap, codec, cfg.arm_config)
    res = run_sweep(cfg, "phi", [3], cache=cache)
    success = res.success_rate()
    ok_err = np.array([r.ee_error for r in res.rows if r.success])
    median_err = float(np.median(ok_err)) if ok_err.size else float("inf")
    p = cfg.planner
    reference = (p.eta_b, p.tau_b, p.lam, p.max_step) == (0.1, 1e3, 1e3, 80)
    ok = reference and success >= 0.9 and median_err < 2 * spacing
    verdicts.check(7, "end-to-end reaching", ok,
                   f"success {100 * success:.1f}% of {len(res.rows)}; median error "
                   f"{1000 * median_err:.2f} mm vs 2 x spacing {2000 * spacing:.2f} mm; "
                   f"warmup {p.warmup_steps}")
