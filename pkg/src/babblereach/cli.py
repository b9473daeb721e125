"""Command line entry point: ``babblereach <command> [--config FILE] [--seed N] [--out DIR]``.

Stage commands read the artifacts earlier stages left in ``--out``:

    babblereach babble    --config exp.yaml --out runs/a
    babblereach train     --config exp.yaml --out runs/a
    babblereach build-map --config exp.yaml --out runs/a
    babblereach bundle    --config exp.yaml --out runs/a
    babblereach plan      --config exp.yaml --out runs/a --limit 20
    babblereach sweep     --config exp.yaml --out runs/a --kind phi
    babblereach report    --out runs/a

``run`` does the four training stages in one go.  Errors exit with status 1
and a message tagged with the failing stage.
"""

import argparse
import logging
import sys
from pathlib import Path

from . import serialization
from .arm import JointState
from .errors import BabbleReachError, StageError
from .harness import pipeline
from .harness.config import SWEEP_KINDS, ExperimentConfig, load_config
from .harness.report import SUMMARY_COLUMNS, TABLE_COLUMNS, format_table, report
from .harness.sweep import SweepResult, evaluate, load_sweep, run_sweep


def _config(args):
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _out(args, cfg):
    out = Path(args.out or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _save(out, name, obj):
    digest = obj.save(out / pipeline.ARTIFACT_FILES[name])
    manifest = out / "manifest.json"
    hashes = serialization.read_json(manifest) if manifest.exists() else {}
    hashes[pipeline.ARTIFACT_FILES[name]] = digest
    serialization.write_json(manifest, hashes)
    print(f"{pipeline.ARTIFACT_FILES[name]}  sha256={digest}")


def cmd_babble(args, cfg, out):
    _save(out, "babble", pipeline.babble(cfg))


def cmd_train(args, cfg, out):
    data = pipeline.load_artifact(out, "babble")
    codec = pipeline.train(cfg, data, args.bottleneck)
    _save(out, "train", codec)
    print(f"test RMSE {codec.history['test_rmse']:.4f}")


def cmd_build_map(args, cfg, out):
    data = pipeline.load_artifact(out, "babble")
    codec = pipeline.load_artifact(out, "train")
    nmap = pipeline.map_for(cfg, pipeline.reduce(data, codec))
    _save(out, "build-map", nmap)
    print(f"{len(nmap)} neurons")


def cmd_bundle(args, cfg, out):
    data = pipeline.load_artifact(out, "babble")
    codec = pipeline.load_artifact(out, "train")
    nmap = pipeline.load_artifact(out, "build-map")
    bundled = pipeline.bundle(nmap, pipeline.reduce(data, codec), cfg.bundles[0])
    _save(out, "bundle", bundled)
    print(f"{len(bundled.F)} synapses")


def cmd_run(args, cfg, out):
    art = pipeline.run_pipeline(cfg, out)
    for name, digest in art.hashes.items():
        print(f"{name}  sha256={digest}")


def cmd_plan(args, cfg, out):
    data = pipeline.load_artifact(out, "babble")
    codec = pipeline.load_artifact(out, "train")
    nmap = pipeline.load_artifact(out, "bundle")
    if args.goal:
        start = JointState(args.start) if args.start else data.protocol.starts[0]
        goals = [(start, args.goal)]
    else:
        goals = data.test_goals[:args.limit or cfg.n_test_goals]
    with pipeline.stage("plan"):
        rows, plans = evaluate(nmap, codec, cfg.arm_config, goals, cfg.planner, "plan",
                               "", 0, cfg.record_wall_time)
    plan_dir = out / "plans"
    for k, result in enumerate(plans):
        if result is not None:
            result.save(plan_dir / f"plan_{k:04d}.json")
    SweepResult("plan", rows).write_csv(out / "plan_metrics.csv")
    ok = sum(r.success for r in rows)
    print(f"{ok}/{len(rows)} plans reached the goal neuron; details in {out / 'plan_metrics.csv'}")


def cmd_sweep(args, cfg, out):
    kinds = SWEEP_KINDS if args.kind == ["all"] else args.kind
    for kind in kinds:
        with pipeline.stage(f"sweep:{kind}"):
            res = run_sweep(cfg, kind, out_dir=out, trials=args.trials,
                            plots=not args.no_plots)
        for value in res.values():
            print(f"{kind}={value}: success {res.success_rate(value):.2f}")


def cmd_report(args, cfg, out):
    with pipeline.stage("report"):
        results = [load_sweep(out, k) for k in SWEEP_KINDS
                   if (out / f"sweep_{k}.csv").exists()]
        tables = report(results, out)
    print(format_table(tables["codec_accuracy"], TABLE_COLUMNS))
    print()
    print(format_table(tables["summary"], SUMMARY_COLUMNS))


COMMANDS = {
    "babble": (cmd_babble, "generate the babbling dataset"),
    "train": (cmd_train, "train the autoencoder"),
    "build-map": (cmd_build_map, "lay out the neural map"),
    "bundle": (cmd_bundle, "form trajectory bundles"),
    "run": (cmd_run, "babble, train, build-map and bundle in one go"),
    "plan": (cmd_plan, "plan reaches to test goals or to --goal"),
    "sweep": (cmd_sweep, "run parameter sweeps"),
    "report": (cmd_report, "summarise finished sweeps"),
}


def build_parser():
    parser = argparse.ArgumentParser(prog="babblereach", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON or YAML experiment config")
        p.add_argument("--seed", type=int, help="override rng_seed")
        p.add_argument("--out", help="artifact directory (default: config out_dir)")
        if name == "train":
            p.add_argument("--bottleneck", type=int)
        if name == "plan":
            p.add_argument("--goal", type=float, nargs=3, metavar=("X", "Y", "Z"))
            p.add_argument("--start", type=float, nargs="+", help="start joint angles")
            p.add_argument("--limit", type=int, help="number of test goals")
        if name == "sweep":
            p.add_argument("--kind", nargs="+", required=True,
                           choices=[*SWEEP_KINDS, "all"])
            p.add_argument("--trials", type=int, default=1)
            p.add_argument("--no-plots", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
                        format="%(levelname)s %(name)s: %(message)s")
    func = COMMANDS[args.command][0]
    try:
        with pipeline.stage("config"):
            cfg = _config(args)
            out = _out(args, cfg)
        with pipeline.stage(args.command):
            func(args, cfg, out)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BabbleReachError as exc:  # pragma: no cover - stage() wraps these
        print(f"error: [{args.command}] {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
