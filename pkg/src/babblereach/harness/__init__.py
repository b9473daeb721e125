"""Experiment driver: configuration, end-to-end pipeline, sweeps, reports, plots."""

from .config import SWEEP_KINDS, ExperimentConfig, load_config
from .pipeline import PipelineArtifacts, run_pipeline
from .report import report
from .sweep import SweepResult, SweepRow, run_sweep

__all__ = [
    "ExperimentConfig",
    "PipelineArtifacts",
    "SWEEP_KINDS",
    "SweepResult",
    "SweepRow",
    "load_config",
    "report",
    "run_pipeline",
    "run_sweep",
]
