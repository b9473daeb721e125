"""
How wide should a trajectory bundle be?
=======================================

Sweeps the bundle width on the five-joint arm and prints the summary table
that ``babblereach report`` would write.  Box plots and curves against the
goal's height land in ``sweep_out/plots``.  Takes a few minutes.
"""

from babblereach.harness.config import ExperimentConfig
from babblereach.harness.report import SUMMARY_COLUMNS, format_table, report
from babblereach.harness.sweep import run_sweep

cfg = ExperimentConfig(n_test_goals=100)
result = run_sweep(cfg, "phi", values=[1, 3, 6], out_dir="sweep_out")
print(format_table(report([result], "sweep_out")["summary"], SUMMARY_COLUMNS))
