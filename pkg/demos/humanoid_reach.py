"""
Single-start reaching with the five-joint arm
=============================================

The headline setting: 700 babbled reaches from a resting pose, a
five-dimensional reduced space, narrow bundles.  Reports success, jerk and
end-effector error over fifty held-out goals next to the map's own grid
spacing measured in the workspace.  Takes about a minute.
"""

import numpy as np

from babblereach.harness import pipeline
from babblereach.harness.config import ExperimentConfig
from babblereach.harness.sweep import evaluate
from babblereach.metrics import task_space_spacing

cfg = ExperimentConfig(n_test_goals=50)
art = pipeline.run_pipeline(cfg, "humanoid_run")
print("artifacts:", ", ".join(f"{k} {v[:10]}" for k, v in art.hashes.items()))
print("codec held-out RMSE %.4f" % art.codec.history["test_rmse"])

spacing = task_space_spacing(art.map, art.codec, cfg.arm_config)
print("grid spacing in the workspace: %.1f mm" % (1000 * spacing))

rows, _ = evaluate(art.map, art.codec, cfg.arm_config, art.dataset.test_goals[:50],
                   cfg.planner)
ok = np.array([r.success for r in rows])
err = np.array([r.ee_error for r in rows])
jerk = np.array([r.norm_jerk for r in rows])
print("success %d/%d" % (ok.sum(), len(ok)))
print("median error %.1f mm, median jerk %.4f" % (1000 * np.median(err[ok]), np.median(jerk)))
