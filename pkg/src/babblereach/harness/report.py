"""Summary tables over finished sweeps."""

import csv
from pathlib import Path

import numpy as np

TABLE_COLUMNS = ("train_size", "test_rmse", "explained_variance")
SUMMARY_COLUMNS = ("sweep_kind", "param_value", "goals", "success_rate",
                   "norm_jerk_median", "norm_jerk_mean", "norm_jerk_std",
                   "ee_error_median", "ee_error_mean", "ee_error_std")


def codec_table(results):
    """Held-out autoencoder accuracy per training size (from train_size sweeps).

    Rows are averaged over trials; the table is empty (header only) when no
    train_size sweep is present.
    """
    per_size = {}
    for res in results:
        if res.kind != "train_size":
            continue
        for s in res.codec_stats:
            per_size.setdefault(int(s["train_size"]), []).append(
                (s["test_rmse"], s["explained_variance"]))
    rows = []
    for size in sorted(per_size):
        vals = np.array(per_size[size], dtype=float)
        rows.append({"train_size": size, "test_rmse": float(vals[:, 0].mean()),
                     "explained_variance": float(vals[:, 1].mean())})
    return rows


def metric_summary(results):
    rows = []
    for res in results:
        for value in res.values():
            jerk, err = res.column("norm_jerk", value), res.column("ee_error", value)
            row = {"sweep_kind": res.kind, "param_value": value,
                   "goals": int(len(res.column("success", value))),
                   "success_rate": res.success_rate(value)}
            for name, x in (("norm_jerk", jerk), ("ee_error", err)):
                ok = x.size > 0
                row[f"{name}_median"] = float(np.median(x)) if ok else float("nan")
                row[f"{name}_mean"] = float(x.mean()) if ok else float("nan")
                row[f"{name}_std"] = float(x.std()) if ok else float("nan")
            rows.append(row)
    return rows


def _write(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, columns, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})


def report(results, out_dir=None):
    """Build (and optionally write) the codec accuracy table and metric summaries."""
    tables = {"codec_accuracy": codec_table(results), "summary": metric_summary(results)}
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write(out / "codec_accuracy.csv", TABLE_COLUMNS, tables["codec_accuracy"])
        _write(out / "summary.csv", SUMMARY_COLUMNS, tables["summary"])
    return tables


def format_table(rows, columns):
    """Plain-text rendering for the terminal."""
    if not rows:
        return "  ".join(columns)
    cells = [[f"{r[c]:.4g}" if isinstance(r[c], float) else str(r[c]) for c in columns]
             for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    lines += ["  ".join(x.ljust(w) for x, w in zip(row, widths)) for row in cells]
    return "\n".join(lines)
