"""CSV output: comma separated, header row, LF endings, 17 significant digits."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if value is None:
        return ""
    return str(value)


def write_rows(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_rows(path) -> list[dict]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def write_error_curves(path, curves) -> Path:
    header = ["n", "mean_sq_sgd", "var_sq_sgd", "mean_sq_avg", "var_sq_avg", "mean_sq_subopt", "var_sq_subopt",
              "R", "seed"]
    rows = [(n, curves.mean_sq_sgd[i], curves.var_sq_sgd[i], curves.mean_sq_avg[i], curves.var_sq_avg[i],
             curves.mean_sq_subopt[i], curves.var_sq_subopt[i], curves.R, curves.seed)
            for i, n in enumerate(curves.checkpoints)]
    return write_rows(path, header, rows)


def write_bound_curve(path, curve) -> Path:
    return write_rows(path, ["n", "value", "theorem", "provenance"],
                      [(n, v, curve.theorem, curve.flag) for n, v in zip(curve.checkpoints, curve.values)])


def write_dominance(path, reports) -> Path:
    header = ["theorem", "quantity", "n", "empirical", "upper_cl", "bound", "pass", "confidence"]
    rows = [(r.theorem, r.quantity, n, r.empirical[i], r.upper_cl[i], r.bound[i], bool(r.passed_at[i]), r.confidence)
            for r in reports for i, n in enumerate(r.checkpoints)]
    return write_rows(path, header, rows)


def write_plot_data(path, report) -> Path:
    return write_rows(path, ["n", "empirical", "upper_cl", "bound"],
                      zip(report.checkpoints, report.empirical, report.upper_cl, report.bound))
