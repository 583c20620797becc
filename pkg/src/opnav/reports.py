"""CSV and JSON emission for analytics results.

All output is byte-stable: fixed float formats, fixed column orders, and
sorted JSON keys, so regenerated reports can be diffed against goldens.
Display convention: learning rates to 0.1 pp, mean rates to 0.01 pp,
z and p to six decimals.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict

import numpy as np

from .analytics import (
    ComparisonReport,
    DoublingAnalysis,
    LearningCurveModel,
    MwuResult,
    doubling_rates,
    fit_towill,
    CurvePoint,
)

VALUE_FMT = "{:.6f}"


class BadDataset(Exception):
    """Input CSV does not match the operator-matrix layout."""


def read_setup_matrix(text: str) -> np.ndarray:
    """Parse the operator CSV: header with batch_1..batch_n, one row each.

    A leading non-batch column (operator label) is accepted and ignored.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise BadDataset("empty CSV")
    batch_cols = [i for i, name in enumerate(header) if name.strip().startswith("batch_")]
    if not batch_cols:
        raise BadDataset("header has no batch_<n> columns")
    expected = [f"batch_{i}" for i in range(1, len(batch_cols) + 1)]
    got = [header[i].strip() for i in batch_cols]
    if got != expected:
        raise BadDataset(f"batch columns must be batch_1..batch_{len(batch_cols)} in order")

    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        try:
            rows.append([float(row[i]) for i in batch_cols])
        except (ValueError, IndexError) as exc:
            raise BadDataset(f"bad value on line {lineno}: {exc}")
    if not rows:
        raise BadDataset("no operator rows")
    return np.asarray(rows, dtype=float)


def write_setup_matrix(matrix: np.ndarray, operators: list[str] | None = None) -> str:
    matrix = np.asarray(matrix, dtype=float)
    n_ops, n_batches = matrix.shape
    if operators is None:
        operators = [f"op{i + 1:02d}" for i in range(n_ops)]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["operator"] + [f"batch_{i}" for i in range(1, n_batches + 1)])
    for name, row in zip(operators, matrix):
        writer.writerow([name] + [VALUE_FMT.format(v) for v in row])
    return buf.getvalue()


def rate_pct(rate: float) -> str:
    return f"{rate * 100:.1f}"


def mean_rate_pct(rate: float) -> str:
    return f"{rate * 100:.2f}"


def rates_table_csv(analysis: DoublingAnalysis) -> str:
    """Doubling-rate table: one row per level, closing row with the mean."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["cumulative_production", "avg_setup_minutes", "learning_rate_pct"])
    for i, (x, value) in enumerate(zip(analysis.doubling_xs, analysis.values)):
        rate = rate_pct(analysis.rates[i - 1]) if i > 0 else ""
        writer.writerow([x, f"{value:.2f}", rate])
    writer.writerow(["mean", "", mean_rate_pct(analysis.mean_rate)])
    return buf.getvalue()


def curve_series_csv(report: ComparisonReport, label_a: str, label_b: str) -> str:
    """Mean learning curves per group and their marginal difference."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["cumulative_production", f"mean_{label_a}", f"mean_{label_b}",
                     "marginal_difference"])
    for level, ma, mb, diff in zip(
        report.levels, report.mean_a, report.mean_b, report.marginal_differences
    ):
        writer.writerow([level, VALUE_FMT.format(ma), VALUE_FMT.format(mb),
                         VALUE_FMT.format(diff)])
    return buf.getvalue()


def scatter_csv(
    group_a: np.ndarray,
    group_b: np.ndarray,
    levels: tuple[int, ...],
    label_a: str,
    label_b: str,
) -> str:
    """Per-operator cumulative averages at each level, long format."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["level", "group", "operator", "value"])
    for label, matrix in ((label_a, np.asarray(group_a, float)),
                          (label_b, np.asarray(group_b, float))):
        cum = np.cumsum(matrix, axis=1) / np.arange(1, matrix.shape[1] + 1)
        for level in levels:
            for op in range(matrix.shape[0]):
                writer.writerow(
                    [level, label, f"op{op + 1:02d}", VALUE_FMT.format(cum[op, level - 1])]
                )
    return buf.getvalue()


def rank_tests_csv(report: ComparisonReport) -> str:
    """Per-level rank test table in the significance-report layout."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["level", "n1", "n2", "rank_sum_1", "rank_sum_2", "u",
                     "critical_u", "z", "p_two_tailed", "decision"])
    for level, test in zip(report.levels, report.tests):
        writer.writerow([
            level, test.n1, test.n2, f"{test.r1:g}", f"{test.r2:g}", f"{test.u:g}",
            "" if test.critical_u is None else test.critical_u,
            f"{test.z:.6f}", f"{test.p_two_tailed:.6f}",
            "reject" if test.reject else "retain",
        ])
    return buf.getvalue()


def mwu_dict(test: MwuResult) -> dict:
    out = asdict(test)
    out["z"] = round(test.z, 6)
    out["p_two_tailed"] = round(test.p_two_tailed, 6)
    return out


def doubling_dict(analysis: DoublingAnalysis) -> dict:
    return {
        "doubling_xs": list(analysis.doubling_xs),
        "values": [round(v, 6) for v in analysis.values],
        "rates_pct": [float(rate_pct(r)) for r in analysis.rates],
        "mean_rate_pct": float(mean_rate_pct(analysis.mean_rate)),
    }


def curve_dict(model: LearningCurveModel) -> dict:
    return {
        "b0": round(model.b0, 6),
        "b1": round(model.b1, 6),
        "b2": round(model.b2, 6),
        "sse": round(model.sse, 9),
        "degenerate": model.degenerate,
    }


def comparison_summary(report: ComparisonReport, label_a: str, label_b: str) -> dict:
    return {
        "levels": list(report.levels),
        "groups": {
            label_a: {"mean_values": [round(v, 6) for v in report.mean_a],
                      "doubling": doubling_dict(report.doubling_a),
                      "curve": curve_dict(report.curve_a)},
            label_b: {"mean_values": [round(v, 6) for v in report.mean_b],
                      "doubling": doubling_dict(report.doubling_b),
                      "curve": curve_dict(report.curve_b)},
        },
        "marginal_differences": [round(v, 6) for v in report.marginal_differences],
        "tests": {str(lv): mwu_dict(t) for lv, t in zip(report.levels, report.tests)},
    }


def learning_summary(matrix: np.ndarray, levels: tuple[int, ...] | None = None) -> dict:
    """Single-group analysis: mean curve at doubling levels, rates, fit."""
    matrix = np.asarray(matrix, dtype=float)
    if levels is None:
        horizon = matrix.shape[1]
        levels = tuple(2**i for i in range(horizon.bit_length()) if 2**i <= horizon)
    if matrix.shape[1] < max(levels):
        raise BadDataset(
            f"matrix covers {matrix.shape[1]} batches, needs {max(levels)}"
        )
    cum = np.cumsum(matrix, axis=1) / np.arange(1, matrix.shape[1] + 1)
    means = cum[:, np.asarray(levels) - 1].mean(axis=0)
    analysis = doubling_rates(list(means), xs=tuple(levels))
    curve = fit_towill([CurvePoint(int(lv), float(m)) for lv, m in zip(levels, means)])
    return {
        "levels": list(levels),
        "operators": int(matrix.shape[0]),
        "batches": int(matrix.shape[1]),
        "mean_values": [round(float(v), 6) for v in means],
        "doubling": doubling_dict(analysis),
        "curve": curve_dict(curve),
    }


def to_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"
