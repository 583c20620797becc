"""Command-line entry point.

Exit codes: 0 success, 1 validation failure (bad corpus or dataset),
2 usage error. Machine-readable output goes to stdout or files;
diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analytics, reports, study
from .assistant import SessionState, answer_question
from .corpus import CorpusError, load_synonyms, parse_corpus, validate
from .index import build_index
from .simulate import CohortConfig, GroupSpec, cohort_metadata, simulate_cohort


def _fail(message: str) -> int:
    print(message, file=sys.stderr)
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opnav",
        description="Operator knowledge navigator and training analytics toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", help="validate a corpus and report index stats")
    p_index.add_argument("corpus", help="corpus XML file")
    p_index.add_argument("--boost", type=float, default=3.0, help="keyword boost (>= 1)")

    p_ask = sub.add_parser("ask", help="one-shot question against a corpus")
    p_ask.add_argument("corpus", help="corpus XML file")
    p_ask.add_argument("question", help="question text")
    p_ask.add_argument("--synonyms", default=None, help="synonyms file (default: bundled)")
    p_ask.add_argument("--k", type=int, default=6, help="hits to consider")

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--config", required=True, help="TOML config file")

    p_analyze = sub.add_parser("analyze", help="learning-curve and rank-test analytics")
    analyze_sub = p_analyze.add_subparsers(dest="analysis", required=True)

    p_learning = analyze_sub.add_parser("learning", help="doubling rates and curve fit")
    p_learning.add_argument("dataset", help="operator matrix CSV")
    p_learning.add_argument("--out", default=".", help="output directory for CSV series")

    p_mwu = analyze_sub.add_parser("mwu", help="Mann-Whitney U comparison of two datasets")
    p_mwu.add_argument("dataset_a", help="group A CSV (matrix or value column)")
    p_mwu.add_argument("dataset_b", help="group B CSV (matrix or value column)")
    p_mwu.add_argument("--alpha", type=float, default=0.05)
    p_mwu.add_argument("--method", choices=("normal", "exact"), default="normal")
    p_mwu.add_argument("--out", default=".", help="output directory for CSV reports")

    p_sim = sub.add_parser("simulate", help="generate a seeded synthetic cohort")
    p_sim.add_argument("--config", default=None, help="TOML cohort config (default: study setup)")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", default=".", help="output directory")

    p_report = sub.add_parser("report", help="regenerate golden report files")
    p_report.add_argument(
        "--paper-tables",
        action="store_true",
        help="rebuild the reference study tables from the bundled datasets",
    )
    p_report.add_argument("--out", default=".", help="output directory")

    return parser


def cmd_index(args) -> int:
    try:
        tree = parse_corpus(Path(args.corpus).read_text(encoding="utf-8"))
    except (OSError, CorpusError) as exc:
        return _fail(f"corpus error: {exc}")
    violations = validate(tree)
    if violations:
        for v in violations:
            print(f"violation: {v.rule} node={v.node_id}: {v.message}", file=sys.stderr)
        return 1
    try:
        idx = build_index(tree, boost=args.boost)
    except ValueError as exc:
        return _fail(str(exc))
    print(json.dumps({
        "nodes": len(tree.nodes),
        "indexed_docs": idx.doc_count,
        "terms": len(idx.postings),
        "avg_doc_len": round(idx.avg_doc_len, 3),
        "corpus_version": tree.version,
    }, sort_keys=True, indent=2))
    return 0


def cmd_ask(args, parser) -> int:
    if not args.question.strip():
        parser.error("question must not be empty")
    try:
        tree = parse_corpus(Path(args.corpus).read_text(encoding="utf-8"))
        syn_text = (
            Path(args.synonyms).read_text(encoding="utf-8")
            if args.synonyms
            else study.data_text("synonyms.txt")
        )
        synonyms = load_synonyms(syn_text)
    except (OSError, CorpusError) as exc:
        return _fail(f"input error: {exc}")
    violations = validate(tree)
    if violations:
        return _fail(f"corpus invalid: {violations[0].rule} on {violations[0].node_id}")
    idx = build_index(tree)
    from .assistant import AssistantConfig
    from .service import _answer_payload

    answer, session = answer_question(
        SessionState(session_id="cli"), args.question, idx, tree, synonyms,
        AssistantConfig(max_alternates=max(args.k - 1, 0)),
    )
    print(json.dumps(_answer_payload(answer, session), sort_keys=True, indent=2))
    return 0


def cmd_serve(args) -> int:
    from .service import StartupError, load_config, start_service

    try:
        config = load_config(args.config)
        start_service(config)
    except (OSError, StartupError, CorpusError) as exc:
        return _fail(f"startup refused: {exc}")
    return 0


def _read_matrix_or_values(path: str) -> tuple[str, np.ndarray]:
    """Matrix CSVs have batch_* columns; flat sample CSVs a single value column."""
    text = Path(path).read_text(encoding="utf-8")
    first = text.splitlines()[0] if text.splitlines() else ""
    names = [c.strip() for c in first.split(",")]
    if any(n.startswith("batch_") for n in names):
        return "matrix", reports.read_setup_matrix(text)
    if names == ["value"]:
        values = [float(line) for line in text.splitlines()[1:] if line.strip()]
        if not values:
            raise reports.BadDataset("no values")
        return "values", np.asarray(values)
    raise reports.BadDataset(
        "expected batch_1..batch_n matrix columns or a single 'value' column"
    )


def cmd_analyze_learning(args) -> int:
    try:
        matrix = reports.read_setup_matrix(Path(args.dataset).read_text(encoding="utf-8"))
        summary = reports.learning_summary(matrix)
    except (OSError, reports.BadDataset, analytics.InsufficientData, ValueError) as exc:
        return _fail(f"dataset error: {exc}")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    analysis = analytics.doubling_rates(
        summary["mean_values"], xs=tuple(summary["levels"])
    )
    (out / "learning_rates.csv").write_text(reports.rates_table_csv(analysis), encoding="utf-8")
    curve = analytics.LearningCurveModel(
        b0=summary["curve"]["b0"], b1=summary["curve"]["b1"], b2=summary["curve"]["b2"],
        sse=summary["curve"]["sse"], degenerate=summary["curve"]["degenerate"],
    )
    lines = ["cumulative_production,mean_setup_minutes,fitted_minutes"]
    for level, mean in zip(summary["levels"], summary["mean_values"]):
        lines.append(
            f"{level},{mean:.6f},{analytics.predict(curve, level):.6f}"
        )
    (out / "learning_curve.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(reports.to_json(summary), end="")
    return 0


def _mwu_line(result: analytics.MwuResult) -> str:
    decision = "REJECT" if result.reject else "RETAIN"
    return (
        f"u={result.u:g} z={result.z:.6f} p={result.p_two_tailed:.6f} {decision}"
    )


def cmd_analyze_mwu(args) -> int:
    try:
        kind_a, data_a = _read_matrix_or_values(args.dataset_a)
        kind_b, data_b = _read_matrix_or_values(args.dataset_b)
    except (OSError, reports.BadDataset, ValueError) as exc:
        return _fail(f"dataset error: {exc}")
    if kind_a != kind_b:
        return _fail("datasets must both be matrices or both be value columns")

    try:
        if kind_a == "values":
            result = analytics.mann_whitney(
                list(data_a), list(data_b), alpha=args.alpha, method=args.method
            )
            print(_mwu_line(result))
            return 0
        report = analytics.compare_groups(
            data_a, data_b, alpha=args.alpha, method=args.method
        )
    except (analytics.EmptySample, analytics.ExactWithTies,
            analytics.InsufficientData, ValueError) as exc:
        return _fail(f"analysis error: {exc}")

    for level, test in zip(report.levels, report.tests):
        print(f"level={level} {_mwu_line(test)}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "rank_tests.csv").write_text(reports.rank_tests_csv(report), encoding="utf-8")
    (out / "scatter_levels.csv").write_text(
        reports.scatter_csv(data_a, data_b, report.levels, "group_a", "group_b"),
        encoding="utf-8",
    )
    (out / "learning_curves.csv").write_text(
        reports.curve_series_csv(report, "group_a", "group_b"), encoding="utf-8"
    )
    return 0


def _cohort_config_from_toml(path: str, seed: int) -> CohortConfig:
    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    section = raw.get("simulate", raw)
    groups = []
    for g in section.get("group", []):
        curve = analytics.LearningCurveModel(
            b0=float(g["b0"]), b1=float(g["b1"]), b2=float(g["b2"]), sse=0.0
        )
        groups.append(GroupSpec(name=str(g["name"]), curve=curve))
    if not groups:
        raise ValueError("config defines no [[simulate.group]] entries")
    return CohortConfig(
        groups=tuple(groups),
        operators_per_group=int(section.get("operators_per_group", 10)),
        batches=int(section.get("batches", 64)),
        noise_cv=float(section.get("noise_cv", 0.1233)),
        noise_model=str(section.get("noise_model", "gaussian")),
        seed=seed,
    )


def _default_cohort_config(seed: int) -> CohortConfig:
    curve_a, curve_b = study.reference_curves()
    return CohortConfig(
        groups=(
            GroupSpec(study.GROUP_TRADITIONAL, curve_a),
            GroupSpec(study.GROUP_ASSISTED, curve_b),
        ),
        seed=seed,
    )


def cmd_simulate(args) -> int:
    try:
        config = (
            _cohort_config_from_toml(args.config, args.seed)
            if args.config
            else _default_cohort_config(args.seed)
        )
    except (OSError, KeyError, ValueError) as exc:
        return _fail(f"config error: {exc}")
    dataset = simulate_cohort(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, matrix in dataset.groups.items():
        (out / f"{name}.csv").write_text(
            reports.write_setup_matrix(matrix), encoding="utf-8"
        )
    (out / "metadata.json").write_text(
        reports.to_json(cohort_metadata(config)), encoding="utf-8"
    )
    print(f"wrote {len(dataset.groups)} group files to {out}", file=sys.stderr)
    return 0


def cmd_report(args, parser) -> int:
    if not args.paper_tables:
        parser.error("nothing to report: pass --paper-tables")
    try:
        matrix_a = reports.read_setup_matrix(study.data_text("traditional.csv"))
        matrix_b = reports.read_setup_matrix(study.data_text("assisted.csv"))
    except (FileNotFoundError, reports.BadDataset) as exc:
        return _fail(f"bundled datasets missing or invalid: {exc}")
    report = analytics.compare_groups(matrix_a, matrix_b, levels=study.LEVELS)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "learning_rates_traditional.csv": reports.rates_table_csv(report.doubling_a),
        "learning_rates_assisted.csv": reports.rates_table_csv(report.doubling_b),
        "rank_tests.csv": reports.rank_tests_csv(report),
        "learning_curves.csv": reports.curve_series_csv(
            report, study.GROUP_TRADITIONAL, study.GROUP_ASSISTED
        ),
        "scatter_levels.csv": reports.scatter_csv(
            matrix_a, matrix_b, report.levels, study.GROUP_TRADITIONAL, study.GROUP_ASSISTED
        ),
        "summary.json": reports.to_json(
            reports.comparison_summary(report, study.GROUP_TRADITIONAL, study.GROUP_ASSISTED)
        ),
    }
    for name, content in files.items():
        (out / name).write_text(content, encoding="utf-8")
    print(f"wrote {len(files)} golden files to {out}", file=sys.stderr)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "index":
        return cmd_index(args)
    if args.command == "ask":
        return cmd_ask(args, parser)
    if args.command == "serve":
        return cmd_serve(args)
    if args.command == "analyze":
        if args.analysis == "learning":
            return cmd_analyze_learning(args)
        return cmd_analyze_mwu(args)
    if args.command == "simulate":
        return cmd_simulate(args)
    if args.command == "report":
        return cmd_report(args, parser)
    parser.error(f"unknown command {args.command!r}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
