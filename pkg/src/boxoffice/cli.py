"""Command-line surface: clean, analyze, featurize, train, evaluate, predict.

All interchange is file based: record-per-line JSON datasets, CSV feature
matrices with a header row naming all 180 dimensions, and JSON documents
for reports, scalers and models.  Every command is deterministic for a
fixed seed and embeds the configuration that produced each artifact.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import features, ingest, pipeline
from .classify import DEFAULT_BUCKETS, ClassBuckets, evaluate
from .errors import BoxOfficeError
from .stats import MonthStat

USAGE_EXIT = 1
DATA_EXIT = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _write_json(path, document) -> None:
    Path(path).write_text(json.dumps(document, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


def _write_matrix(path, matrix, header) -> None:
    np.savetxt(path, np.asarray(matrix, dtype=float), delimiter=",",
               header=",".join(header), comments="", fmt="%.17g")


def _read_matrix(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def _write_labels(path, labels) -> None:
    np.savetxt(path, np.asarray(labels, dtype=int), delimiter=",",
               header="label", comments="", fmt="%d")


def _read_labels(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, dtype=int, ndmin=1)


def _write_csv_rows(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join("" if v is None else str(v) for v in row) + "\n")


def _load_cpi(args) -> ingest.CpiTable:
    if args.cpi:
        return ingest.CpiTable.from_text(args.cpi, getattr(args, "reference_year", None))
    return ingest.default_cpi_table(getattr(args, "reference_year", None))


def _parse_buckets(spec: str) -> ClassBuckets:
    return ClassBuckets.from_millions([float(v) for v in spec.split(",")])


def _month_stats_to_doc(month_statistics) -> dict:
    return {str(m): {"count": s.count, "mean_revenue": s.mean_revenue}
            for m, s in month_statistics.items()}


def _month_stats_from_doc(doc) -> dict[int, MonthStat]:
    return {int(m): MonthStat(count=e["count"], mean_revenue=e["mean_revenue"])
            for m, e in doc.items()}


# ---------------------------------------------------------------------------
# Commands

def cmd_clean(args) -> int:
    records, parse_errors = ingest.load_dataset(args.input, schema=args.schema)
    n_loaded = len(records)
    if args.year_from is not None or args.year_to is not None:
        records = ingest.filter_years(records, args.year_from, args.year_to)
    filtered_by_year = n_loaded - len(records)
    cleaned, report = ingest.clean(records)
    config = {
        "command": "clean", "input": str(args.input), "output": str(args.output),
        "schema": args.schema, "cpi": str(args.cpi) if args.cpi else "builtin",
        "year_from": args.year_from, "year_to": args.year_to,
        "adjust": not args.no_adjust,
    }
    if not args.no_adjust:
        table = _load_cpi(args)
        cleaned = ingest.adjust_dataset(cleaned, table)
        config["reference_year"] = table.reference_year
    ingest.serialize_dataset(cleaned, args.output)
    report_path = args.report or str(args.output) + ".report.json"
    _write_json(report_path, {
        "config": config,
        "parse_errors": [
            {"line": e.line, "record_id": e.record_id, "field": e.field,
             "message": e.message}
            for e in parse_errors
        ],
        "filtered_by_year": filtered_by_year,
        **report.to_dict(),
    })
    print(f"kept {report.kept} of {n_loaded} records "
          f"({report.dropped} dropped, {filtered_by_year} outside year filter, "
          f"{len(parse_errors)} parse errors)")
    return 0


def cmd_analyze(args) -> int:
    records, parse_errors = ingest.load_dataset(args.input)
    if parse_errors:
        print(f"warning: {len(parse_errors)} unparsable records skipped", file=sys.stderr)
    report = pipeline.analyze_dataset(records, include_dual_genre=not args.exclude_dual_genre)
    report["config"] = {
        "command": "analyze", "input": str(args.input),
        "output_dir": str(args.output_dir),
        "include_dual_genre": not args.exclude_dual_genre,
    }
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "analysis.json", report)

    if "year_totals" in report and isinstance(report["year_totals"], dict):
        _write_csv_rows(out / "year_totals.csv", ("year", "budget", "revenue"),
                        [(y, v["budget"], v["revenue"])
                         for y, v in report["year_totals"].items()])
    hist = report.get("money_histogram", {})
    if "bucket_low" in hist:
        _write_csv_rows(out / "money_histogram.csv",
                        ("bucket_low", "budget_count", "revenue_count"),
                        zip(hist["bucket_low"], hist["budget"], hist["revenue"]))
    _write_csv_rows(out / "month_stats.csv", ("month", "count", "mean_revenue"),
                    [(m, v["count"], v["mean_revenue"])
                     for m, v in report.get("month_stats", {}).items()])
    _write_csv_rows(out / "genre_counts.csv", ("genre", "count"),
                    sorted(report.get("genre_counts", {}).items()))
    rolling_rows = []
    for genre, series in report.get("genre_rolling_5y", {}).items():
        for year in series["revenue"]:
            rolling_rows.append((genre, year, series["revenue"][year],
                                 series["budget"].get(year)))
    _write_csv_rows(out / "genre_rolling.csv",
                    ("genre", "year", "rolling_mean_revenue", "rolling_mean_budget"),
                    rolling_rows)
    for name in ("rating_ks_matrix", "rating_cluster_ks_matrix", "genre_ks_matrix"):
        matrix = report.get(name)
        if isinstance(matrix, dict) and "labels" in matrix:
            labels = matrix["labels"]
            _write_csv_rows(out / f"{name}.csv", ["label"] + labels,
                            [[label] + row for label, row in zip(labels, matrix["p"])])
    print(f"analysis written to {out}")
    return 0


def cmd_featurize(args) -> int:
    records, parse_errors = ingest.load_dataset(args.input)
    if parse_errors:
        print(f"warning: {len(parse_errors)} unparsable records skipped", file=sys.stderr)
    buckets = _parse_buckets(args.buckets) if args.buckets else DEFAULT_BUCKETS
    cpi = _load_cpi(args) if args.power_revenue == "nominal" else None
    result = pipeline.featurize_dataset(
        records, seed=args.seed, test_fraction=args.test_fraction,
        buckets=buckets, power_revenue=args.power_revenue, cpi=cpi)

    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_matrix(out / "train_X.csv", result.train_x, features.FEATURE_NAMES)
    _write_labels(out / "train_y.csv", result.train_y)
    _write_matrix(out / "test_X.csv", result.test_x, features.FEATURE_NAMES)
    _write_labels(out / "test_y.csv", result.test_y)
    _write_json(out / "scaler.json", result.scaler.to_dict())
    _write_json(out / "featurize.json", {
        "config": {
            "command": "featurize", "input": str(args.input),
            "output_dir": str(args.output_dir), "seed": args.seed,
            "test_fraction": args.test_fraction,
            "buckets": args.buckets or "default",
            "power_revenue": args.power_revenue,
        },
        "class_counts": result.class_counts,
        "train_rows": len(result.train_ids),
        "test_rows": len(result.test_ids),
        "month_stats": _month_stats_to_doc(result.month_stats),
        "train_ids": result.train_ids,
        "test_ids": result.test_ids,
    })
    print(f"featurized {len(result.train_ids)} train / {len(result.test_ids)} test rows "
          f"of width {result.train_x.shape[1]} into {out}")
    return 0


def cmd_train(args) -> int:
    feat = Path(args.features)
    train_x = _read_matrix(feat / "train_X.csv")
    train_y = _read_labels(feat / "train_y.csv")
    model = pipeline.train_model(args.kind, train_x, train_y, seed=args.seed)
    document = pipeline.model_to_document(model, args.kind, args.seed)
    document["config"] = {
        "command": "train", "features": str(args.features),
        "kind": args.kind, "seed": args.seed,
    }
    _write_json(args.model, document)
    print(f"trained {args.kind} model on {train_x.shape[0]} rows -> {args.model}")
    return 0


def cmd_evaluate(args) -> int:
    model = pipeline.model_from_document(json.loads(Path(args.model).read_text()))
    feat = Path(args.features)
    test_x = _read_matrix(feat / "test_X.csv")
    test_y = _read_labels(feat / "test_y.csv")
    report = evaluate(model, test_x, test_y)
    document = {
        "config": {"command": "evaluate", "model": str(args.model),
                   "features": str(args.features)},
        **report.to_dict(),
    }
    _write_json(args.output, document)
    print(f"bingo {report.bingo:.4f}  one_away {report.one_away:.4f} "
          f"on {int(report.confusion.sum())} test rows")
    return 0


def cmd_predict(args) -> int:
    model = pipeline.model_from_document(json.loads(Path(args.model).read_text()))
    feat = Path(args.features)
    scaler = features.ScalingParams.from_dict(
        json.loads((feat / "scaler.json").read_text()))
    featurize_doc = json.loads((feat / "featurize.json").read_text())
    month_statistics = _month_stats_from_doc(featurize_doc["month_stats"])

    history, parse_errors = ingest.load_dataset(args.history)
    if parse_errors:
        print(f"warning: {len(parse_errors)} unparsable history records skipped",
              file=sys.stderr)
    index = features.build_history_index(history)

    movie_obj = json.loads(Path(args.movie).read_text())
    movie_errors: list = []
    record = ingest._record_from_object(movie_obj, "detail", 1, movie_errors)
    if record is None:
        raise BoxOfficeError(
            "movie document is invalid: "
            + "; ".join(e.message for e in movie_errors))

    label, scores = pipeline.predict_movie(model, record, index, month_statistics, scaler)
    document = {
        "config": {"command": "predict", "model": str(args.model),
                   "features": str(args.features), "history": str(args.history),
                   "movie": str(args.movie)},
        "label": label,
        "class_scores": [float(s) for s in scores],
    }
    if args.output:
        _write_json(args.output, document)
    print(json.dumps({"label": label, "class_scores": document["class_scores"]}))
    return 0


# ---------------------------------------------------------------------------
# Argument wiring

def build_parser() -> _Parser:
    parser = _Parser(prog="boxoffice",
                     description="Box-office dataset pipeline: clean, analyze, "
                                 "featurize, train, evaluate, predict.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("clean", help="parse, filter, clean and inflation-adjust a dataset")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--cpi", help="two-column (year, index) CPI table; builtin by default")
    p.add_argument("--reference-year", type=int, help="target year for adjustment")
    p.add_argument("--schema", choices=("detail", "summary"), default="detail")
    p.add_argument("--year-from", type=int)
    p.add_argument("--year-to", type=int)
    p.add_argument("--no-adjust", action="store_true")
    p.add_argument("--report", help="clean-report path (default: OUTPUT.report.json)")
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("analyze", help="run the statistical association battery")
    p.add_argument("--input", required=True)
    p.add_argument("--output-dir", required=True)
    p.add_argument("--exclude-dual-genre", action="store_true",
                   help="drop movies carrying both genres from the Sci-Fi/Family test")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("featurize", help="build balanced train/test feature matrices")
    p.add_argument("--input", required=True)
    p.add_argument("--output-dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--test-fraction", type=float, default=0.3)
    p.add_argument("--buckets", help="class boundaries in millions, e.g. 1,10,20,...")
    p.add_argument("--power-revenue", choices=("adjusted", "nominal"), default="adjusted")
    p.add_argument("--cpi", help="CPI table (needed for --power-revenue nominal)")
    p.add_argument("--reference-year", type=int)
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("train", help="train an ordinal model on featurized data")
    p.add_argument("--features", required=True, help="featurize output directory")
    p.add_argument("--kind", choices=pipeline.MODEL_KINDS, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model", required=True, help="model document output path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="bingo / one-class-away accuracy on the test split")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="predict the revenue class of one movie document")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True, help="featurize output directory")
    p.add_argument("--history", required=True, help="cleaned dataset for prior credits")
    p.add_argument("--movie", required=True, help="one detail-schema JSON object")
    p.add_argument("--output")
    p.set_defaults(func=cmd_predict)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    try:
        return args.func(args)
    except (BoxOfficeError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
