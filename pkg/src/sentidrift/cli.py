"""Command-line interface.

Exit codes: 0 success (including "no anomalies" and "insufficient
data"), 1 fatal runtime error, 2 usage error, 3 anomalies found under
``detect --fail-on-anomaly``. Diagnostics go to stderr; data goes to
stdout or files.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

from . import __version__
from .aggregation import (
    read_window_scores_csv,
    score_series,
    write_topic_scores_csv,
    write_window_scores_csv,
)
from .detection import ThresholdConfig, analyze, write_before_after_csv, write_report_json
from .ingest import format_timestamp, load_comments, normalize_timestamp
from .pipeline import (
    ARTIFACTS,
    PipelineConfig,
    PipelineError,
    run_batch,
    score_stage,
)
from .reporting import (
    heatmap_matrix,
    reason_distribution,
    render_delta_svg,
    render_trajectory_svg,
    topic_trajectories,
    write_heatmap_csv,
    write_reason_distribution_csv,
    write_trajectories_csv,
)
from .scorer import load_lexicon, make_scorer
from .synth import generate_rows, rows_from_window_scores, write_corpus
from .windowing import WindowConfigError, WindowSpec, parse_duration, segment, sort_by_time
from . import detection

log = logging.getLogger("sentidrift")


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return value


def _duration(text: str) -> int:
    try:
        return parse_duration(text)
    except WindowConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _timestamp(text: str) -> int:
    try:
        return normalize_timestamp(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _io_parent(input_required: bool = True) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--input", required=input_required, metavar="PATH",
                   help="input comments file")
    p.add_argument("--format", choices=("csv", "jsonl"),
                   help="input format (default: inferred from extension)")
    p.add_argument("--quiet", action="store_true",
                   help="only errors on stderr")
    return p


def _scorer_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--scorer", choices=("passthrough", "lexicon"),
                   default="passthrough", help="scorer mode (default: passthrough)")
    p.add_argument("--lexicon", metavar="PATH",
                   help="lexicon file for --scorer lexicon "
                        "(default: $SENTIDRIFT_LEXICON, else built-in)")
    return p


def _window_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--window-mode", choices=("count", "time"), default="count",
                   help="window mode (default: count)")
    p.add_argument("--window-size", type=_positive_int, default=100, metavar="N",
                   help="comments per count window (default: 100)")
    p.add_argument("--window-duration", type=_duration, default=None, metavar="DUR",
                   help="time window length, e.g. 1d, 6h, 30m (default: 1d)")
    p.add_argument("--window-origin", type=_timestamp, default=None, metavar="TS",
                   help="time bucket origin (default: UTC midnight before first comment)")
    p.add_argument("--partial", choices=("drop", "keep"), default="drop",
                   help="final short count window policy (default: drop)")
    return p


def _detect_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--alpha", type=_positive_float, default=1.5,
                   help="threshold sensitivity multiplier (default: 1.5)")
    p.add_argument("--threshold-override", type=float, default=None, metavar="TAU",
                   help="fixed threshold instead of mu - alpha*sigma")
    p.add_argument("--history", type=_positive_int, default=None, metavar="N",
                   help="compute the threshold over the trailing N deltas only")
    return p


def _window_spec(args) -> WindowSpec:
    if args.window_mode == "time":
        duration = args.window_duration if args.window_duration is not None else parse_duration("1d")
        return WindowSpec(mode="time", duration_ms=duration,
                          origin_ms=args.window_origin, partial=args.partial)
    return WindowSpec(mode="count", size=args.window_size, partial=args.partial)


def _threshold_config(args) -> ThresholdConfig:
    return ThresholdConfig(alpha=args.alpha, override=args.threshold_override,
                           history=args.history)


def _lexicon_path(args) -> str | None:
    if getattr(args, "lexicon", None):
        return args.lexicon
    return os.environ.get("SENTIDRIFT_LEXICON") or None


def _scored_windows(args):
    """Shared front half: ingest, score, sort, segment, aggregate."""
    result = load_comments(args.input, args.format)
    lexicon_path = _lexicon_path(args)
    lexicon = load_lexicon(lexicon_path) if lexicon_path else None
    scorer = make_scorer(args.scorer, lexicon)
    scored, failures = score_stage(result.comments, scorer)
    if failures:
        log.warning("%d comment(s) could not be scored and were skipped", failures)
    windows = segment(sort_by_time(scored), _window_spec(args))
    return result, windows, score_series(windows)


def cmd_run(args) -> int:
    artifacts = ARTIFACTS
    if args.artifacts:
        artifacts = tuple(name.strip() for name in args.artifacts.split(",") if name.strip())
        unknown = set(artifacts) - set(ARTIFACTS)
        if unknown:
            args.parser.error(
                f"unknown artifact(s) {sorted(unknown)}; choose from {','.join(ARTIFACTS)}"
            )
    config = PipelineConfig(
        input=args.input,
        format=args.format,
        scorer_mode=args.scorer,
        lexicon_path=_lexicon_path(args),
        window=_window_spec(args),
        threshold=_threshold_config(args),
        artifacts=artifacts,
        out_dir=args.out,
        include_unlabeled=args.include_unlabeled,
    )
    summary = run_batch(config)
    if not args.quiet:
        json.dump(summary.as_dict(), sys.stdout, indent=2)
        sys.stdout.write("\n")
    return 0


def cmd_score(args) -> int:
    result = load_comments(args.input, args.format)
    lexicon_path = _lexicon_path(args)
    lexicon = load_lexicon(lexicon_path) if lexicon_path else None
    scorer = make_scorer(args.scorer, lexicon)
    scored, failures = score_stage(result.comments, scorer)
    if failures:
        log.warning("%d comment(s) could not be scored and were skipped", failures)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(("id", "timestamp", "label", "score", "topic"))
    for sc in scored:
        writer.writerow((
            sc.comment.id,
            format_timestamp(sc.comment.timestamp),
            sc.label.value,
            sc.score,
            sc.comment.topic,
        ))
    return 0


def cmd_windows(args) -> int:
    _, _, scores = _scored_windows(args)
    if args.topics:
        write_topic_scores_csv(scores, sys.stdout)
    else:
        write_window_scores_csv(scores, sys.stdout)
    return 0


def cmd_detect(args) -> int:
    if args.scores:
        with open(args.scores, encoding="utf-8", newline="") as fh:
            scores = read_window_scores_csv(fh)
    elif args.input:
        _, _, scores = _scored_windows(args)
    else:
        args.parser.error("detect needs --input or --scores")
    report = analyze(scores, _threshold_config(args))
    if args.before_after:
        write_before_after_csv(report, sys.stdout)
    else:
        write_report_json(report, sys.stdout)
    if args.fail_on_anomaly and report.anomalies:
        return 3
    return 0


def cmd_report(args) -> int:
    _, windows, scores = _scored_windows(args)
    report = analyze(scores, _threshold_config(args))
    if args.kind == "reasons":
        dist = reason_distribution(
            windows, [a.window_index for a in report.anomalies],
            all_labels=args.all_labels,
        )
        write_reason_distribution_csv(dist, sys.stdout)
    elif args.kind == "heatmap":
        write_heatmap_csv(heatmap_matrix(scores, args.include_unlabeled), sys.stdout)
    else:  # topics
        trajectories = topic_trajectories(
            scores, args.topic or None, include_unlabeled=args.include_unlabeled
        )
        write_trajectories_csv(trajectories, sys.stdout)
    return 0


def cmd_render(args) -> int:
    if args.scores:
        with open(args.scores, encoding="utf-8", newline="") as fh:
            scores = read_window_scores_csv(fh)
    elif args.input:
        _, _, scores = _scored_windows(args)
    else:
        args.parser.error("render needs --input or --scores")
    report = analyze(scores, _threshold_config(args))
    if args.chart == "trajectory":
        sys.stdout.write(render_trajectory_svg(scores, report))
    else:
        deltas = detection.delta_series(scores)
        sys.stdout.write(render_delta_svg(deltas, report.tau))
    return 0


def cmd_synth(args) -> int:
    if args.from_scores:
        with open(args.from_scores, encoding="utf-8", newline="") as fh:
            series = [ws.score for ws in read_window_scores_csv(fh)]
        rows = rows_from_window_scores(
            series, per_window=args.window_size, seed=args.seed,
            start_ms=args.start, spacing_ms=args.spacing,
        )
    else:
        rows = generate_rows(
            args.rows, seed=args.seed, start_ms=args.start, spacing_ms=args.spacing
        )
    if args.out == "-":
        from .synth import write_rows_csv, write_rows_jsonl

        if args.corpus_format == "csv":
            write_rows_csv(rows, sys.stdout)
        else:
            write_rows_jsonl(rows, sys.stdout)
        return 0
    count = write_corpus(args.out, rows, args.corpus_format)
    log.info("wrote %d rows to %s", count, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sentidrift",
        description="Window-level sentiment time series and "
                    "downward-shift anomaly detection for feedback streams.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(
        dest="command", required=True,
        metavar="{run,score,windows,detect,report,render}",
    )

    io = _io_parent()
    io_opt = _io_parent(input_required=False)
    scorer = _scorer_parent()
    window = _window_parent()
    det = _detect_parent()

    p = sub.add_parser("run", parents=[io, scorer, window, det],
                       help="full pipeline: ingest to artifacts")
    p.add_argument("--out", required=True, metavar="DIR", help="output directory")
    p.add_argument("--artifacts", default=None, metavar="LIST",
                   help=f"comma-separated subset of: {','.join(ARTIFACTS)}")
    p.add_argument("--include-unlabeled", action="store_true",
                   help="include the unlabeled topic bucket in topic reports")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("score", parents=[io, scorer],
                       help="emit per-comment labels and scores as CSV")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("windows", parents=[io, scorer, window],
                       help="emit window scores as CSV")
    p.add_argument("--topics", action="store_true",
                   help="emit the long-format per-topic CSV instead")
    p.set_defaults(func=cmd_windows)

    p = sub.add_parser("detect", parents=[io_opt, scorer, window, det],
                       help="emit the anomaly report")
    p.add_argument("--scores", metavar="PATH",
                   help="skip ingest and read a window-score CSV instead")
    p.add_argument("--before-after", action="store_true",
                   help="emit the before/after comparison CSV instead of JSON")
    p.add_argument("--fail-on-anomaly", action="store_true",
                   help="exit 3 when any window is flagged (for CI/alerting)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("report", parents=[io, scorer, window, det],
                       help="emit diagnostic CSVs")
    p.add_argument("--kind", choices=("reasons", "heatmap", "topics"),
                   default="reasons", help="which report to emit (default: reasons)")
    p.add_argument("--topic", action="append", metavar="NAME",
                   help="restrict --kind topics to this topic (repeatable)")
    p.add_argument("--all-labels", action="store_true",
                   help="count all labels in the reason distribution, not just negative")
    p.add_argument("--include-unlabeled", action="store_true")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("render", parents=[io_opt, scorer, window, det],
                       help="emit an SVG chart")
    p.add_argument("--chart", choices=("trajectory", "deltas"), default="trajectory")
    p.add_argument("--scores", metavar="PATH",
                   help="skip ingest and read a window-score CSV instead")
    p.set_defaults(func=cmd_render)

    # no help text on purpose: kept out of the advertised command list
    p = sub.add_parser("synth")
    p.add_argument("--rows", type=_positive_int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, metavar="PATH", help="'-' for stdout")
    p.add_argument("--corpus-format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--start", type=_timestamp, default=1_420_070_400_000,
                   help="first timestamp (default: 2015-01-01T00:00:00Z)")
    p.add_argument("--spacing", type=_duration, default=60_000,
                   help="time between comments (default: 1m)")
    p.add_argument("--from-scores", metavar="PATH",
                   help="build a corpus reproducing this window-score CSV")
    p.add_argument("--window-size", type=_positive_int, default=100)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_synth)

    for action in sub.choices.values():
        action.set_defaults(parser=action)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.ERROR if getattr(args, "quiet", False) else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (PipelineError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
