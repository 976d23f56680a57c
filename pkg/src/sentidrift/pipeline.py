"""End-to-end orchestration: ingest, score, window, aggregate, detect, report.

``run_batch`` is the one-shot path behind the CLI; ``StreamRunner``
feeds arriving comments through the same stages incrementally and ends
up with the same flags. Artifacts are written atomically
(temp-then-rename) so a monitoring consumer never sees a torn file.
"""

from __future__ import annotations

import io
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from . import aggregation, detection, reporting
from .aggregation import WindowScore, score_series
from .detection import Decision, OnlineDetector, ThresholdConfig
from .ingest import Comment, IngestError, IngestResult, load_comments
from .scorer import (
    Lexicon,
    ScoredComment,
    Scorer,
    ScoringError,
    load_lexicon,
    make_scorer,
)
from .windowing import DAY_MS, Window, WindowSpec, segment, sort_by_time

logger = logging.getLogger(__name__)

ARTIFACTS = (
    "windows", "topics", "anomalies", "reasons", "heatmap", "trajectory", "deltas",
)

ARTIFACT_FILES = {
    "windows": ("window_scores.csv",),
    "topics": ("topic_scores.csv",),
    "anomalies": ("anomalies.json", "before_after.csv"),
    "reasons": ("reason_distribution.csv",),
    "heatmap": ("heatmap.csv",),
    "trajectory": ("trajectory.svg",),
    "deltas": ("deltas.svg",),
}


class PipelineError(RuntimeError):
    """Fatal pipeline failure, tagged with the stage that died."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineConfig:
    input: str
    format: str | None = None
    scorer_mode: str = "passthrough"
    lexicon_path: str | None = None
    window: WindowSpec = field(default_factory=WindowSpec)
    threshold: ThresholdConfig = field(default_factory=ThresholdConfig)
    artifacts: tuple[str, ...] = ARTIFACTS
    out_dir: str | None = None
    include_unlabeled: bool = False

    def __post_init__(self):
        unknown = set(self.artifacts) - set(ARTIFACTS)
        if unknown:
            raise ValueError(f"unknown artifact(s): {sorted(unknown)}")

    def echo(self) -> dict:
        w = self.window
        return {
            "input": self.input,
            "format": self.format,
            "scorer": self.scorer_mode,
            "lexicon": self.lexicon_path,
            "window_mode": w.mode,
            "window_size": w.size if w.mode == "count" else None,
            "window_duration_ms": w.duration_ms,
            "window_origin_ms": w.origin_ms,
            "partial": w.partial,
            "alpha": self.threshold.alpha,
            "threshold_override": self.threshold.override,
            "history": self.threshold.history,
            "artifacts": list(self.artifacts),
            "out_dir": self.out_dir,
            "include_unlabeled": self.include_unlabeled,
        }


@dataclass(slots=True)
class RunSummary:
    parsed: int
    accepted: int
    skipped: int
    duplicates: int
    windows: int
    anomalies: int
    tau: float | None
    mu_delta: float | None
    sigma_delta: float | None
    insufficient_data: bool
    config_echo: dict

    def as_dict(self) -> dict:
        return {
            "parsed": self.parsed,
            "accepted": self.accepted,
            "skipped": self.skipped,
            "duplicates": self.duplicates,
            "windows": self.windows,
            "anomalies": self.anomalies,
            "tau": None if self.tau is None else float(self.tau),
            "mu_delta": None if self.mu_delta is None else float(self.mu_delta),
            "sigma_delta": None if self.sigma_delta is None else float(self.sigma_delta),
            "insufficient_data": self.insufficient_data,
            "config_echo": self.config_echo,
        }


def resolve_scorer(config: PipelineConfig) -> Scorer:
    lexicon: Lexicon | None = None
    if config.scorer_mode == "lexicon" and config.lexicon_path:
        lexicon = load_lexicon(config.lexicon_path)
    return make_scorer(config.scorer_mode, lexicon)


def score_stage(
    comments: Iterable[Comment], scorer: Scorer
) -> tuple[list[ScoredComment], int]:
    """Score everything, skipping (with a warning) unscorable comments."""
    return scorer.score_many(comments)


def _check_out_dir(out_dir: str) -> Path:
    path = Path(out_dir)
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / f".write-probe-{os.getpid()}"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise PipelineError("setup", exc) from exc
    return path


def write_atomic(path: Path, content: str) -> None:
    tmp = path.with_name(path.name + f".tmp-{os.getpid()}")
    tmp.write_text(content, encoding="utf-8")
    os.replace(tmp, path)


def run_batch(config: PipelineConfig) -> RunSummary:
    """Execute the full chain and write the selected artifacts.

    Returns the run summary (also written as ``summary.json`` when an
    output directory is configured).
    """
    out_path = _check_out_dir(config.out_dir) if config.out_dir else None

    try:
        ingest: IngestResult = load_comments(config.input, config.format)
    except IngestError as exc:
        raise PipelineError("ingest", exc) from exc

    try:
        scorer = resolve_scorer(config)
    except (OSError, ValueError) as exc:
        raise PipelineError("scorer", exc) from exc
    scored, scoring_failures = score_stage(ingest.comments, scorer)

    windows = segment(sort_by_time(scored), config.window)
    scores = score_series(windows)
    report = detection.analyze(scores, config.threshold)

    if out_path is not None:
        _write_artifacts(out_path, config, windows, scores, report)

    summary = RunSummary(
        parsed=ingest.summary.parsed,
        accepted=len(scored),
        skipped=ingest.summary.skipped + scoring_failures,
        duplicates=ingest.summary.duplicates,
        windows=len(scores),
        anomalies=len(report.anomalies),
        tau=report.tau,
        mu_delta=report.mu_delta,
        sigma_delta=report.sigma_delta,
        insufficient_data=report.insufficient_data,
        config_echo=config.echo(),
    )
    if out_path is not None:
        write_atomic(out_path / "summary.json", json.dumps(summary.as_dict(), indent=2) + "\n")
    return summary


def _write_artifacts(out_path, config, windows, scores, report) -> None:
    selected = set(config.artifacts)

    def emit(name: str, content: str) -> None:
        write_atomic(out_path / name, content)

    def capture(writer, *args) -> str:
        buf = io.StringIO()
        writer(*args, buf)
        return buf.getvalue()

    if "windows" in selected:
        emit("window_scores.csv", capture(aggregation.write_window_scores_csv, scores))
    if "topics" in selected:
        emit("topic_scores.csv", capture(aggregation.write_topic_scores_csv, scores))
    if "anomalies" in selected:
        emit("anomalies.json", capture(detection.write_report_json, report))
        emit("before_after.csv", capture(detection.write_before_after_csv, report))
    if "reasons" in selected:
        flagged = [a.window_index for a in report.anomalies]
        dist = reporting.reason_distribution(windows, flagged)
        emit("reason_distribution.csv", capture(reporting.write_reason_distribution_csv, dist))
    if "heatmap" in selected:
        matrix = reporting.heatmap_matrix(scores, config.include_unlabeled)
        emit("heatmap.csv", capture(reporting.write_heatmap_csv, matrix))
    if "trajectory" in selected and scores:
        emit("trajectory.svg", reporting.render_trajectory_svg(scores, report))
    if "deltas" in selected:
        deltas = detection.delta_series(scores)
        if deltas.deltas:
            emit("deltas.svg", reporting.render_delta_svg(deltas, report.tau))


@dataclass(slots=True)
class StreamEvent:
    """One completed window plus the detector's verdict on it."""

    score: WindowScore
    decision: Decision | None


class StreamRunner:
    """Incremental pipeline: score, window and judge comments as they arrive.

    Comments are processed in arrival order; a timestamp running
    backwards by more than ``tolerance_ms`` only triggers a warning.
    Count windows close when full; time windows close when a comment
    lands in a later bucket (watermark), never on wall clock.
    """

    def __init__(self, config: PipelineConfig, tolerance_ms: int = 0):
        self.config = config
        self.tolerance_ms = tolerance_ms
        self._scorer = resolve_scorer(config)
        self._detector = OnlineDetector(config.threshold)
        self._buffer: list[ScoredComment] = []
        self._next_index = 0
        self._ordinal = 0
        self._max_ts: int | None = None
        self._origin: int | None = config.window.origin_ms
        self._bucket: int | None = None
        self._emitted_bucket: int | None = None
        self.window_scores: list[WindowScore] = []
        self.skipped = 0

    def feed(self, comment: Comment) -> list[StreamEvent]:
        if self._max_ts is not None and comment.timestamp < self._max_ts - self.tolerance_ms:
            logger.warning(
                "comment %s arrived %dms behind the stream high-water mark",
                comment.id, self._max_ts - comment.timestamp,
            )
        if self._max_ts is None or comment.timestamp > self._max_ts:
            self._max_ts = comment.timestamp

        try:
            sc = self._scorer.score(comment)
        except ScoringError as exc:
            self.skipped += 1
            logger.warning("%s", exc)
            return []

        spec = self.config.window
        if spec.mode == "count":
            self._buffer.append(sc)
            if len(self._buffer) == spec.size:
                return [self._close_count(partial=False)]
            return []

        if self._origin is None:
            self._origin = (comment.timestamp // DAY_MS) * DAY_MS
        bucket = (comment.timestamp - self._origin) // spec.duration_ms
        if self._bucket is None:
            self._bucket = bucket
        if bucket > self._bucket:
            event = self._close_time()
            self._bucket = bucket
            self._buffer.append(sc)
            return [event]
        self._buffer.append(sc)
        return []

    def finish(self) -> list[StreamEvent]:
        """Flush whatever window is still open (respecting partial policy)."""
        spec = self.config.window
        if not self._buffer:
            return []
        if spec.mode == "count":
            if spec.partial == "keep":
                return [self._close_count(partial=True)]
            self._buffer.clear()
            return []
        return [self._close_time()]

    def report(self) -> detection.AnomalyReport:
        return self._detector.report()

    def _close_count(self, partial: bool) -> StreamEvent:
        members = self._buffer
        self._buffer = []
        first = self._ordinal
        self._ordinal += len(members)
        window = Window(
            self._next_index, members, first_ordinal=first,
            last_ordinal=self._ordinal - 1, partial=partial,
        )
        return self._emit(window)

    def _close_time(self) -> StreamEvent:
        members = self._buffer
        self._buffer = []
        spec = self.config.window
        start = self._origin + self._bucket * spec.duration_ms
        gap = self._emitted_bucket is not None and self._bucket - self._emitted_bucket > 1
        window = Window(
            self._next_index, members, start_ms=start,
            end_ms=start + spec.duration_ms, gap_before=gap,
        )
        self._emitted_bucket = self._bucket
        return self._emit(window)

    def _emit(self, window: Window) -> StreamEvent:
        self._next_index += 1
        ws = aggregation.aggregate_window(window)
        self.window_scores.append(ws)
        return StreamEvent(ws, self._detector.update(ws))


def run_stream(
    config: PipelineConfig, comments: Iterable[Comment], tolerance_ms: int = 0
) -> Iterator[StreamEvent]:
    """Stream comments through the pipeline, yielding one event per window."""
    runner = StreamRunner(config, tolerance_ms)
    for comment in comments:
        yield from runner.feed(comment)
    yield from runner.finish()
