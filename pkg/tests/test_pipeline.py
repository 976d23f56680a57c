import io
import json
import random
from pathlib import Path

import pytest

from sentidrift.detection import ThresholdConfig, analyze
from sentidrift.ingest import load_comments
from sentidrift.pipeline import (
    ARTIFACT_FILES,
    ARTIFACTS,
    PipelineConfig,
    PipelineError,
    StreamRunner,
    run_batch,
    run_stream,
)
from sentidrift.synth import generate_rows, write_corpus, write_rows_csv
from sentidrift.windowing import DAY_MS, WindowSpec

from helpers import make_comment
from sentidrift.scorer import SentimentLabel


def corpus(tmp_path, rows=500, seed=1, name="in.csv") -> str:
    path = tmp_path / name
    write_corpus(str(path), generate_rows(rows, seed=seed), "csv")
    return str(path)


def read_all(out_dir: Path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted(out_dir.iterdir())}


class TestRunBatch:
    def test_writes_every_selected_artifact(self, tmp_path):
        out = tmp_path / "out"
        config = PipelineConfig(
            input=corpus(tmp_path), window=WindowSpec(size=50), out_dir=str(out)
        )
        summary = run_batch(config)
        expected = {name for art in ARTIFACTS for name in ARTIFACT_FILES[art]}
        expected.add("summary.json")
        assert set(p.name for p in out.iterdir()) == expected
        assert summary.windows == 10 and summary.accepted == 500

    def test_summary_json_matches_return_value(self, tmp_path):
        out = tmp_path / "out"
        config = PipelineConfig(input=corpus(tmp_path), out_dir=str(out))
        summary = run_batch(config)
        on_disk = json.loads((out / "summary.json").read_text())
        assert on_disk == summary.as_dict()

    def test_artifact_subset(self, tmp_path):
        out = tmp_path / "out"
        config = PipelineConfig(
            input=corpus(tmp_path), out_dir=str(out), artifacts=("windows", "anomalies")
        )
        run_batch(config)
        assert set(p.name for p in out.iterdir()) == {
            "window_scores.csv", "anomalies.json", "before_after.csv", "summary.json",
        }

    def test_empty_input_is_a_clean_run(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("id,timestamp,text,label,topic\n")
        out = tmp_path / "out"
        summary = run_batch(PipelineConfig(input=str(path), out_dir=str(out)))
        assert summary.windows == 0 and summary.insufficient_data
        assert summary.tau is None
        # CSV artifacts exist with headers; charts are skipped (nothing to draw)
        assert (out / "window_scores.csv").read_text() == "window,count,score,gap_before\n"
        assert not (out / "trajectory.svg").exists()

    def test_determinism_byte_identical(self, tmp_path):
        path = corpus(tmp_path, rows=800, seed=9)
        out = tmp_path / "out"
        config = PipelineConfig(input=path, out_dir=str(out))
        run_batch(config)
        first = read_all(out)
        run_batch(config)
        assert read_all(out) == first

    def test_no_temp_files_left_behind(self, tmp_path):
        out = tmp_path / "out"
        run_batch(PipelineConfig(input=corpus(tmp_path), out_dir=str(out)))
        assert not [p for p in out.iterdir() if ".tmp" in p.name]

    def test_missing_input_fails_with_stage_name(self, tmp_path):
        config = PipelineConfig(input=str(tmp_path / "nope.csv"), out_dir=None)
        with pytest.raises(PipelineError, match="ingest"):
            run_batch(config)

    def test_unwritable_out_dir_fails_before_work(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        config = PipelineConfig(input="unused", out_dir=str(blocker / "sub"))
        with pytest.raises(PipelineError, match="setup"):
            run_batch(config)

    def test_unknown_artifact_rejected(self):
        with pytest.raises(ValueError, match="unknown artifact"):
            PipelineConfig(input="x", artifacts=("windows", "dashboard"))

    def test_unlabeled_comments_skipped_by_passthrough(self, tmp_path):
        path = tmp_path / "in.csv"
        path.write_text(
            "id,timestamp,text,label,topic\n"
            "a,0,first,positive,\n"
            "b,1,second,,\n"
        )
        summary = run_batch(PipelineConfig(input=str(path)))
        assert summary.accepted == 1 and summary.skipped == 1

    def test_lexicon_mode_end_to_end(self, tmp_path):
        path = tmp_path / "in.csv"
        path.write_text(
            "id,timestamp,text,label,topic\n"
            "a,0,great great flight,,\n"
            "b,1,terrible delay,,\n"
        )
        config = PipelineConfig(
            input=str(path), scorer_mode="lexicon", window=WindowSpec(size=1)
        )
        summary = run_batch(config)
        assert summary.windows == 2 and summary.accepted == 2


def in_order_comments(n, seed=0):
    rng = random.Random(seed)
    labels = [rng.choice(list(SentimentLabel)) for _ in range(n)]
    return [
        make_comment(ts=i * 1000, label=labels[i], topic=rng.choice("ABC"), cid=f"c{i}")
        for i in range(n)
    ]


class TestRunStream:
    def test_two_hundred_comments_make_two_events(self):
        config = PipelineConfig(input="unused", window=WindowSpec(size=100))
        events = list(run_stream(config, in_order_comments(200)))
        assert len(events) == 200 // 100 == 2
        assert events[0].decision is None  # first window has no delta yet
        assert events[1].decision is not None

    def test_zero_comments_zero_events(self):
        config = PipelineConfig(input="unused")
        assert list(run_stream(config, [])) == []

    def test_partial_policy_on_finish(self):
        keep = PipelineConfig(input="unused", window=WindowSpec(size=100, partial="keep"))
        events = list(run_stream(keep, in_order_comments(150)))
        assert [e.score.count for e in events] == [100, 50]
        assert events[1].score.partial
        drop = PipelineConfig(input="unused", window=WindowSpec(size=100))
        assert [e.score.count for e in list(run_stream(drop, in_order_comments(150)))] == [100]

    def test_stream_flags_equal_batch_on_sorted_input(self, tmp_path):
        rows = list(generate_rows(1200, seed=21))
        path = tmp_path / "in.csv"
        with open(path, "w", newline="") as fh:
            write_rows_csv(rows, fh)
        config = PipelineConfig(input=str(path), window=WindowSpec(size=60))

        comments = load_comments(str(path)).comments
        runner = StreamRunner(config)
        for c in comments:
            runner.feed(c)
        runner.finish()
        online_report = runner.report()

        batch = run_batch(config)
        assert len(runner.window_scores) == batch.windows
        assert online_report.tau == batch.tau
        assert len(online_report.anomalies) == batch.anomalies

    def test_stream_report_matches_batch_analyze_exactly(self):
        comments = in_order_comments(700, seed=5)
        config = PipelineConfig(input="unused", window=WindowSpec(size=35))
        runner = StreamRunner(config)
        for c in comments:
            runner.feed(c)
        runner.finish()
        batch_report = analyze(runner.window_scores, ThresholdConfig())
        assert runner.report().as_dict() == batch_report.as_dict()

    def test_time_windows_close_on_watermark(self):
        config = PipelineConfig(
            input="unused", window=WindowSpec(mode="time", duration_ms=DAY_MS)
        )
        comments = [
            make_comment(ts=0, label=SentimentLabel.POSITIVE, cid="a"),
            make_comment(ts=1000, label=SentimentLabel.NEGATIVE, cid="b"),
            make_comment(ts=3 * DAY_MS, label=SentimentLabel.NEUTRAL, cid="c"),
        ]
        runner = StreamRunner(config)
        events = []
        for c in comments:
            events.extend(runner.feed(c))
        # day-0 window closed by the day-3 arrival, not by wall clock
        assert len(events) == 1 and events[0].score.count == 2
        events.extend(runner.finish())
        assert len(events) == 2
        assert events[1].score.gap_before  # days 1-2 were empty

    def test_out_of_order_warns_but_processes(self, caplog):
        config = PipelineConfig(input="unused", window=WindowSpec(size=3))
        comments = [
            make_comment(ts=5000, label=SentimentLabel.NEUTRAL, cid="a"),
            make_comment(ts=1000, label=SentimentLabel.NEUTRAL, cid="b"),
            make_comment(ts=6000, label=SentimentLabel.NEUTRAL, cid="c"),
        ]
        with caplog.at_level("WARNING"):
            events = list(run_stream(config, comments))
        assert len(events) == 1 and events[0].score.count == 3
        assert any("behind" in r.message for r in caplog.records)

    def test_tolerance_silences_small_jitter(self, caplog):
        config = PipelineConfig(input="unused", window=WindowSpec(size=2))
        comments = [
            make_comment(ts=5000, label=SentimentLabel.NEUTRAL, cid="a"),
            make_comment(ts=4500, label=SentimentLabel.NEUTRAL, cid="b"),
        ]
        with caplog.at_level("WARNING"):
            list(run_stream(config, comments, tolerance_ms=1000))
        assert not caplog.records

    def test_unscorable_comments_skipped_with_count(self):
        config = PipelineConfig(input="unused", window=WindowSpec(size=2))
        comments = [
            make_comment(ts=0, label=SentimentLabel.POSITIVE, cid="a"),
            make_comment(ts=1, label=None, cid="b"),
            make_comment(ts=2, label=SentimentLabel.NEGATIVE, cid="c"),
        ]
        runner = StreamRunner(config)
        events = []
        for c in comments:
            events.extend(runner.feed(c))
        assert runner.skipped == 1
        assert len(events) == 1 and events[0].score.count == 2
