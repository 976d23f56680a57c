"""Window-level sentiment aggregation.

Scores are accumulated as integer counts (positives, negatives, total)
and divided once, so the mean is exact arithmetic until the final
division and ``S = (n_pos - n_neg) / n`` holds by construction. The
same counts back :attr:`WindowScore.exact_score`, the rational form
used wherever float rounding would blur an invariant.
"""

from __future__ import annotations

import csv
from array import array
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO, Iterable, Sequence

from . import kernels
from .windowing import Window


@dataclass(frozen=True, slots=True)
class TopicScore:
    count: int
    score: float
    npos: int
    nneg: int

    @property
    def exact_score(self) -> Fraction:
        return Fraction(self.npos - self.nneg, self.count)


@dataclass(slots=True)
class WindowScore:
    """Aggregated sentiment for one window, globally and per topic."""

    index: int
    count: int
    score: float
    npos: int
    nneg: int
    topic_scores: dict[str, TopicScore] = field(default_factory=dict)
    gap_before: bool = False
    partial: bool = False

    @property
    def exact_score(self) -> Fraction:
        """The window mean as the exact rational (npos - nneg) / count."""
        return Fraction(self.npos - self.nneg, self.count)


def aggregate_window(window: Window) -> WindowScore:
    """Mean sentiment of one window plus per-topic means.

    Straightforward counting loop; doubles as the reference
    implementation the kernel-backed :func:`score_series` is checked
    against.
    """
    if not window.members:
        raise ValueError(f"window {window.index} is empty")
    npos = nneg = 0
    per_topic: dict[str, list[int]] = {}
    for sc in window.members:
        topic = sc.comment.topic
        row = per_topic.get(topic)
        if row is None:
            per_topic[topic] = row = [0, 0, 0]
        row[0] += 1
        s = sc.score
        if s > 0:
            npos += 1
            row[1] += 1
        elif s < 0:
            nneg += 1
            row[2] += 1
    count = len(window.members)
    topic_scores = {
        t: TopicScore(c, (p - n) / c, p, n) for t, (c, p, n) in per_topic.items()
    }
    return WindowScore(
        index=window.index,
        count=count,
        score=(npos - nneg) / count,
        npos=npos,
        nneg=nneg,
        topic_scores=topic_scores,
        gap_before=window.gap_before,
        partial=window.partial,
    )


def aggregate_topic(window: Window, topic: str) -> float | None:
    """Mean score over the window members with the given topic.

    Absent (None) when the topic does not occur in the window.
    """
    count = 0
    total = 0
    for sc in window.members:
        if sc.comment.topic == topic:
            count += 1
            total += sc.score
    if count == 0:
        return None
    return total / count


def score_series(windows: Sequence[Window]) -> list[WindowScore]:
    """Aggregate every window, preserving order.

    Bulk path: members are flattened into score/topic arrays and the
    counting runs in the active kernel backend (see
    :mod:`sentidrift.kernels`).
    """
    if not windows:
        return []

    total = sum(len(w.members) for w in windows)
    scores = array("b", bytes(total))
    topic_ids = array("i", bytes(4 * total))
    starts = array("q", bytes(8 * (len(windows) + 1)))
    topic_of_id: list[str] = []
    id_of_topic: dict[str, int] = {}

    i = 0
    for k, window in enumerate(windows):
        if not window.members:
            raise ValueError(f"window {window.index} is empty")
        starts[k] = i
        for sc in window.members:
            scores[i] = sc.score
            topic = sc.comment.topic
            tid = id_of_topic.get(topic)
            if tid is None:
                tid = id_of_topic[topic] = len(topic_of_id)
                topic_of_id.append(topic)
            topic_ids[i] = tid
            i += 1
    starts[len(windows)] = i

    counts, npos, nneg, topic_rows = kernels.window_topic_stats(
        scores, topic_ids, len(topic_of_id), starts
    )

    out: list[WindowScore] = []
    row_i = 0
    n_rows = len(topic_rows)
    for k, window in enumerate(windows):
        topic_scores: dict[str, TopicScore] = {}
        while row_i < n_rows and topic_rows[row_i][0] == k:
            _, tid, c, p, n = topic_rows[row_i]
            topic_scores[topic_of_id[tid]] = TopicScore(c, (p - n) / c, p, n)
            row_i += 1
        c = counts[k]
        p = npos[k]
        n = nneg[k]
        out.append(
            WindowScore(
                index=window.index,
                count=c,
                score=(p - n) / c,
                npos=p,
                nneg=n,
                topic_scores=topic_scores,
                gap_before=window.gap_before,
                partial=window.partial,
            )
        )
    return out


WINDOW_CSV_HEADER = ("window", "count", "score", "gap_before")
TOPIC_CSV_HEADER = ("window", "topic", "count", "score")


def write_window_scores_csv(scores: Iterable[WindowScore], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(WINDOW_CSV_HEADER)
    for ws in scores:
        writer.writerow(
            (ws.index, ws.count, repr(ws.score), "true" if ws.gap_before else "false")
        )


def write_topic_scores_csv(scores: Iterable[WindowScore], fh: IO[str]) -> None:
    """Long-format per-topic export: one row per (window, topic)."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TOPIC_CSV_HEADER)
    for ws in scores:
        for topic in sorted(ws.topic_scores):
            ts = ws.topic_scores[topic]
            writer.writerow((ws.index, topic, ts.count, repr(ts.score)))


def read_window_scores_csv(fh: IO[str]) -> list[WindowScore]:
    """Read a window-score CSV back into (topic-less) WindowScores.

    Positive/negative counts are recovered from score * count, which is
    exact because window scores are rationals with that denominator.
    """
    reader = csv.reader(fh)
    header = next(reader, None)
    if header is None or [h.strip().lower() for h in header[:3]] != ["window", "count", "score"]:
        raise ValueError("expected window-score CSV header: window,count,score[,gap_before]")
    out: list[WindowScore] = []
    for row in reader:
        if not row:
            continue
        index = int(row[0])
        count = int(row[1])
        score = float(row[2])
        gap = len(row) > 3 and row[3].strip().lower() in ("true", "1", "yes")
        diff = round(score * count)
        out.append(
            WindowScore(
                index=index,
                count=count,
                score=score,
                npos=max(diff, 0),
                nneg=max(-diff, 0),
                gap_before=gap,
            )
        )
    return out
