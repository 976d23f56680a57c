"""Seeded synthetic corpora for tests, demos and benchmarks.

Everything here is driven by an explicit seed and produces identical
output across runs; no wall-clock, no global RNG state.
"""

from __future__ import annotations

import csv
import json
import random
from typing import IO, Iterable, Iterator, Sequence

from .ingest import CSV_FIELDS

TOPICS = (
    "Customer Service Issue",
    "Late Flight",
    "Cancelled Flight",
    "Lost Luggage",
    "Booking Problem",
    "Other",
)

_PHRASES = {
    "negative": (
        "flight delayed for hours and nobody said a word",
        "lost my luggage and support was useless",
        "worst experience, never flying with them again",
        "cancelled at the gate, absolute nightmare",
        "rude staff and a dirty cabin",
        "still waiting for my refund, unacceptable",
        "missed my connection because of the delay",
        "customer service line is a complete mess",
    ),
    "neutral": (
        "landed at the scheduled time",
        "boarding started from group three",
        "the seat map changed after check in",
        "used the mobile app to check in",
        "gate was changed to b14",
        "received the itinerary by email",
        "plane was a 737 this time",
        "connected through the central hub",
    ),
    "positive": (
        "great crew, smooth flight, thank you",
        "landed early and the staff were lovely",
        "best boarding experience so far",
        "comfortable seats and friendly service",
        "quick rebooking, really impressed",
        "excellent support on the phone",
        "loved the on board snacks",
        "upgrade made my day, wonderful trip",
    ),
}

_LABELS = ("negative", "neutral", "positive")


def generate_rows(
    n: int,
    seed: int = 0,
    start_ms: int = 1_420_070_400_000,  # 2015-01-01T00:00:00Z
    spacing_ms: int = 60_000,
    weights: tuple[float, float, float] = (0.47, 0.31, 0.22),
    topics: Sequence[str] = TOPICS,
) -> Iterator[tuple[str, int, str, str, str]]:
    """Yield (id, timestamp_ms, text, label, topic) rows, time-ordered."""
    rng = random.Random(seed)
    labels = rng.choices(_LABELS, weights=weights, k=n)
    for i, label in enumerate(labels):
        yield (
            f"c{i + 1:07d}",
            start_ms + i * spacing_ms,
            rng.choice(_PHRASES[label]),
            label,
            rng.choice(topics),
        )


def series_with_drops(
    length: int,
    drops: dict[int, tuple[float, float]],
    start: float,
) -> list[float]:
    """Build a window-score series on the 0.01 grid with chosen drops.

    ``drops`` maps window index k to the (previous, current) score pair
    to pin at (k-1, k). Every other step is a non-negative ramp toward
    the next pinned point, so the drop indices are the only windows
    whose score falls.
    """
    anchors: dict[int, int] = {0: round(start * 100)}
    drop_steps = set()
    for k in sorted(drops):
        prev, cur = drops[k]
        if k < 1 or k >= length:
            raise ValueError(f"drop index {k} out of range for length {length}")
        _pin(anchors, k - 1, round(prev * 100))
        _pin(anchors, k, round(cur * 100))
        drop_steps.add(k)

    hundredths = [0] * length
    points = sorted(anchors)
    if points[0] != 0:
        raise AssertionError("series must start at index 0")
    hundredths[0] = anchors[0]
    for a, b in zip(points, points[1:]):
        va, vb = anchors[a], anchors[b]
        steps = b - a
        if steps == 1 and b in drop_steps:
            hundredths[b] = vb
            continue
        rise = vb - va
        if rise < 0:
            raise ValueError(
                f"cannot ramp down from {va / 100} at {a} to {vb / 100} at {b}; "
                "only drop indices may fall"
            )
        level = va
        for i in range(1, steps + 1):
            level = va + rise * i // steps
            hundredths[a + i] = level
    last = points[-1]
    for i in range(last + 1, length):
        hundredths[i] = hundredths[last]
    return [h / 100 for h in hundredths]


def _pin(anchors: dict[int, int], index: int, value: int) -> None:
    if anchors.get(index, value) != value:
        raise ValueError(f"conflicting values pinned at window {index}")
    anchors[index] = value


def rows_from_window_scores(
    scores: Sequence[float],
    per_window: int = 100,
    seed: int = 0,
    start_ms: int = 1_420_070_400_000,
    spacing_ms: int = 60_000,
    topics: Sequence[str] = TOPICS,
    balance: int = 20,
) -> Iterator[tuple[str, int, str, str, str]]:
    """Comment rows whose count-window aggregation reproduces ``scores``.

    Each target score must be representable as an integer difference
    over ``per_window``; label order inside a window is shuffled with
    the seed.
    """
    rng = random.Random(seed)
    i = 0
    for k, score in enumerate(scores):
        diff = round(score * per_window)
        if abs(diff) > per_window or abs(score * per_window - diff) > 1e-9:
            raise ValueError(
                f"score {score} at window {k} is not an integer difference "
                f"over {per_window} comments"
            )
        pad = min(balance, (per_window - abs(diff)) // 2)
        npos = max(diff, 0) + pad
        nneg = max(-diff, 0) + pad
        labels = (
            ["positive"] * npos
            + ["negative"] * nneg
            + ["neutral"] * (per_window - npos - nneg)
        )
        rng.shuffle(labels)
        for label in labels:
            yield (
                f"c{i + 1:07d}",
                start_ms + i * spacing_ms,
                rng.choice(_PHRASES[label]),
                label,
                rng.choice(topics),
            )
            i += 1


def write_rows_csv(rows: Iterable[tuple[str, int, str, str, str]], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    writer.writerows(rows)


def write_rows_jsonl(rows: Iterable[tuple[str, int, str, str, str]], fh: IO[str]) -> None:
    for cid, ts, text, label, topic in rows:
        fh.write(json.dumps(
            {"id": cid, "timestamp": ts, "text": text, "label": label, "topic": topic}
        ))
        fh.write("\n")


def write_corpus(
    path: str, rows: Iterable[tuple[str, int, str, str, str]], format: str = "csv"
) -> int:
    """Write rows to a corpus file; returns the row count."""
    counted = _Counting(rows)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if format == "csv":
            write_rows_csv(counted, fh)
        elif format == "jsonl":
            write_rows_jsonl(counted, fh)
        else:
            raise ValueError(f"unknown corpus format {format!r}")
    return counted.count


class _Counting:
    def __init__(self, inner):
        self._inner = inner
        self.count = 0

    def __iter__(self):
        for item in self._inner:
            self.count += 1
            yield item
