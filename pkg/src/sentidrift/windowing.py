"""Segmentation of time-ordered scored comments into tumbling windows.

Two modes: a fixed number of successive comments per window, or fixed
elapsed-time buckets. Buckets are half-open ``[start, end)`` so nothing
is double counted; empty time buckets are skipped and the next emitted
window is flagged ``gap_before``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from operator import attrgetter
from typing import Iterable, Sequence

from .scorer import ScoredComment

DAY_MS = 86_400_000


class WindowConfigError(ValueError):
    """Invalid windowing configuration (zero size, bad duration, ...)."""


@dataclass(frozen=True)
class WindowSpec:
    """How to cut the stream into windows.

    ``mode`` is ``"count"`` (requires ``size``) or ``"time"`` (requires
    ``duration_ms``; ``origin_ms`` defaults to the UTC midnight at or
    before the first comment).
    """

    mode: str = "count"
    size: int = 100
    duration_ms: int | None = None
    origin_ms: int | None = None
    partial: str = "drop"

    def __post_init__(self):
        if self.mode not in ("count", "time"):
            raise WindowConfigError(f"unknown window mode {self.mode!r}")
        if self.partial not in ("drop", "keep"):
            raise WindowConfigError(f"unknown partial policy {self.partial!r}")
        if self.mode == "count":
            if self.size is None or self.size < 1:
                raise WindowConfigError("count windows need size >= 1")
        else:
            if self.duration_ms is None or self.duration_ms < 1:
                raise WindowConfigError("time windows need duration_ms >= 1")


@dataclass(slots=True)
class Window:
    """One non-empty segment of scored comments.

    Count windows carry ordinal bounds (positions in the retained,
    time-sorted sequence); time windows carry the half-open
    ``[start_ms, end_ms)`` interval.
    """

    index: int
    members: list[ScoredComment]
    first_ordinal: int | None = None
    last_ordinal: int | None = None
    start_ms: int | None = None
    end_ms: int | None = None
    partial: bool = False
    gap_before: bool = False


_by_timestamp = attrgetter("comment.timestamp")


def sort_by_time(comments: Iterable[ScoredComment]) -> list[ScoredComment]:
    """Stable sort by timestamp; equal timestamps keep input order."""
    return sorted(comments, key=_by_timestamp)


def segment_count(
    comments: Sequence[ScoredComment],
    n: int,
    partial_policy: str = "drop",
) -> list[Window]:
    """Cut a time-sorted sequence into consecutive chunks of exactly n.

    A final short chunk is dropped by default, or emitted with
    ``partial=True`` under the ``keep`` policy.
    """
    if n < 1:
        raise WindowConfigError("count windows need size >= 1")
    if partial_policy not in ("drop", "keep"):
        raise WindowConfigError(f"unknown partial policy {partial_policy!r}")

    windows: list[Window] = []
    total = len(comments)
    full = total // n
    for k in range(full):
        lo = k * n
        windows.append(Window(k, list(comments[lo:lo + n]), lo, lo + n - 1))
    rest = total - full * n
    if rest and partial_policy == "keep":
        lo = full * n
        windows.append(
            Window(full, list(comments[lo:]), lo, total - 1, partial=True)
        )
    return windows


def default_time_origin(comments: Sequence[ScoredComment]) -> int:
    """UTC midnight at or before the first comment's timestamp."""
    first = comments[0].comment.timestamp
    return (first // DAY_MS) * DAY_MS


def segment_time(
    comments: Sequence[ScoredComment],
    duration_ms: int,
    origin_ms: int | None = None,
) -> list[Window]:
    """Bucket a time-sorted sequence into fixed-duration windows.

    A comment at timestamp t lands in bucket floor((t - origin) /
    duration); a timestamp exactly on a boundary belongs to the later
    bucket. Buckets with no comments are not emitted; the window after
    a run of empty buckets is flagged ``gap_before``.
    """
    if duration_ms < 1:
        raise WindowConfigError("time windows need duration_ms >= 1")
    if not comments:
        return []
    origin = default_time_origin(comments) if origin_ms is None else origin_ms

    windows: list[Window] = []
    members: list[ScoredComment] = []
    bucket = prev_bucket = None
    for sc in comments:
        b = (sc.comment.timestamp - origin) // duration_ms
        if b == bucket:
            members.append(sc)
            continue
        if members:
            windows.append(_time_window(
                len(windows), members, origin, duration_ms, bucket, prev_bucket
            ))
            prev_bucket = bucket
        bucket = b
        members = [sc]
    windows.append(_time_window(
        len(windows), members, origin, duration_ms, bucket, prev_bucket
    ))
    return windows


def _time_window(index, members, origin, duration_ms, bucket, prev_bucket) -> Window:
    start = origin + bucket * duration_ms
    return Window(
        index,
        members,
        start_ms=start,
        end_ms=start + duration_ms,
        gap_before=prev_bucket is not None and bucket - prev_bucket > 1,
    )


def segment(comments: Sequence[ScoredComment], spec: WindowSpec) -> list[Window]:
    """Apply a :class:`WindowSpec` to an already time-sorted sequence."""
    if spec.mode == "count":
        return segment_count(comments, spec.size, spec.partial)
    return segment_time(comments, spec.duration_ms, spec.origin_ms)


_DURATION_RE = re.compile(r"^(\d+)\s*(ms|s|m|h|d)?$")
_DURATION_UNITS = {"ms": 1, "s": 1000, "m": 60_000, "h": 3_600_000, "d": DAY_MS}


def parse_duration(text: str) -> int:
    """Parse a duration such as ``1d``, ``6h``, ``30m``, ``45s``, ``250ms``.

    A bare integer means milliseconds.
    """
    m = _DURATION_RE.match(text.strip().lower())
    if not m:
        raise WindowConfigError(
            f"cannot parse duration {text!r}; use e.g. 1d, 6h, 30m, 45s, 250ms"
        )
    value = int(m.group(1)) * _DURATION_UNITS[m.group(2) or "ms"]
    if value < 1:
        raise WindowConfigError("duration must be at least 1ms")
    return value
