"""Diagnostic artifacts: reason distributions, topic views, SVG charts.

Every renderer here is a pure function of its inputs and formats
numbers with fixed precision, so identical inputs produce byte-identical
output. Charts are standalone SVG documents on a 960x480 viewBox.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

from .aggregation import WindowScore
from .detection import AnomalyReport, DeltaSeries
from .ingest import UNLABELED
from .scorer import SentimentLabel
from .windowing import Window

logger = logging.getLogger(__name__)

VIEW_W = 960
VIEW_H = 480
MARGIN_L = 60
MARGIN_R = 20
MARGIN_T = 20
MARGIN_B = 40


@dataclass(slots=True)
class ReasonShare:
    anomalous_count: int
    normal_count: int
    anomalous_proportion: float | None
    normal_proportion: float | None


@dataclass(slots=True)
class ReasonDistribution:
    """Topic mix of (by default, negative) comments: flagged vs normal windows."""

    topics: dict[str, ReasonShare]
    anomalous_comment_count: int
    normal_comment_count: int


def reason_distribution(
    windows: Sequence[Window],
    flagged_indices: Iterable[int],
    all_labels: bool = False,
) -> ReasonDistribution:
    """Compare the per-topic complaint mix inside and outside anomalies.

    Counts negatively-labeled comments (or all comments with
    ``all_labels``), partitioned by whether their window was flagged.
    Proportions are within-partition and absent when a partition is
    empty.
    """
    flagged = set(flagged_indices)
    anom: dict[str, int] = {}
    norm: dict[str, int] = {}
    for window in windows:
        bucket = anom if window.index in flagged else norm
        for sc in window.members:
            if all_labels or sc.label is SentimentLabel.NEGATIVE:
                topic = sc.comment.topic
                bucket[topic] = bucket.get(topic, 0) + 1
    total_anom = sum(anom.values())
    total_norm = sum(norm.values())
    topics = sorted(
        set(anom) | set(norm),
        key=lambda t: (-(anom.get(t, 0) + norm.get(t, 0)), t),
    )
    shares = {}
    for t in topics:
        a = anom.get(t, 0)
        n = norm.get(t, 0)
        shares[t] = ReasonShare(
            anomalous_count=a,
            normal_count=n,
            anomalous_proportion=a / total_anom if total_anom else None,
            normal_proportion=n / total_norm if total_norm else None,
        )
    return ReasonDistribution(shares, total_anom, total_norm)


def _topics_by_volume(scores: Sequence[WindowScore], include_unlabeled: bool) -> list[str]:
    volume: dict[str, int] = {}
    for ws in scores:
        for topic, ts in ws.topic_scores.items():
            volume[topic] = volume.get(topic, 0) + ts.count
    if not include_unlabeled:
        volume.pop(UNLABELED, None)
    return sorted(volume, key=lambda t: (-volume[t], t))


def topic_trajectories(
    scores: Sequence[WindowScore],
    topics: Sequence[str] | None = None,
    include_unlabeled: bool = False,
) -> dict[str, list[tuple[int, float | None]]]:
    """Per-topic score series over the emitted windows.

    Windows where a topic does not occur contribute ``(index, None)``
    gaps. Requesting a topic absent from the data is an error, except
    when there are no windows at all (empty series, warning).
    """
    known = _topics_by_volume(scores, include_unlabeled=True)
    if topics is None:
        requested = [t for t in known if include_unlabeled or t != UNLABELED]
    else:
        requested = list(topics)
        if not scores:
            logger.warning("no windows: returning empty trajectories for %s", requested)
            return {t: [] for t in requested}
        unknown = [t for t in requested if t not in known]
        if unknown:
            raise ValueError(
                f"unknown topic(s) {unknown}; known topics: {known}"
            )
    out: dict[str, list[tuple[int, float | None]]] = {}
    for t in requested:
        series = []
        for ws in scores:
            ts = ws.topic_scores.get(t)
            series.append((ws.index, None if ts is None else ts.score))
        out[t] = series
    return out


@dataclass(slots=True)
class HeatmapMatrix:
    """Dense topic x window score grid; None marks unseen pairs."""

    topics: list[str]
    windows: list[int]
    cells: list[list[float | None]]


def heatmap_matrix(
    scores: Sequence[WindowScore], include_unlabeled: bool = False
) -> HeatmapMatrix:
    """Topic-by-window matrix of per-topic scores.

    Rows are ordered by descending total comment volume (name breaks
    ties); columns follow window order.
    """
    topics = _topics_by_volume(scores, include_unlabeled)
    windows = [ws.index for ws in scores]
    cells = []
    for t in topics:
        row: list[float | None] = []
        for ws in scores:
            ts = ws.topic_scores.get(t)
            row.append(None if ts is None else ts.score)
        cells.append(row)
    return HeatmapMatrix(topics, windows, cells)


REASON_CSV_HEADER = (
    "topic", "anomalous_proportion", "normal_proportion", "anomalous_count", "normal_count"
)


def write_reason_distribution_csv(dist: ReasonDistribution, fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(REASON_CSV_HEADER)
    for topic, share in dist.topics.items():
        writer.writerow((
            topic,
            "" if share.anomalous_proportion is None else repr(share.anomalous_proportion),
            "" if share.normal_proportion is None else repr(share.normal_proportion),
            share.anomalous_count,
            share.normal_count,
        ))


def write_heatmap_csv(matrix: HeatmapMatrix, fh: IO[str]) -> None:
    """Wide format: first column topic, one column per window, blank = absent."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["topic", *matrix.windows])
    for topic, row in zip(matrix.topics, matrix.cells):
        writer.writerow([topic, *("" if v is None else repr(v) for v in row)])


def write_trajectories_csv(
    trajectories: dict[str, list[tuple[int, float | None]]], fh: IO[str]
) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(("topic", "window", "score"))
    for topic, series in trajectories.items():
        for index, value in series:
            writer.writerow((topic, index, "" if value is None else repr(value)))


# --- SVG charts -----------------------------------------------------------

def chart_domain(values: Sequence[float], pad_ratio: float = 0.08) -> tuple[float, float]:
    """Padded [lo, hi] value domain for the y axis."""
    lo = min(values)
    hi = max(values)
    if lo == hi:
        lo -= 0.5
        hi += 0.5
    pad = (hi - lo) * pad_ratio
    return lo - pad, hi + pad


def x_pixel(i: int, n: int) -> float:
    """x position of series point i of n inside the plot area."""
    span = VIEW_W - MARGIN_L - MARGIN_R
    if n <= 1:
        return MARGIN_L + span / 2
    return MARGIN_L + span * i / (n - 1)


def y_pixel(value: float, lo: float, hi: float) -> float:
    """Affine value-to-pixel map of the plot area (larger value = higher)."""
    span = VIEW_H - MARGIN_T - MARGIN_B
    return MARGIN_T + span * (hi - value) / (hi - lo)


def _svg_open(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {VIEW_W} {VIEW_H}" '
        f'width="{VIEW_W}" height="{VIEW_H}">',
        f"<title>{title}</title>",
        f'<rect x="0" y="0" width="{VIEW_W}" height="{VIEW_H}" fill="#ffffff"/>',
    ]


def _axes(lo: float, hi: float, n: int) -> list[str]:
    x0 = MARGIN_L
    x1 = VIEW_W - MARGIN_R
    y0 = VIEW_H - MARGIN_B
    parts = [
        f'<line x1="{x0}" y1="{MARGIN_T}" x2="{x0}" y2="{y0}" stroke="#333333" stroke-width="1"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="#333333" stroke-width="1"/>',
    ]
    for value in (lo, hi):
        y = y_pixel(value, lo, hi)
        parts.append(
            f'<text x="{x0 - 6}" y="{y:.2f}" text-anchor="end" dominant-baseline="middle" '
            f'font-family="sans-serif" font-size="11" fill="#333333">{value:.3f}</text>'
        )
    last = max(n - 1, 0)
    parts.append(
        f'<text x="{x0}" y="{y0 + 16}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="11" fill="#333333">0</text>'
    )
    if last:
        parts.append(
            f'<text x="{x_pixel(last, n):.2f}" y="{y0 + 16}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11" fill="#333333">{last}</text>'
        )
    return parts


def _hline(value: float, lo: float, hi: float, color: str, cls: str, dash: str = "6,4") -> str:
    y = y_pixel(value, lo, hi)
    return (
        f'<line class="{cls}" x1="{MARGIN_L}" y1="{y:.2f}" x2="{VIEW_W - MARGIN_R}" '
        f'y2="{y:.2f}" stroke="{color}" stroke-width="1" stroke-dasharray="{dash}"/>'
    )


def _polyline(points: Sequence[tuple[float, float]], color: str) -> str:
    coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
    return (
        f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>'
    )


def render_trajectory_svg(
    scores: Sequence[WindowScore], report: AnomalyReport | None = None
) -> str:
    """Line chart of window scores with anomaly markers and a zero line."""
    if not scores:
        raise ValueError("cannot render an empty score series")
    values = [ws.score for ws in scores]
    lo, hi = chart_domain([*values, 0.0])
    n = len(values)
    parts = _svg_open("window sentiment trajectory")
    parts.extend(_axes(lo, hi, n))
    parts.append(_hline(0.0, lo, hi, "#888888", "zero"))
    parts.append(_polyline(
        [(x_pixel(i, n), y_pixel(v, lo, hi)) for i, v in enumerate(values)],
        "#1f77b4",
    ))
    if report is not None and report.anomalies:
        pos = {ws.index: i for i, ws in enumerate(scores)}
        for anomaly in report.anomalies:
            i = pos.get(anomaly.window_index)
            if i is None:
                continue
            parts.append(
                f'<circle class="anomaly" cx="{x_pixel(i, n):.2f}" '
                f'cy="{y_pixel(values[i], lo, hi):.2f}" r="4" fill="#d62728"/>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_delta_svg(deltas: DeltaSeries, tau: float | None) -> str:
    """Chart of window-to-window changes with the threshold line.

    Deltas strictly below tau are marked as crossings.
    """
    if not deltas.deltas:
        raise ValueError("cannot render an empty delta series")
    values = [p.delta for p in deltas.deltas]
    domain_values = [*values, 0.0]
    if tau is not None:
        domain_values.append(tau)
    lo, hi = chart_domain(domain_values)
    n = len(values)
    parts = _svg_open("window sentiment change")
    parts.extend(_axes(lo, hi, n))
    parts.append(_hline(0.0, lo, hi, "#888888", "zero"))
    parts.append(_polyline(
        [(x_pixel(i, n), y_pixel(v, lo, hi)) for i, v in enumerate(values)],
        "#2ca02c",
    ))
    if tau is not None:
        parts.append(_hline(tau, lo, hi, "#d62728", "threshold"))
        for i, v in enumerate(values):
            if v < tau:
                parts.append(
                    f'<circle class="crossing" cx="{x_pixel(i, n):.2f}" '
                    f'cy="{y_pixel(v, lo, hi):.2f}" r="4" fill="#d62728"/>'
                )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
