"""Change-based anomaly detection on the window-score series.

The change signal is the first-order difference between consecutive
emitted windows. A window is anomalous when its change falls strictly
below ``tau = mu - alpha * sigma``, with mu and sigma the mean and
population standard deviation of the whole change history (alpha
defaults to 1.5).

All statistics are computed with one shared single-pass accumulator so
the batch detector and :class:`OnlineDetector` perform bit-identical
arithmetic. The math is generic over ``numbers.Real``: feed it the
``exact_score`` rationals from aggregation and mu, the deltas and the
flag set are exact (only sigma, hence tau, passes through a float
square root).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import IO, Sequence

from .aggregation import WindowScore


@dataclass(slots=True)
class DeltaPoint:
    index: int  # window index of the later window of the pair
    delta: float
    gap_before: bool = False


@dataclass(slots=True)
class DeltaSeries:
    deltas: list[DeltaPoint]
    source_series_length: int


@dataclass(frozen=True)
class ThresholdConfig:
    """Detection sensitivity settings.

    ``override`` pins tau to a fixed value; ``history`` restricts the
    statistics to the trailing N deltas instead of the full history.
    """

    alpha: float = 1.5
    override: float | None = None
    history: int | None = None

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.history is not None and self.history < 1:
            raise ValueError("history must be at least 1")


@dataclass(slots=True)
class Threshold:
    tau: float | None
    mu: float | None
    sigma: float | None
    alpha: float
    overridden: bool = False
    insufficient_data: bool = False


@dataclass(slots=True)
class Anomaly:
    window_index: int
    previous_score: float
    current_score: float
    delta: float
    gap_before: bool = False


@dataclass(slots=True)
class AnomalyReport:
    tau: float | None
    mu_delta: float | None
    sigma_delta: float | None
    alpha: float
    anomalies: list[Anomaly] = field(default_factory=list)
    insufficient_data: bool = False

    def as_dict(self) -> dict:
        return {
            "tau": None if self.tau is None else float(self.tau),
            "mu_delta": None if self.mu_delta is None else float(self.mu_delta),
            "sigma_delta": None if self.sigma_delta is None else float(self.sigma_delta),
            "alpha": float(self.alpha),
            "insufficient_data": self.insufficient_data,
            "anomalies": [
                {
                    "window": a.window_index,
                    "previous_score": float(a.previous_score),
                    "current_score": float(a.current_score),
                    "delta": float(a.delta),
                    "gap_before": a.gap_before,
                }
                for a in self.anomalies
            ],
        }


def delta_series(scores: Sequence[WindowScore]) -> DeltaSeries:
    """First-order differences between consecutive emitted windows.

    A delta computed across a gap (skipped empty time bucket) keeps the
    gap annotation but is not treated specially otherwise.
    """
    deltas = [
        DeltaPoint(cur.index, cur.score - prev.score, cur.gap_before)
        for prev, cur in zip(scores, scores[1:])
    ]
    return DeltaSeries(deltas, len(scores))


def _push(n, mean, m2, x):
    # single Welford step; shared by every tau computation in this module
    n += 1
    d = x - mean
    mean = mean + d / n
    m2 = m2 + d * (x - mean)
    return n, mean, m2


def _moments(values):
    n, mean, m2 = 0, 0, 0
    for x in values:
        n, mean, m2 = _push(n, mean, m2, x)
    return n, mean, m2


def _finish(n, mean, m2, config: ThresholdConfig) -> Threshold:
    if n == 0:
        if config.override is not None:
            return Threshold(config.override, None, None, config.alpha, overridden=True)
        return Threshold(None, None, None, config.alpha, insufficient_data=True)
    var = m2 / n
    if var < 0:
        var = 0
    sigma = math.sqrt(var)
    if config.override is not None:
        return Threshold(config.override, mean, sigma, config.alpha, overridden=True)
    return Threshold(mean - config.alpha * sigma, mean, sigma, config.alpha)


def compute_threshold(
    deltas: DeltaSeries | Sequence, config: ThresholdConfig | None = None
) -> Threshold:
    """tau = mu - alpha * sigma over the given deltas.

    sigma is the population standard deviation (divide by n). With
    ``config.history`` set, only the trailing N deltas count. An empty
    series yields an insufficient-data threshold unless overridden.
    """
    config = config or ThresholdConfig()
    values = [p.delta for p in deltas.deltas] if isinstance(deltas, DeltaSeries) else list(deltas)
    if config.history is not None:
        values = values[-config.history:]
    return _finish(*_moments(values), config)


def detect(
    scores: Sequence[WindowScore],
    deltas: DeltaSeries,
    threshold: Threshold,
) -> AnomalyReport:
    """Flag every window whose delta is strictly below tau."""
    report = AnomalyReport(
        tau=threshold.tau,
        mu_delta=threshold.mu,
        sigma_delta=threshold.sigma,
        alpha=threshold.alpha,
        insufficient_data=len(scores) < 2,
    )
    tau = threshold.tau
    if tau is None:
        return report
    for j, point in enumerate(deltas.deltas):
        if point.delta < tau:
            report.anomalies.append(
                Anomaly(
                    window_index=point.index,
                    previous_score=scores[j].score,
                    current_score=scores[j + 1].score,
                    delta=point.delta,
                    gap_before=point.gap_before,
                )
            )
    return report


def analyze(
    scores: Sequence[WindowScore], config: ThresholdConfig | None = None
) -> AnomalyReport:
    """Full batch run: deltas, threshold, flags.

    In trailing-history mode each delta is judged against the threshold
    of the history window ending at it; the report then carries the
    final (most recent) statistics.
    """
    config = config or ThresholdConfig()
    ds = delta_series(scores)
    if config.history is None or config.override is not None:
        return detect(scores, ds, compute_threshold(ds, config))

    values = [p.delta for p in ds.deltas]
    report = AnomalyReport(None, None, None, config.alpha, insufficient_data=len(scores) < 2)
    threshold = _finish(0, 0, 0, config)
    for j, point in enumerate(ds.deltas):
        window = values[max(0, j + 1 - config.history): j + 1]
        threshold = _finish(*_moments(window), config)
        if threshold.tau is not None and point.delta < threshold.tau:
            report.anomalies.append(
                Anomaly(point.index, scores[j].score, scores[j + 1].score,
                        point.delta, point.gap_before)
            )
    report.tau = threshold.tau
    report.mu_delta = threshold.mu
    report.sigma_delta = threshold.sigma
    return report


@dataclass(slots=True)
class Decision:
    """Verdict on the newest window, as of its arrival."""

    window_index: int
    previous_score: float
    current_score: float
    delta: float
    tau: float | None
    flagged: bool
    gap_before: bool = False


class OnlineDetector:
    """Incremental detector equivalent to the batch path.

    After each window the threshold is recomputed over every delta seen
    so far (including the newest) and the newest delta is judged against
    it; that decision equals what batch :func:`analyze` on the same
    prefix says about its last window. :meth:`report` re-judges the full
    history with the current threshold, so it matches batch analyze on
    everything seen so far.
    """

    def __init__(self, config: ThresholdConfig | None = None):
        self.config = config or ThresholdConfig()
        self._prev: WindowScore | None = None
        self._seen = 0
        self._n, self._mean, self._m2 = 0, 0, 0
        self._threshold = _finish(0, 0, 0, self.config)
        self._points: list[DeltaPoint] = []
        self._pairs: list[tuple] = []  # (previous_score, current_score) per delta

    def update(self, ws: WindowScore) -> Decision | None:
        self._seen += 1
        prev = self._prev
        self._prev = ws
        if prev is None:
            return None
        delta = ws.score - prev.score
        self._points.append(DeltaPoint(ws.index, delta, ws.gap_before))
        self._pairs.append((prev.score, ws.score))
        if self.config.history is None:
            self._n, self._mean, self._m2 = _push(self._n, self._mean, self._m2, delta)
            threshold = _finish(self._n, self._mean, self._m2, self.config)
        else:
            window = [p.delta for p in self._points[-self.config.history:]]
            threshold = _finish(*_moments(window), self.config)
        self._threshold = threshold
        flagged = threshold.tau is not None and delta < threshold.tau
        return Decision(
            window_index=ws.index,
            previous_score=prev.score,
            current_score=ws.score,
            delta=delta,
            tau=threshold.tau,
            flagged=flagged,
            gap_before=ws.gap_before,
        )

    def report(self) -> AnomalyReport:
        """Snapshot: every historical delta judged by the current tau."""
        threshold = self._threshold
        report = AnomalyReport(
            tau=threshold.tau,
            mu_delta=threshold.mu,
            sigma_delta=threshold.sigma,
            alpha=threshold.alpha,
            insufficient_data=self._seen < 2,
        )
        if threshold.tau is None:
            return report
        tau = threshold.tau
        for point, (prev_score, cur_score) in zip(self._points, self._pairs):
            if point.delta < tau:
                report.anomalies.append(
                    Anomaly(point.index, prev_score, cur_score, point.delta, point.gap_before)
                )
        return report


def online_update(state: OnlineDetector | None, ws: WindowScore,
                  config: ThresholdConfig | None = None):
    """Functional wrapper over :class:`OnlineDetector`.

    Pass ``state=None`` to start; returns ``(state, decision)`` where
    the decision is None until two windows have been seen.
    """
    if state is None:
        state = OnlineDetector(config)
    return state, state.update(ws)


BEFORE_AFTER_HEADER = ("window", "previous_score", "current_score", "delta")


def _fmt2(value) -> str:
    # round half-even to 2 decimals; "+ 0.0" avoids "-0.00"
    return f"{round(float(value), 2) + 0.0:.2f}"


def write_before_after_csv(report: AnomalyReport, fh: IO[str]) -> None:
    """Human-oriented comparison table, rounded to 2 decimals."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(BEFORE_AFTER_HEADER)
    for a in report.anomalies:
        writer.writerow(
            (a.window_index, _fmt2(a.previous_score), _fmt2(a.current_score), _fmt2(a.delta))
        )


def write_report_json(report: AnomalyReport, fh: IO[str]) -> None:
    json.dump(report.as_dict(), fh, indent=2)
    fh.write("\n")
