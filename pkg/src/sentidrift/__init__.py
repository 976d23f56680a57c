"""Sentiment drift monitoring for timestamped feedback streams.

Turns per-comment sentiment labels into window-level score series,
flags abnormal downward shifts by thresholding the first-order
differences, and produces topic-aware diagnostics.
"""

__version__ = "0.1.0"

from .aggregation import TopicScore, WindowScore, aggregate_topic, aggregate_window, score_series
from .detection import (
    Anomaly,
    AnomalyReport,
    DeltaPoint,
    DeltaSeries,
    OnlineDetector,
    Threshold,
    ThresholdConfig,
    analyze,
    compute_threshold,
    delta_series,
    detect,
    online_update,
)
from .ingest import (
    UNLABELED,
    Comment,
    IngestResult,
    IngestSummary,
    RawRecord,
    RowError,
    deduplicate,
    format_timestamp,
    load_comments,
    normalize_timestamp,
    parse_records,
    validate_and_build,
)
from .pipeline import PipelineConfig, RunSummary, StreamEvent, StreamRunner, run_batch, run_stream
from .reporting import (
    HeatmapMatrix,
    ReasonDistribution,
    heatmap_matrix,
    reason_distribution,
    render_delta_svg,
    render_trajectory_svg,
    topic_trajectories,
)
from .scorer import (
    Lexicon,
    LexiconScorer,
    PassthroughScorer,
    ScoredComment,
    SentimentLabel,
    default_lexicon,
    load_lexicon,
    make_scorer,
    map_label_to_score,
    parse_label,
    score_comment,
)
from .windowing import (
    Window,
    WindowSpec,
    parse_duration,
    segment,
    segment_count,
    segment_time,
    sort_by_time,
)
