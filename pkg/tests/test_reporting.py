import io
import random
import re

import pytest

from sentidrift.aggregation import aggregate_topic, score_series
from sentidrift.detection import ThresholdConfig, analyze, delta_series
from sentidrift.ingest import UNLABELED
from sentidrift.reporting import (
    MARGIN_L,
    VIEW_W,
    chart_domain,
    heatmap_matrix,
    reason_distribution,
    render_delta_svg,
    render_trajectory_svg,
    topic_trajectories,
    write_heatmap_csv,
    write_reason_distribution_csv,
    write_trajectories_csv,
    y_pixel,
)

from helpers import make_window, random_scored_window


def windows_with_topics():
    return [
        make_window([-1, -1, 1], ["Late", "Late", "Service"], index=0),
        make_window([-1, 0, 0], ["Service", "Late", UNLABELED], index=1),
        make_window([-1, -1, -1], ["Late", "Late", "Lost"], index=2),
    ]


class TestReasonDistribution:
    def test_single_topic_in_anomalous_windows(self):
        windows = [
            make_window([-1, -1], ["Late", "Late"], index=0),
            make_window([-1], ["Service"], index=1),
        ]
        dist = reason_distribution(windows, flagged_indices=[0])
        assert dist.topics["Late"].anomalous_proportion == 1.0
        assert dist.topics["Late"].normal_proportion == 0.0
        assert dist.anomalous_comment_count == 2

    def test_no_anomalies_leaves_anomalous_side_absent(self):
        dist = reason_distribution(windows_with_topics(), flagged_indices=[])
        assert dist.anomalous_comment_count == 0
        for share in dist.topics.values():
            assert share.anomalous_proportion is None
        total = sum(s.normal_proportion for s in dist.topics.values())
        assert abs(total - 1.0) <= 1e-9

    def test_three_to_one_split(self):
        windows = [make_window([-1, -1, -1, -1], ["A", "A", "A", "B"], index=0)]
        dist = reason_distribution(windows, flagged_indices=[0])
        assert dist.topics["A"].anomalous_proportion == 0.75
        assert dist.topics["B"].anomalous_proportion == 0.25

    def test_only_negative_comments_count_by_default(self):
        windows = [make_window([1, 1, -1], ["A", "A", "B"], index=0)]
        dist = reason_distribution(windows, flagged_indices=[0])
        assert "A" not in dist.topics and dist.topics["B"].anomalous_count == 1
        widened = reason_distribution(windows, flagged_indices=[0], all_labels=True)
        assert widened.topics["A"].anomalous_count == 2

    def test_proportions_sum_to_one_in_both_groups(self):
        rng = random.Random(0)
        windows = [random_scored_window(rng, index=i) for i in range(12)]
        dist = reason_distribution(windows, flagged_indices=[2, 5, 6])
        for side in ("anomalous_proportion", "normal_proportion"):
            values = [getattr(s, side) for s in dist.topics.values()]
            present = [v for v in values if v is not None]
            if present:
                assert abs(sum(present) - 1.0) <= 1e-9

    def test_csv_shape(self):
        dist = reason_distribution(windows_with_topics(), flagged_indices=[2])
        buf = io.StringIO()
        write_reason_distribution_csv(dist, buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == (
            "topic,anomalous_proportion,normal_proportion,anomalous_count,normal_count"
        )
        assert len(lines) == 1 + len(dist.topics)


class TestTopicTrajectories:
    def test_topic_present_everywhere_has_full_series(self):
        scores = score_series(windows_with_topics())
        out = topic_trajectories(scores, ["Late"])
        assert len(out["Late"]) == len(scores)
        assert all(v is not None for _, v in out["Late"])

    def test_absent_windows_yield_gaps_not_zeros(self):
        scores = score_series(windows_with_topics())
        (series,) = topic_trajectories(scores, ["Lost"]).values()
        assert series == [(0, None), (1, None), (2, -1.0)]

    def test_unknown_topic_error_lists_known(self):
        scores = score_series(windows_with_topics())
        with pytest.raises(ValueError, match="Late"):
            topic_trajectories(scores, ["Baggage Fees"])

    def test_unlabeled_excluded_unless_requested(self):
        scores = score_series(windows_with_topics())
        assert UNLABELED not in topic_trajectories(scores)
        assert UNLABELED in topic_trajectories(scores, include_unlabeled=True)
        # explicit request also works
        assert UNLABELED in topic_trajectories(scores, [UNLABELED], include_unlabeled=True)

    def test_no_windows_gives_empty_series_with_warning(self, caplog):
        with caplog.at_level("WARNING"):
            out = topic_trajectories([], ["Late"])
        assert out == {"Late": []}
        assert any("no windows" in r.message for r in caplog.records)

    def test_csv_writer_keeps_gaps_blank(self):
        scores = score_series(windows_with_topics())
        buf = io.StringIO()
        write_trajectories_csv(topic_trajectories(scores, ["Lost"]), buf)
        assert buf.getvalue().splitlines() == [
            "topic,window,score", "Lost,0,", "Lost,1,", "Lost,2,-1.0",
        ]


class TestHeatmapMatrix:
    def test_dense_grid_with_absent_cells(self):
        scores = score_series(windows_with_topics())
        matrix = heatmap_matrix(scores)
        assert matrix.windows == [0, 1, 2]
        assert matrix.topics[0] == "Late"  # 5 comments, most voluminous
        lost_row = matrix.cells[matrix.topics.index("Lost")]
        assert lost_row == [None, None, -1.0]

    def test_cells_match_topic_aggregation_oracle(self):
        rng = random.Random(4)
        windows = [random_scored_window(rng, index=i) for i in range(10)]
        matrix = heatmap_matrix(score_series(windows), include_unlabeled=True)
        for r, topic in enumerate(matrix.topics):
            for c, window in enumerate(windows):
                assert matrix.cells[r][c] == aggregate_topic(window, topic)

    def test_unlabeled_row_hidden_by_default(self):
        scores = score_series(windows_with_topics())
        assert UNLABELED not in heatmap_matrix(scores).topics
        assert UNLABELED in heatmap_matrix(scores, include_unlabeled=True).topics

    def test_csv_wide_format(self):
        scores = score_series(windows_with_topics())
        buf = io.StringIO()
        write_heatmap_csv(heatmap_matrix(scores), buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "topic,0,1,2"
        lost = next(line for line in lines if line.startswith("Lost"))
        assert lost == "Lost,,,-1.0"


def fixture_report(scores):
    return analyze(scores, ThresholdConfig(override=-0.1693))


class TestTrajectorySvg:
    def test_byte_identical_across_runs(self, fixture_scores):
        report = fixture_report(fixture_scores)
        assert render_trajectory_svg(fixture_scores, report) == render_trajectory_svg(
            fixture_scores, report
        )

    def test_no_markers_without_anomalies(self, fixture_scores):
        svg = render_trajectory_svg(fixture_scores, None)
        assert 'class="anomaly"' not in svg

    def test_one_marker_per_flagged_window(self, fixture_scores):
        svg = render_trajectory_svg(fixture_scores, fixture_report(fixture_scores))
        assert svg.count('class="anomaly"') == 11

    def test_zero_reference_line_present(self, fixture_scores):
        svg = render_trajectory_svg(fixture_scores, None)
        assert 'class="zero"' in svg

    def test_fixed_viewbox(self, fixture_scores):
        svg = render_trajectory_svg(fixture_scores, None)
        assert 'viewBox="0 0 960 480"' in svg

    def test_empty_series_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            render_trajectory_svg([], None)


class TestDeltaSvg:
    def test_threshold_line_sits_at_tau_under_the_chart_transform(self, fixture_scores):
        ds = delta_series(fixture_scores)
        tau = -0.1693
        svg = render_delta_svg(ds, tau)
        m = re.search(r'<line class="threshold" x1="([\d.]+)" y1="([\d.-]+)"', svg)
        assert m is not None
        # invert the published affine map: recompute the expected pixel
        values = [p.delta for p in ds.deltas]
        lo, hi = chart_domain([*values, 0.0, tau])
        assert float(m.group(2)) == pytest.approx(y_pixel(tau, lo, hi), abs=0.01)
        assert float(m.group(1)) == MARGIN_L

    def test_crossings_marked_only_below_tau(self, fixture_scores):
        ds = delta_series(fixture_scores)
        svg = render_delta_svg(ds, -0.1693)
        assert svg.count('class="crossing"') == 11
        all_above = render_delta_svg(ds, -10.0)
        assert 'class="crossing"' not in all_above

    def test_single_crossing(self):
        from helpers import series

        ds = delta_series(series([0.0, 0.01, -0.50, -0.49]))
        svg = render_delta_svg(ds, -0.3)
        assert svg.count('class="crossing"') == 1

    def test_determinism(self, fixture_scores):
        ds = delta_series(fixture_scores)
        assert render_delta_svg(ds, -0.1693) == render_delta_svg(ds, -0.1693)

    def test_empty_deltas_rejected(self):
        from sentidrift.detection import DeltaSeries

        with pytest.raises(ValueError, match="empty"):
            render_delta_svg(DeltaSeries([], 1), -0.1)

    def test_renders_without_tau(self, fixture_scores):
        svg = render_delta_svg(delta_series(fixture_scores), None)
        assert 'class="threshold"' not in svg and svg.startswith("<svg")


class TestChartGeometry:
    def test_value_to_pixel_is_affine_and_decreasing(self):
        lo, hi = 0.0, 1.0
        top = y_pixel(hi, lo, hi)
        bottom = y_pixel(lo, lo, hi)
        mid = y_pixel(0.5, lo, hi)
        assert top < mid < bottom
        assert mid == pytest.approx((top + bottom) / 2)

    def test_flat_domain_is_widened(self):
        lo, hi = chart_domain([0.2, 0.2])
        assert lo < 0.2 < hi

    def test_x_range_spans_plot_area(self):
        from sentidrift.reporting import MARGIN_R, x_pixel

        assert x_pixel(0, 10) == MARGIN_L
        assert x_pixel(9, 10) == VIEW_W - MARGIN_R
