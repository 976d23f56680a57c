import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
    derandomize=True,
)
settings.load_profile("suite")


@pytest.fixture
def fixture_scores():
    """The checked-in window-score series with the 11 embedded drops."""
    from sentidrift.aggregation import read_window_scores_csv

    from helpers import DATA_DIR

    with open(DATA_DIR / "anomaly_scores.csv", encoding="utf-8", newline="") as fh:
        return read_window_scores_csv(fh)
