"""Shared builders for the test suite."""

from __future__ import annotations

import random
from pathlib import Path

from sentidrift.aggregation import WindowScore
from sentidrift.ingest import UNLABELED, Comment
from sentidrift.scorer import SentimentLabel, ScoredComment
from sentidrift.windowing import Window

DATA_DIR = Path(__file__).parent / "data"

LABEL_BY_SCORE = {
    -1: SentimentLabel.NEGATIVE,
    0: SentimentLabel.NEUTRAL,
    1: SentimentLabel.POSITIVE,
}


def make_comment(ts=0, text="ok", label=None, topic=UNLABELED, cid="c1", auto_id=False):
    return Comment(cid, ts, text, label, topic, auto_id)


def make_scored(score=0, ts=0, topic=UNLABELED, text="ok", cid="c1") -> ScoredComment:
    label = LABEL_BY_SCORE[score]
    return ScoredComment(make_comment(ts, text, label, topic, cid), label, score)


def scored_list(scores, topics=None, start_ts=0, step=1000):
    """One ScoredComment per score value, timestamps strictly increasing."""
    out = []
    for i, s in enumerate(scores):
        topic = topics[i] if topics is not None else UNLABELED
        out.append(make_scored(s, start_ts + i * step, topic, cid=f"c{i}"))
    return out


def make_window(scores, topics=None, index=0, **kwargs) -> Window:
    return Window(index, scored_list(scores, topics), **kwargs)


def window_score(index: int, score: float, count: int = 100, gap_before=False) -> WindowScore:
    """A WindowScore whose counts reproduce the requested score exactly."""
    diff = round(score * count)
    if abs(score * count - diff) > 1e-9:
        raise ValueError(f"score {score} not representable over {count}")
    npos = max(diff, 0)
    nneg = max(-diff, 0)
    ws = WindowScore(index=index, count=count, score=(npos - nneg) / count,
                     npos=npos, nneg=nneg, gap_before=gap_before)
    return ws


def series(values, count: int = 100) -> list[WindowScore]:
    return [window_score(i, v, count) for i, v in enumerate(values)]


def random_count_series(rng: random.Random, length: int, count: int = 100) -> list[WindowScore]:
    """Window scores with genuine integer count backing."""
    out = []
    for i in range(length):
        diff = rng.randint(-count, count)
        npos = max(diff, 0) + rng.randint(0, (count - abs(diff)) // 2)
        nneg = npos - diff
        out.append(WindowScore(index=i, count=count, score=(npos - nneg) / count,
                               npos=npos, nneg=nneg))
    return out


def random_scored_window(rng: random.Random, index=0, max_size=200,
                         topics=("a", "b", "c", UNLABELED)) -> Window:
    size = rng.randint(1, max_size)
    scores = [rng.choice((-1, 0, 1)) for _ in range(size)]
    topic_choice = [rng.choice(topics) for _ in range(size)]
    return make_window(scores, topic_choice, index=index)
