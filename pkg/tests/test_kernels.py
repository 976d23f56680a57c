"""Backend parity: the compiled kernels must match the pure-Python twins."""

import csv
import io
import os
import random
import subprocess
import sys
from array import array

import pytest

from sentidrift import _pykernels, kernels
from sentidrift.ingest import UNLABELED, Comment, normalize_timestamp
from sentidrift.scorer import _NAME_TO_LABEL
from sentidrift.synth import generate_rows, write_rows_csv

_native = pytest.importorskip(
    "sentidrift._native", reason="compiled kernels not built"
)

BACKENDS = [("python", _pykernels), ("native", _native)]


def stats_inputs(seed, n_rows, n_windows, n_topics):
    rng = random.Random(seed)
    scores = array("b", (rng.choice((-1, 0, 1)) for _ in range(n_rows)))
    topics = array("i", (rng.randrange(n_topics) for _ in range(n_rows)))
    cuts = sorted(rng.sample(range(1, n_rows), n_windows - 1)) if n_windows > 1 else []
    starts = array("q", [0, *cuts, n_rows])
    return scores, topics, n_topics, starts


class TestWindowTopicStats:
    @pytest.mark.parametrize("seed,n_rows,n_windows,n_topics", [
        (0, 50, 5, 3),
        (1, 1000, 17, 8),
        (2, 300, 1, 1),
        (3, 4096, 64, 16),
    ])
    def test_backends_agree(self, seed, n_rows, n_windows, n_topics):
        inputs = stats_inputs(seed, n_rows, n_windows, n_topics)
        assert _pykernels.window_topic_stats(*inputs) == _native.window_topic_stats(*inputs)

    def test_no_windows(self):
        empty = (array("b"), array("i"), 0, array("q", [0]))
        for _, impl in BACKENDS:
            assert impl.window_topic_stats(*empty) == ([], [], [], [])

    def test_counts_against_bruteforce(self):
        scores, topics, n_topics, starts = stats_inputs(9, 200, 7, 4)
        counts, npos, nneg, rows = kernels.window_topic_stats(scores, topics, n_topics, starts)
        for k in range(len(starts) - 1):
            segment = list(range(starts[k], starts[k + 1]))
            assert counts[k] == len(segment)
            assert npos[k] == sum(1 for i in segment if scores[i] > 0)
            assert nneg[k] == sum(1 for i in segment if scores[i] < 0)
        # per-topic rows reconstruct the same totals
        by_window = {}
        for window, _tid, c, p, n in rows:
            agg = by_window.setdefault(window, [0, 0, 0])
            agg[0] += c
            agg[1] += p
            agg[2] += n
        for k in range(len(starts) - 1):
            assert by_window.get(k, [0, 0, 0]) == [counts[k], npos[k], nneg[k]]


DIRTY_CSV = (
    "id,timestamp,text,label,topic\n"
    "c1,0,fine,positive,T\n"
    ",5,no id,negative,\n"
    ",5,no id,negative,\n"
    "c2,bad-ts,x,neutral,\n"
    "c3,5,,neutral,\n"
    "c4,5,y,grumpy,\n"
    "c1,9,dup,positive,\n"
    "c5,10,ok,,  Late Flight \n"
)


def run_csv(impl, text):
    reader = csv.reader(io.StringIO(text))
    next(reader)
    return impl.load_csv_rows(
        reader, 0, 1, 2, 3, 4, 5, Comment, _NAME_TO_LABEL, UNLABELED, normalize_timestamp
    )


class TestLoadCsvRows:
    def test_backends_agree_on_dirty_input(self):
        assert run_csv(_pykernels, DIRTY_CSV) == run_csv(_native, DIRTY_CSV)

    def test_backends_agree_on_synthetic_corpus(self):
        buf = io.StringIO()
        write_rows_csv(generate_rows(500, seed=13), buf)
        assert run_csv(_pykernels, buf.getvalue()) == run_csv(_native, buf.getvalue())

    def test_tallies(self):
        comments, errors, parsed, duplicates = run_csv(kernels, DIRTY_CSV)
        assert parsed == 8
        assert [c.id for c in comments] == ["c1", "r3", "c5"]
        assert len(errors) == 3
        assert duplicates == 2  # repeated (text, ts) pair and repeated id
        assert parsed == len(comments) + len(errors) + duplicates


class TestBackendSelection:
    def test_native_preferred_when_available(self):
        assert kernels.BACKEND == "native"
        assert kernels.window_topic_stats is _native.window_topic_stats

    def test_env_var_forces_fallback(self):
        env = dict(os.environ, SENTIDRIFT_PURE_PYTHON="1")
        out = subprocess.run(
            [sys.executable, "-c", "from sentidrift import kernels; print(kernels.BACKEND)"],
            capture_output=True, text=True, env=env, check=True,
        )
        assert out.stdout.strip() == "python"
