# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot-path kernels.

Keep behaviour identical to ``_pykernels``: the test suite runs both
backends against each other.
"""

from cpython cimport array
import array


cdef array.array _INT_TEMPLATE = array.array('i', [])
cdef array.array _LL_TEMPLATE = array.array('q', [])


def window_topic_stats(const signed char[::1] scores,
                       const int[::1] topic_ids,
                       Py_ssize_t n_topics,
                       const long long[::1] starts):
    """Count members, positives and negatives per window and per topic.

    See the pure-Python twin for the full contract.
    """
    cdef Py_ssize_t n_windows = starts.shape[0] - 1
    cdef Py_ssize_t k, i, lo, hi, j, n_touched
    cdef int t
    cdef signed char s
    cdef long long pos, neg

    counts = [0] * n_windows
    npos = [0] * n_windows
    nneg = [0] * n_windows
    topic_rows = []

    if n_topics == 0:
        for k in range(n_windows):
            counts[k] = starts[k + 1] - starts[k]
        return counts, npos, nneg, topic_rows

    # per-topic scratch, reset lazily via the window stamp
    cdef array.array stamp_arr = array.clone(_INT_TEMPLATE, n_topics, zero=False)
    cdef array.array tcount_arr = array.clone(_LL_TEMPLATE, n_topics, zero=False)
    cdef array.array tpos_arr = array.clone(_LL_TEMPLATE, n_topics, zero=False)
    cdef array.array tneg_arr = array.clone(_LL_TEMPLATE, n_topics, zero=False)
    cdef array.array touched_arr = array.clone(_INT_TEMPLATE, n_topics, zero=False)
    cdef int[::1] stamp = stamp_arr
    cdef long long[::1] tcount = tcount_arr
    cdef long long[::1] tpos = tpos_arr
    cdef long long[::1] tneg = tneg_arr
    cdef int[::1] touched = touched_arr

    for i in range(n_topics):
        stamp[i] = -1

    for k in range(n_windows):
        lo = starts[k]
        hi = starts[k + 1]
        pos = 0
        neg = 0
        n_touched = 0
        for i in range(lo, hi):
            s = scores[i]
            t = topic_ids[i]
            if stamp[t] != <int> k:
                stamp[t] = <int> k
                tcount[t] = 0
                tpos[t] = 0
                tneg[t] = 0
                touched[n_touched] = t
                n_touched += 1
            tcount[t] += 1
            if s > 0:
                pos += 1
                tpos[t] += 1
            elif s < 0:
                neg += 1
                tneg[t] += 1
        counts[k] = hi - lo
        npos[k] = pos
        nneg[k] = neg
        for j in range(n_touched):
            t = touched[j]
            topic_rows.append((k, t, tcount[t], tpos[t], tneg[t]))

    return counts, npos, nneg, topic_rows


# 10^11 epoch seconds is far in the future; at or above it means milliseconds
EPOCH_MS_CUTOFF = 10**11


def load_csv_rows(reader, Py_ssize_t i_id, Py_ssize_t i_ts, Py_ssize_t i_text,
                  Py_ssize_t i_label, Py_ssize_t i_topic, Py_ssize_t width,
                  comment_cls, dict name_to_label, unlabeled, normalize_ts):
    """Validate, build and deduplicate comments from parsed CSV rows.

    See the pure-Python twin for the full contract.
    """
    cdef list comments = []
    cdef list errors = []
    cdef set seen = set()
    cdef Py_ssize_t parsed = 0
    cdef Py_ssize_t duplicates = 0
    cdef Py_ssize_t before
    cdef list row
    cdef object text, raw_ts, raw_label, raw_topic, label, topic, cid
    cdef object timestamp, key, comment, stripped
    cdef object cutoff = EPOCH_MS_CUTOFF

    for row in reader:
        if not row:
            continue
        parsed += 1
        if len(row) < width:
            errors.append((reader.line_num, f"expected {width} fields, got {len(row)}"))
            continue

        text = row[i_text]
        if "\r" in text:
            text = text.replace("\r\n", "\n").replace("\r", "\n")
        text = text.strip()
        if not text:
            errors.append((reader.line_num, "empty text"))
            continue

        raw_ts = row[i_ts]
        if raw_ts.isdigit():
            timestamp = int(raw_ts)
            if timestamp < cutoff:
                timestamp = timestamp * 1000
        else:
            try:
                timestamp = normalize_ts(raw_ts)
            except ValueError as exc:
                errors.append((reader.line_num, str(exc)))
                continue
        if timestamp < 0:
            errors.append((reader.line_num, f"timestamp before epoch: {raw_ts!r}"))
            continue

        label = None
        if i_label >= 0:
            raw_label = row[i_label]
            if raw_label:
                label = name_to_label.get(raw_label)
                if label is None:
                    stripped = raw_label.strip()
                    if stripped:
                        label = name_to_label.get(stripped.lower())
                        if label is None:
                            errors.append((
                                reader.line_num,
                                f"unknown sentiment label {raw_label!r}; accepted "
                                "values: negative, neutral, positive",
                            ))
                            continue

        topic = unlabeled
        if i_topic >= 0:
            raw_topic = row[i_topic]
            if raw_topic:
                topic = raw_topic.strip() or unlabeled

        cid = row[i_id].strip() if i_id >= 0 else ""
        if cid:
            key = cid
            comment = comment_cls(cid, timestamp, text, label, topic)
        else:
            key = (text, timestamp)
            comment = comment_cls(
                f"r{reader.line_num}", timestamp, text, label, topic, True
            )

        before = len(seen)
        seen.add(key)
        if len(seen) == before:
            duplicates += 1
            continue
        comments.append(comment)

    return comments, errors, parsed, duplicates
