"""Pure-Python hot-path kernels.

Same contracts as the compiled versions in ``_native``; see
:mod:`sentidrift.kernels` for which backend is active.
"""

from __future__ import annotations


def window_topic_stats(scores, topic_ids, n_topics, starts):
    """Count members, positives and negatives per window and per topic.

    ``scores[i]`` in {-1, 0, +1} and ``topic_ids[i]`` in [0, n_topics)
    describe member i; window k owns positions [starts[k], starts[k+1]).

    Returns ``(counts, npos, nneg, topic_rows)`` where the first three
    are per-window lists and ``topic_rows`` is a list of
    ``(window, topic_id, count, npos, nneg)`` tuples grouped by window,
    topics in first-seen order within each window.
    """
    n_windows = len(starts) - 1
    counts = [0] * n_windows
    npos = [0] * n_windows
    nneg = [0] * n_windows
    topic_rows = []
    row_append = topic_rows.append

    for k in range(n_windows):
        lo = starts[k]
        hi = starts[k + 1]
        pos = neg = 0
        per_topic: dict = {}
        get = per_topic.get
        for i in range(lo, hi):
            s = scores[i]
            t = topic_ids[i]
            row = get(t)
            if row is None:
                per_topic[t] = row = [0, 0, 0]
            row[0] += 1
            if s:
                if s > 0:
                    pos += 1
                    row[1] += 1
                else:
                    neg += 1
                    row[2] += 1
        counts[k] = hi - lo
        npos[k] = pos
        nneg[k] = neg
        for t, (c, tp, tn) in per_topic.items():
            row_append((k, t, c, tp, tn))

    return counts, npos, nneg, topic_rows


# 10^11 epoch seconds is far in the future; at or above it means milliseconds
EPOCH_MS_CUTOFF = 10**11


def load_csv_rows(reader, i_id, i_ts, i_text, i_label, i_topic, width,
                  comment_cls, name_to_label, unlabeled, normalize_ts):
    """Validate, build and deduplicate comments from parsed CSV rows.

    ``reader`` yields field lists (header already consumed); the ``i_*``
    column positions are -1 when the column is absent. Returns
    ``(comments, errors, parsed, duplicates)`` with errors as
    (line, reason) tuples.
    """
    comments = []
    errors = []
    seen = set()
    parsed = 0
    duplicates = 0
    append = comments.append
    err = errors.append
    add = seen.add
    cutoff = EPOCH_MS_CUTOFF

    for row in reader:
        if not row:
            continue
        parsed += 1
        if len(row) < width:
            err((reader.line_num, f"expected {width} fields, got {len(row)}"))
            continue

        text = row[i_text]
        if "\r" in text:
            text = text.replace("\r\n", "\n").replace("\r", "\n")
        text = text.strip()
        if not text:
            err((reader.line_num, "empty text"))
            continue

        raw_ts = row[i_ts]
        if raw_ts.isdigit():
            value = int(raw_ts)
            timestamp = value if value >= cutoff else value * 1000
        else:
            try:
                timestamp = normalize_ts(raw_ts)
            except ValueError as exc:
                err((reader.line_num, str(exc)))
                continue
        if timestamp < 0:
            err((reader.line_num, f"timestamp before epoch: {raw_ts!r}"))
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
                            err((
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
        add(key)
        if len(seen) == before:
            duplicates += 1
            continue
        append(comment)

    return comments, errors, parsed, duplicates
