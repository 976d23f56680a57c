"""Kernel backend selection.

The compiled extension is used when it imported cleanly; otherwise the
pure-Python twin takes over. Set ``SENTIDRIFT_PURE_PYTHON=1`` to force
the fallback (used by the benchmark and the backend-parity tests).
"""

import os

if os.environ.get("SENTIDRIFT_PURE_PYTHON", "0") not in ("", "0"):
    from . import _pykernels as _impl

    BACKEND = "python"
else:
    try:
        from . import _native as _impl  # type: ignore[no-redef]

        BACKEND = "native"
    except ImportError:
        from . import _pykernels as _impl  # type: ignore[no-redef]

        BACKEND = "python"

window_topic_stats = _impl.window_topic_stats
load_csv_rows = _impl.load_csv_rows
