"""Kernel backend selection.

The compiled extension is preferred when importable; the numpy fallback is
used otherwise.  Set ``TESC_PURE_PYTHON=1`` to force the fallback (useful
for benchmarking the two backends against each other).
"""

import os

if os.environ.get("TESC_PURE_PYTHON") == "1":
    from . import _pykern as _impl

    BACKEND = "python"
else:
    try:
        from . import _ckern as _impl  # type: ignore[attr-defined]

        BACKEND = "c"
    except ImportError:
        from . import _pykern as _impl

        BACKEND = "python"

bfs_ball = _impl.bfs_ball
bfs_ball_levels = _impl.bfs_ball_levels
bfs_multi = _impl.bfs_multi
vicinity_size_table = _impl.vicinity_size_table
density_pass = _impl.density_pass
eligible = _impl.eligible
kendall_s = _impl.kendall_s
weighted_sums = _impl.weighted_sums

__all__ = [
    "BACKEND",
    "bfs_ball",
    "bfs_ball_levels",
    "bfs_multi",
    "vicinity_size_table",
    "density_pass",
    "eligible",
    "kendall_s",
    "weighted_sums",
]
