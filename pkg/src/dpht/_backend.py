"""Kernel backend selection.

The compiled extension is preferred when importable; the pure-numpy
fallback is selected otherwise. ``DPHT_BACKEND=python`` forces the
fallback, ``DPHT_BACKEND=compiled`` makes a missing extension an error.
Both expose the same functions with bit-identical results.
"""

from __future__ import annotations

import os

_requested = os.environ.get("DPHT_BACKEND", "").strip().lower()

if _requested == "python":
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        from . import _kernels_py as _impl

        BACKEND = "python"

group_rank_sums = _impl.group_rank_sums
signed_rank_sums = _impl.signed_rank_sums
