"""Pure-numpy implementations of the batch ranking kernels.

Fallback for :mod:`dpht._kernels` when the compiled extension is not
available. Both backends must return bit-identical results: rank sums are
integers and signed midrank sums are exact multiples of 1/2, so both are
exact in float64 regardless of accumulation order.
"""

from __future__ import annotations

import numpy as np
import scipy.stats


def group_rank_sums(values: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    """Per-replicate rank sums by group.

    ``values`` is a (z, n) matrix, one pooled null sample per row, with the
    first ``sizes[0]`` columns forming group 0 and so on. Ranks are ordinal
    (ties broken by column index).
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    z, n = values.shape
    order = np.argsort(values, axis=1, kind="stable")
    ranks = np.empty((z, n), dtype=np.float64)
    np.put_along_axis(ranks, order, np.arange(1.0, n + 1.0)[None, :], axis=1)
    offsets = np.zeros(len(sizes), dtype=np.intp)
    offsets[1:] = np.cumsum(sizes[:-1])
    return np.add.reduceat(ranks, offsets, axis=1)


def signed_rank_sums(d: np.ndarray) -> np.ndarray:
    """Per-replicate Pratt signed-rank sums.

    Ranks |d| per row with midranks (zeros included), then sums sign * rank.
    """
    d = np.ascontiguousarray(d, dtype=np.float64)
    ranks = scipy.stats.rankdata(np.abs(d), method="average", axis=1)
    return np.sum(np.sign(d) * ranks, axis=1)
