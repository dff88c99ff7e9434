"""Brute-force local-sensitivity oracle.

Empirically checks the sensitivity constants used by the Laplace
mechanisms: for a given database it enumerates every single-row
replacement (value times group reassignment for grouped data, a new
difference for paired data, a new bounded value for the t components) and
reports the largest change in the statistic.

Rank statistics whose private path breaks ties at random (h and h_abs) are
evaluated over every distinct tie-break resolution on both sides, since a
fixed tie-break rule could realize any of them. The Mann-Whitney and Pratt
statistics rank ties with midranks, matching their sensitivity arguments,
so they are evaluated directly.

Exhaustive enumeration only: inputs above the row cap are refused.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from .errors import InvalidInputError, InvalidParameterError
from .rankstats import (
    BoundedSample,
    GroupedSample,
    PairedSample,
    kwabs_parity_factor,
)

DEFAULT_ROW_CAP = 8

GROUPED_STATS = ("kw", "kwabs", "mw")
PAIRED_STATS = ("wilcoxon",)
BOUNDED_STATS = ("t_mean", "t_var")


# ---------------------------------------------------------------------------
# Statistic evaluation on small configurations
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _kw_from_label_seq(seq: tuple[int, ...], g: int) -> float:
    n = len(seq)
    rank_sum = [0] * g
    count = [0] * g
    for pos, lab in enumerate(seq):
        rank_sum[lab] += pos + 1
        count[lab] += 1
    acc = 0.0
    for i in range(g):
        if count[i]:
            acc += rank_sum[i] * rank_sum[i] / count[i]
    return 12.0 / (n * (n + 1)) * acc - 3.0 * (n + 1)


@lru_cache(maxsize=None)
def _kwabs_from_label_seq(seq: tuple[int, ...], g: int) -> float:
    n = len(seq)
    rank_sum = [0] * g
    count = [0] * g
    for pos, lab in enumerate(seq):
        rank_sum[lab] += pos + 1
        count[lab] += 1
    center = 0.5 * (n + 1)
    acc = 0.0
    for i in range(g):
        if count[i]:
            acc += count[i] * abs(rank_sum[i] / count[i] - center)
    return kwabs_parity_factor(n) * acc


def _tie_resolutions(values, labels):
    """Distinct rank-ordered label sequences over all tie-break choices."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    runs = []
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        runs.append(tuple(labels[k] for k in order[i : j + 1]))
        i = j + 1
    per_run = [sorted(set(itertools.permutations(run))) for run in runs]
    for combo in itertools.product(*per_run):
        yield tuple(lab for run in combo for lab in run)


def _range_over_resolutions(stat_fn, values, labels, g):
    lo = hi = None
    for seq in _tie_resolutions(values, labels):
        val = stat_fn(seq, g)
        lo = val if lo is None or val < lo else lo
        hi = val if hi is None or val > hi else hi
    return lo, hi


def _midranks(sorted_keys):
    ranks = [0.0] * len(sorted_keys)
    i = 0
    n = len(sorted_keys)
    while i < n:
        j = i
        while j + 1 < n and sorted_keys[j + 1] == sorted_keys[i]:
            j += 1
        mid = 0.5 * ((i + 1) + (j + 1))
        for k in range(i, j + 1):
            ranks[k] = mid
        i = j + 1
    return ranks


def _mw_value(values, labels):
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks_sorted = _midranks([values[i] for i in order])
    rank_sum = [0.0, 0.0]
    count = [0, 0]
    for pos, idx in enumerate(order):
        rank_sum[labels[idx]] += ranks_sorted[pos]
        count[labels[idx]] += 1
    u1 = rank_sum[0] - count[0] * (count[0] + 1) / 2.0
    u2 = rank_sum[1] - count[1] * (count[1] + 1) / 2.0
    return min(u1, u2)


def _pratt_value(diffs):
    order = sorted(range(len(diffs)), key=lambda i: abs(diffs[i]))
    ranks_sorted = _midranks([abs(diffs[i]) for i in order])
    w = 0.0
    for pos, idx in enumerate(order):
        d = diffs[idx]
        if d > 0:
            w += ranks_sorted[pos]
        elif d < 0:
            w -= ranks_sorted[pos]
    return w


# ---------------------------------------------------------------------------
# Replacement grids
# ---------------------------------------------------------------------------


def _rank_value_grid(values):
    """Below-all, above-all, equal-to-existing and strictly-between values."""
    distinct = sorted(set(values))
    grid = [distinct[0] - 1.0, distinct[-1] + 1.0]
    grid.extend(distinct)
    for a, b in zip(distinct, distinct[1:]):
        grid.append(0.5 * (a + b))
    return grid


def _difference_grid(diffs):
    mags = sorted({abs(d) for d in diffs if d != 0.0})
    grid = {0.0}
    candidates = list(mags)
    for a, b in zip(mags, mags[1:]):
        candidates.append(0.5 * (a + b))
    if mags:
        candidates.append(0.5 * mags[0])
        candidates.append(mags[-1] + 1.0)
    else:
        candidates.append(1.0)
    for c in candidates:
        grid.add(c)
        grid.add(-c)
    return sorted(grid)


# ---------------------------------------------------------------------------
# Oracle
# ---------------------------------------------------------------------------


def _grouped_oracle(stat, db: GroupedSample, value_grid):
    values = list(db.pooled())
    labels = []
    for gi, grp in enumerate(db.groups):
        labels.extend([gi] * grp.size)
    g = db.g
    n = len(values)
    grid = list(value_grid) if value_grid is not None else _rank_value_grid(values)

    if stat == "mw":
        if g != 2 or min(labels.count(0), labels.count(1)) == 0:
            raise InvalidInputError("mw oracle needs two nonempty groups")

        def stat_range(vals, labs):
            v = _mw_value(vals, labs)
            return v, v

    else:
        stat_fn = _kw_from_label_seq if stat == "kw" else _kwabs_from_label_seq

        def stat_range(vals, labs):
            return _range_over_resolutions(stat_fn, vals, labs, g)

    base_lo, base_hi = stat_range(values, labels)
    best = 0.0
    for p in range(n):
        for new_value in grid:
            for new_group in range(g):
                if new_value == values[p] and new_group == labels[p]:
                    continue
                new_values = values.copy()
                new_labels = labels.copy()
                new_values[p] = float(new_value)
                new_labels[p] = new_group
                if stat == "mw" and (
                    new_labels.count(0) == 0 or new_labels.count(1) == 0
                ):
                    continue  # U is undefined with an empty group
                lo, hi = stat_range(new_values, new_labels)
                best = max(best, hi - base_lo, base_hi - lo)
    return best


def _paired_oracle(db: PairedSample, value_grid):
    diffs = [float(d) for d in db.differences()]
    grid = list(value_grid) if value_grid is not None else _difference_grid(diffs)
    base = _pratt_value(diffs)
    best = 0.0
    for p in range(len(diffs)):
        for new_d in grid:
            if new_d == diffs[p]:
                continue
            new_diffs = diffs.copy()
            new_diffs[p] = float(new_d)
            best = max(best, abs(_pratt_value(new_diffs) - base))
    return best


def _bounded_oracle(stat, db: BoundedSample, value_grid):
    values = np.asarray(db.values, dtype=np.float64)
    grid = (
        np.asarray(value_grid, dtype=np.float64)
        if value_grid is not None
        else np.linspace(-1.0, 1.0, 9)
    )
    if (np.abs(grid) > 1.0).any():
        raise InvalidParameterError("t oracle grid must stay inside [-1, 1]")

    def measure(x):
        return float(np.mean(x)) if stat == "t_mean" else float(np.var(x, ddof=1))

    base = measure(values)
    best = 0.0
    for p in range(values.size):
        for new_value in grid:
            new_values = values.copy()
            new_values[p] = new_value
            best = max(best, abs(measure(new_values) - base))
    return best


def local_sensitivity_oracle(stat: str, db, value_grid=None, cap: int = DEFAULT_ROW_CAP) -> float:
    """Max |stat(x) - stat(x')| over every single-row replacement of ``db``.

    ``stat`` is one of ``kw``, ``kwabs``, ``mw``, ``wilcoxon``, ``t_mean``
    or ``t_var``. ``value_grid`` overrides the default replacement grid
    (new observation values; new differences for ``wilcoxon``). Databases
    with more than ``cap`` rows are refused.
    """
    if stat in GROUPED_STATS:
        if not isinstance(db, GroupedSample):
            raise InvalidInputError(f"{stat} oracle expects a GroupedSample")
        if db.n > cap:
            raise InvalidParameterError(f"row count {db.n} exceeds the oracle cap {cap}")
        return _grouped_oracle(stat, db, value_grid)
    if stat in PAIRED_STATS:
        if not isinstance(db, PairedSample):
            raise InvalidInputError("wilcoxon oracle expects a PairedSample")
        if db.n > cap:
            raise InvalidParameterError(f"row count {db.n} exceeds the oracle cap {cap}")
        return _paired_oracle(db, value_grid)
    if stat in BOUNDED_STATS:
        if not isinstance(db, BoundedSample):
            raise InvalidInputError(f"{stat} oracle expects a BoundedSample")
        if db.n > cap:
            raise InvalidParameterError(f"row count {db.n} exceeds the oracle cap {cap}")
        return _bounded_oracle(stat, db, value_grid)
    raise InvalidParameterError(f"unknown statistic kind: {stat!r}")
