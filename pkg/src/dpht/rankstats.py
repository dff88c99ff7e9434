"""Ranking kernels and the public (noise-free) test statistics.

Five classical statistics are implemented exactly as a statistician would
compute them by hand: the Kruskal-Wallis h, its absolute-value variant
h_abs, the Mann-Whitney U, the Wilcoxon signed-rank w (standard and Pratt
zero-handling), and the one-sample t. Rank vectors over the pooled data
are produced either with midranks (ties share the average rank) or with a
uniformly random tie-break, which yields an exact permutation of 1..n.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, InvalidInputError
from .streams import RandomStream

MIDRANK = "midrank"
RANDOM_TIEBREAK = "random-tiebreak"


# ---------------------------------------------------------------------------
# Sample containers
# ---------------------------------------------------------------------------


def _as_finite_array(values, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidInputError(f"{what} must be one-dimensional")
    if arr.size and not np.isfinite(arr).all():
        raise InvalidInputError(f"{what} must contain only finite values")
    return arr


@dataclass(frozen=True)
class GroupedSample:
    """Continuous observations partitioned into ``g`` groups.

    ``g`` is the declared number of valid groups; individual groups may be
    empty. Ranks over the pooled sample follow the concatenation order of
    ``groups``.
    """

    groups: tuple[np.ndarray, ...]
    g: int = field(default=0)

    def __init__(self, groups, g: int | None = None):
        arrays = tuple(_as_finite_array(grp, "group values") for grp in groups)
        declared = len(arrays) if g is None else int(g)
        if declared < 2:
            raise InvalidInputError("need at least two groups")
        if declared < len(arrays):
            raise InvalidInputError("declared g smaller than the observed group count")
        arrays = arrays + tuple(np.empty(0) for _ in range(declared - len(arrays)))
        if sum(a.size for a in arrays) < 2:
            raise InvalidInputError("need at least two observations in total")
        object.__setattr__(self, "groups", arrays)
        object.__setattr__(self, "g", declared)

    @property
    def n(self) -> int:
        return sum(a.size for a in self.groups)

    def sizes(self) -> np.ndarray:
        return np.array([a.size for a in self.groups], dtype=np.int64)

    def pooled(self) -> np.ndarray:
        """All observations in group-concatenation order."""
        return np.concatenate(self.groups) if self.groups else np.empty(0)


@dataclass(frozen=True)
class PairedSample:
    """Rows of paired observations (u_i, v_i)."""

    u: np.ndarray
    v: np.ndarray

    def __init__(self, rows=None, u=None, v=None):
        if rows is not None:
            arr = np.asarray(rows, dtype=np.float64)
            if arr.ndim != 2 or arr.shape[1] != 2:
                raise InvalidInputError("rows must be an (n, 2) table of (u, v) pairs")
            u, v = arr[:, 0], arr[:, 1]
        u = _as_finite_array(u, "u values")
        v = _as_finite_array(v, "v values")
        if u.size != v.size:
            raise InvalidInputError("u and v must have equal length")
        if u.size < 1:
            raise InvalidInputError("need at least one row")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def n(self) -> int:
        return self.u.size

    def differences(self) -> np.ndarray:
        return self.v - self.u


@dataclass(frozen=True)
class BoundedSample:
    """Observations scaled into [-1, 1] for the private t-test."""

    values: np.ndarray

    def __init__(self, values):
        arr = _as_finite_array(values, "values")
        if arr.size < 2:
            raise InvalidInputError("need at least two observations")
        if arr.size and (np.abs(arr) > 1.0).any():
            raise InvalidInputError(
                "values must lie in [-1, 1]; rescale the data before testing"
            )
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class RankVector:
    """Ranks of a pooled sample plus the tie scheme that produced them."""

    ranks: np.ndarray
    scheme: str

    @property
    def n(self) -> int:
        return self.ranks.size


# ---------------------------------------------------------------------------
# Ranking
# ---------------------------------------------------------------------------


def rank_midrank(values) -> RankVector:
    """Rank with ties sharing the average of the positions they occupy."""
    arr = _as_finite_array(values, "values")
    if arr.size == 0:
        raise InvalidInputError("cannot rank an empty sample")
    order = np.argsort(arr, kind="stable")
    sorted_vals = arr[order]
    ranks = np.empty(arr.size, dtype=np.float64)
    i = 0
    n = arr.size
    while i < n:
        j = i
        while j + 1 < n and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * ((i + 1) + (j + 1))
        i = j + 1
    return RankVector(ranks=ranks, scheme=MIDRANK)


def rank_random(values, rng: RandomStream) -> RankVector:
    """Rank with ties broken by a uniformly random permutation per tie class."""
    arr = _as_finite_array(values, "values")
    if arr.size == 0:
        raise InvalidInputError("cannot rank an empty sample")
    order = np.argsort(arr, kind="stable")
    sorted_vals = arr[order]
    ranks = np.empty(arr.size, dtype=np.float64)
    i = 0
    n = arr.size
    while i < n:
        j = i
        while j + 1 < n and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        if j == i:
            ranks[order[i]] = i + 1
        else:
            block = order[i : j + 1]
            ranks[block[rng.permutation(j - i + 1)]] = np.arange(i + 1, j + 2)
        i = j + 1
    return RankVector(ranks=ranks, scheme=RANDOM_TIEBREAK)


def _is_permutation(ranks: np.ndarray) -> bool:
    n = ranks.size
    return bool(np.array_equal(np.sort(ranks), np.arange(1, n + 1)))


def _group_rank_view(db: GroupedSample, rv: RankVector) -> list[np.ndarray]:
    if rv.n != db.n:
        raise InvalidInputError("rank vector length does not match the sample")
    out = []
    start = 0
    for size in db.sizes():
        out.append(rv.ranks[start : start + size])
        start += size
    return out


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------


def kw_stat(db: GroupedSample, ranks: RankVector) -> float:
    """Kruskal-Wallis h.

    Uses the general (tie-aware) form for midrank inputs and the simplified
    untied form otherwise; the two agree on tie-free data.
    """
    n = db.n
    if n < 2:
        raise DegenerateInputError("Kruskal-Wallis needs at least two observations")
    per_group = _group_rank_view(db, ranks)
    rbar = 0.5 * (n + 1)
    if ranks.scheme == MIDRANK:
        num = 0.0
        for grp in per_group:
            if grp.size:
                num += grp.size * (grp.mean() - rbar) ** 2
        den = float(np.sum((ranks.ranks - rbar) ** 2))
        if den == 0.0:
            raise DegenerateInputError("all observations tied; h undefined")
        return (n - 1) * num / den
    if not _is_permutation(ranks.ranks):
        raise InvalidInputError("simplified h requires untied ranks")
    acc = 0.0
    for grp in per_group:
        if grp.size:
            acc += grp.size * grp.mean() ** 2
    return 12.0 / (n * (n + 1)) * acc - 3.0 * (n + 1)


def kwabs_parity_factor(n: int) -> float:
    """Leading constant of the untied h_abs form; depends on the parity of n."""
    if n % 2 == 0:
        return 4.0 * (n - 1) / (n * n)
    return 4.0 / (n + 1)


def kwabs_stat(db: GroupedSample, ranks: RankVector) -> float:
    """Absolute-value Kruskal-Wallis h_abs on untied ranks."""
    n = db.n
    if n < 2:
        raise DegenerateInputError("h_abs needs at least two observations")
    if not _is_permutation(ranks.ranks):
        raise InvalidInputError("h_abs requires untied ranks; break ties first")
    rbar = 0.5 * (n + 1)
    acc = 0.0
    for grp in _group_rank_view(db, ranks):
        if grp.size:
            acc += grp.size * abs(grp.mean() - rbar)
    return kwabs_parity_factor(n) * acc


def mw_stat(db: GroupedSample, ranks: RankVector) -> tuple[float, float, float]:
    """Mann-Whitney statistic for two groups: returns (U, U1, U2).

    U_i = R_i - n_i(n_i+1)/2 and U is the minimum of the two; low values of
    U are the rejection direction.
    """
    sizes = db.sizes()
    if db.g != 2:
        raise DegenerateInputError("Mann-Whitney requires exactly two groups")
    if (sizes == 0).any():
        raise DegenerateInputError("Mann-Whitney is undefined with an empty group")
    per_group = _group_rank_view(db, ranks)
    u = []
    for grp, size in zip(per_group, sizes):
        u.append(float(grp.sum()) - size * (size + 1) / 2.0)
    return min(u), u[0], u[1]


def _signed_rank_sum(d: np.ndarray, drop_zeros: bool) -> float:
    if drop_zeros:
        d = d[d != 0.0]
        if d.size == 0:
            return 0.0
    ranks = rank_midrank(np.abs(d)).ranks
    return float(np.sum(np.sign(d) * ranks))


def wilcoxon_stat(db: PairedSample) -> float:
    """Standard Wilcoxon signed-rank w: zero differences are dropped."""
    return _signed_rank_sum(db.differences(), drop_zeros=True)


def wilcoxon_pratt_stat(db: PairedSample) -> float:
    """Pratt-variant w: zero differences stay in the ranking with sign 0."""
    return _signed_rank_sum(db.differences(), drop_zeros=False)


def t_stat(db: BoundedSample) -> float:
    """One-sample t statistic, mean over (s / sqrt n)."""
    x = db.values
    n = x.size
    if n < 2:
        raise DegenerateInputError("t statistic needs at least two observations")
    s2 = float(np.var(x, ddof=1))
    if s2 == 0.0:
        raise DegenerateInputError("zero sample variance; t statistic undefined")
    return float(np.mean(x)) / np.sqrt(s2 / n)
