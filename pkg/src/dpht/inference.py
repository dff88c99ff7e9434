"""Reference (null) distributions, p-values and the complete private tests.

A complete test spends its privacy budget once, on the private statistic.
The reference distribution is then simulated from released values only
(n, g, epsilon, delta, m*), never from the data, so everything after the
statistic is post-processing.

Reference modes:

* Kruskal-Wallis: ``chi2-laplace`` (default) draws chi^2(g-1) plus Laplace
  noise; ``full-sim`` simulates uniform null databases end to end.
* Absolute-value Kruskal-Wallis: full simulation with equal group sizes,
  the worst case for the critical value.
* Mann-Whitney: ``full-sim`` (default) replays the whole private
  statistic, including a fresh group-size estimate, per replicate at
  group sizes (m*, n - m*); ``normal-laplace`` is a faster approximation
  that ignores the min-fold of U and is not always conservative.
* Wilcoxon: the normal approximation of the Pratt statistic plus noise.
* t-test: simulated databases of truncated Normal(0, 0.3) draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import InvalidInputError, InvalidParameterError
from .privacy import (
    KW_SENSITIVITY,
    KWABS_SENSITIVITY,
    MW_DEFAULT_SPLIT,
    T_DEFAULT_SPLIT,
    PrivacyBudget,
    laplace_sample,
    mw_shrink_offset,
    private_kw,
    private_kwabs,
    private_mw,
    private_t,
    private_wilcoxon,
)
from .rankstats import (
    BoundedSample,
    GroupedSample,
    PairedSample,
    kwabs_parity_factor,
)
from .streams import RandomStream

UPPER_TAIL = "upper-tail"
LOWER_TAIL = "lower-tail"
TWO_SIDED = "two-sided"

TEST_KINDS = ("kw", "kwabs", "mw", "wilcoxon", "ttest")

MIN_RELEASED_Z = 1000  # resolution floor for a released p-value

T_REFERENCE_SIGMA = 0.3

# Rows per simulation chunk; element-capped so large-n chunks stay in memory.
_CHUNK_ELEMENTS = 1 << 22


@dataclass
class ReferenceDistribution:
    """Simulated null statistics plus the rejection direction."""

    samples: np.ndarray
    direction: str
    provenance: str

    def __post_init__(self):
        self.samples = np.sort(np.asarray(self.samples, dtype=np.float64))
        self._abs_sorted = None
        if self.direction not in (UPPER_TAIL, LOWER_TAIL, TWO_SIDED):
            raise InvalidParameterError(f"unknown direction {self.direction!r}")
        if self.samples.size < 1:
            raise InvalidParameterError("reference distribution needs at least one sample")

    @property
    def z(self) -> int:
        return int(self.samples.size)

    def abs_sorted(self) -> np.ndarray:
        if self._abs_sorted is None:
            self._abs_sorted = np.sort(np.abs(self.samples))
        return self._abs_sorted


# ---------------------------------------------------------------------------
# Simulation helpers
# ---------------------------------------------------------------------------


def near_equal_sizes(n: int, g: int) -> np.ndarray:
    """n observations divided almost equally: the first n mod g groups get one extra."""
    base = n // g
    sizes = np.full(g, base, dtype=np.int64)
    sizes[: n % g] += 1
    return sizes


def kw_from_rank_sums(rank_sums, sizes, n):
    sizes = np.asarray(sizes, dtype=np.float64)
    acc = np.sum(rank_sums * rank_sums / sizes, axis=-1)
    return 12.0 / (n * (n + 1)) * acc - 3.0 * (n + 1)


def kwabs_from_rank_sums(rank_sums, sizes, n):
    sizes = np.asarray(sizes, dtype=np.float64)
    center = 0.5 * (n + 1)
    acc = np.sum(sizes * np.abs(rank_sums / sizes - center), axis=-1)
    return kwabs_parity_factor(n) * acc


def mw_from_rank_sums(rank_sums, sizes):
    sizes = np.asarray(sizes, dtype=np.float64)
    u = rank_sums - sizes * (sizes + 1) / 2.0
    return np.min(u, axis=-1)


def _chunk_rows(n: int) -> int:
    return max(1, _CHUNK_ELEMENTS // max(1, n))


def _noise_vector(scale: float, rng: RandomStream, size: int) -> np.ndarray:
    if scale == 0.0:
        return np.zeros(size)
    return laplace_sample(scale, rng, size)


def _simulate_grouped_stats(kind: str, sizes: np.ndarray, z: int, data_rng: RandomStream) -> np.ndarray:
    """Null statistics of uniform databases with the given group sizes."""
    n = int(sizes.sum())
    out = np.empty(z)
    rows_per = _chunk_rows(n)
    done = 0
    chunk_index = 0
    while done < z:
        rows = min(rows_per, z - done)
        u = data_rng.child(chunk_index).uniform_open((rows, n))
        rank_sums = _backend.group_rank_sums(u, sizes)
        if kind == "kw":
            out[done : done + rows] = kw_from_rank_sums(rank_sums, sizes, n)
        elif kind == "kwabs":
            out[done : done + rows] = kwabs_from_rank_sums(rank_sums, sizes, n)
        elif kind == "mw":
            out[done : done + rows] = mw_from_rank_sums(rank_sums, sizes)
        else:  # pragma: no cover
            raise InvalidParameterError(f"unknown grouped kind {kind!r}")
        done += rows
        chunk_index += 1
    return out


def _validate_common(g: int | None, n: int, z: int):
    if z < 1:
        raise InvalidParameterError("z must be at least 1")
    if g is not None:
        if g < 2:
            raise InvalidParameterError("need at least two groups")
        if n < g:
            raise InvalidParameterError("need at least one observation per group")


# ---------------------------------------------------------------------------
# Reference distributions
# ---------------------------------------------------------------------------


def ref_kw(
    g: int,
    n: int,
    epsilon: float,
    z: int,
    rng: RandomStream,
    mode: str = "chi2-laplace",
) -> ReferenceDistribution:
    """Null distribution of the private Kruskal-Wallis statistic."""
    _validate_common(g, n, z)
    if not epsilon > 0:
        raise InvalidParameterError("epsilon must be positive")
    scale = KW_SENSITIVITY / epsilon if epsilon != math.inf else 0.0
    if mode == "chi2-laplace":
        samples = rng.child(0).chisquare(g - 1, z) + _noise_vector(scale, rng.child(1), z)
        return ReferenceDistribution(samples, UPPER_TAIL, "chi2-laplace")
    if mode == "full-sim":
        stats = _simulate_grouped_stats("kw", near_equal_sizes(n, g), z, rng.child(0))
        samples = stats + _noise_vector(scale, rng.child(1), z)
        return ReferenceDistribution(samples, UPPER_TAIL, "full-sim")
    raise InvalidParameterError(f"unknown kw reference mode {mode!r}")


def _kwabs_reference_for_sizes(
    sizes: np.ndarray, epsilon: float, z: int, rng: RandomStream
) -> ReferenceDistribution:
    n = int(sizes.sum())
    scale = KWABS_SENSITIVITY / epsilon if epsilon != math.inf else 0.0
    stats = _simulate_grouped_stats("kwabs", sizes, z, rng.child(0))
    samples = stats + _noise_vector(scale, rng.child(1), z)
    return ReferenceDistribution(samples, UPPER_TAIL, "full-sim")


def ref_kwabs(g: int, n: int, epsilon: float, z: int, rng: RandomStream) -> ReferenceDistribution:
    """Null distribution of the private h_abs statistic.

    Simulated with (near) equal group sizes: the expected statistic is
    maximized there, so the resulting critical value is the conservative
    worst case over the unknown true sizes.
    """
    _validate_common(g, n, z)
    if not epsilon > 0:
        raise InvalidParameterError("epsilon must be positive")
    return _kwabs_reference_for_sizes(near_equal_sizes(n, g), epsilon, z, rng)


def ref_mw(
    n: int,
    m_star: int,
    budget: PrivacyBudget,
    z: int,
    rng: RandomStream,
    mode: str = "full-sim",
    known_equal: bool = False,
) -> ReferenceDistribution:
    """Null distribution of the private Mann-Whitney statistic at sizes (m*, n - m*).

    ``full-sim`` (the default) replays the whole statistic and captures the
    folding of U = min(U1, U2) around n1 n2 / 2. The ``normal-laplace``
    shortcut draws the unfolded rank-sum normal, which understates the
    lower-tail mass; it stops being conservative once n is large enough
    that the m* shrink no longer compensates, so it is opt-in only.
    """
    _validate_common(None, n, z)
    if not 0 <= m_star <= n // 2:
        raise InvalidParameterError("m_star must lie in [0, floor(n/2)]")
    if known_equal:
        eps_m, eps_u = math.inf, budget.epsilon
    else:
        eps_m, eps_u = budget.mw_epsilons()
    u_scale = (n - m_star) / eps_u if eps_u != math.inf else 0.0

    if mode == "normal-laplace":
        mean = m_star * (n - m_star) / 2.0
        var = m_star * (n - m_star) * (n + 1) / 12.0
        if var > 0:
            samples = rng.child(0).normal(mean, math.sqrt(var), z)
        else:
            samples = np.full(z, mean)
        samples = samples + _noise_vector(u_scale, rng.child(1), z)
        return ReferenceDistribution(samples, LOWER_TAIL, "normal-laplace")

    if mode == "full-sim":
        if m_star == 0:
            # One group is empty in the simulated database; its rank sum is
            # the empty sum, so U = min(0, U2) = 0 and only noise remains.
            u_values = np.zeros(z)
        else:
            sizes = np.array([m_star, n - m_star], dtype=np.int64)
            u_values = _simulate_grouped_stats("mw", sizes, z, rng.child(0))
        if known_equal:
            samples = u_values + _noise_vector(u_scale, rng.child(1), z)
        else:
            # Faithful replay: each replicate re-estimates the group size.
            m_tilde = m_star + _noise_vector(
                1.0 / eps_m if eps_m != math.inf else 0.0, rng.child(1), z
            )
            c = mw_shrink_offset(eps_m, budget.delta)
            m_star_k = np.clip(np.ceil(m_tilde - c), 0, n // 2)
            scales = (n - m_star_k) / eps_u if eps_u != math.inf else np.zeros(z)
            samples = u_values + _noise_vector(1.0, rng.child(2), z) * scales
        return ReferenceDistribution(samples, LOWER_TAIL, "full-sim")

    raise InvalidParameterError(f"unknown mw reference mode {mode!r}")


def ref_wilcoxon(n: int, epsilon: float, z: int, rng: RandomStream) -> ReferenceDistribution:
    """Null distribution of the private Pratt statistic.

    Normal(0, n(n+1)(2n+1)/6) plus Laplace(2n/epsilon); two-sided.
    """
    _validate_common(None, max(n, 1), z)
    if n < 1:
        raise InvalidParameterError("n must be at least 1")
    if not epsilon > 0:
        raise InvalidParameterError("epsilon must be positive")
    sd = math.sqrt(n * (n + 1) * (2 * n + 1) / 6.0)
    scale = 2.0 * n / epsilon if epsilon != math.inf else 0.0
    samples = rng.child(0).normal(0.0, sd, z) + _noise_vector(scale, rng.child(1), z)
    return ReferenceDistribution(samples, TWO_SIDED, "normal-laplace")


def _truncated_normal(rng: RandomStream, rows: int, n: int, sigma: float) -> np.ndarray:
    x = rng.normal(0.0, sigma, (rows, n))
    bad = np.abs(x) > 1.0
    while bad.any():
        x[bad] = rng.normal(0.0, sigma, int(bad.sum()))
        bad = np.abs(x) > 1.0
    return x


def ref_t(n: int, budget: PrivacyBudget, z: int, rng: RandomStream) -> ReferenceDistribution:
    """Null distribution of the private t statistic.

    Databases of n Normal(0, 0.3) draws, truncated to [-1, 1] by rejection
    resampling, each run through the private statistic.
    """
    _validate_common(None, n, z)
    if n < 2:
        raise InvalidParameterError("n must be at least 2")
    eps_mean, eps_var = budget.t_epsilons()
    mean_scale = (2.0 / n) / eps_mean if eps_mean != math.inf else 0.0
    var_scale = (5.0 / (n - 1)) / eps_var if eps_var != math.inf else 0.0

    out = np.empty(z)
    rows_per = _chunk_rows(n)
    done = 0
    chunk_index = 0
    data_rng = rng.child(0)
    mean_noise_rng = rng.child(1)
    var_noise_rng = rng.child(2)
    while done < z:
        rows = min(rows_per, z - done)
        x = _truncated_normal(data_rng.child(chunk_index), rows, n, T_REFERENCE_SIGMA)
        mean_tilde = np.mean(x, axis=1) + _noise_vector(mean_scale, mean_noise_rng, rows)
        var_tilde = np.var(x, axis=1, ddof=1) + _noise_vector(var_scale, var_noise_rng, rows)
        t = np.zeros(rows)
        ok = var_tilde > 0.0
        t[ok] = mean_tilde[ok] / np.sqrt(var_tilde[ok] / n)
        out[done : done + rows] = t
        done += rows
        chunk_index += 1
    return ReferenceDistribution(out, TWO_SIDED, "normal-sim")


# ---------------------------------------------------------------------------
# p-values and critical values
# ---------------------------------------------------------------------------


def p_value(stat: float, ref: ReferenceDistribution) -> float:
    """Tail fraction of the reference at the observed statistic."""
    z = ref.z
    if ref.direction == UPPER_TAIL:
        count = z - np.searchsorted(ref.samples, stat, side="left")
    elif ref.direction == LOWER_TAIL:
        count = np.searchsorted(ref.samples, stat, side="right")
    else:
        count = z - np.searchsorted(ref.abs_sorted(), abs(stat), side="left")
    return float(count) / z


def critical_value(ref: ReferenceDistribution, alpha: float) -> float:
    """Empirical critical value at significance level alpha.

    Upper tail: the (1 - alpha) quantile; lower tail: the alpha quantile;
    two-sided: the (1 - alpha) quantile of the absolute values. Requires
    z * alpha >= 10 so the tail is actually resolved.
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidParameterError("alpha must lie in (0, 1)")
    if ref.z * alpha < 10:
        raise InvalidParameterError(
            f"alpha={alpha} is not resolvable with z={ref.z} samples (need z*alpha >= 10)"
        )
    if ref.direction == UPPER_TAIL:
        return float(np.quantile(ref.samples, 1.0 - alpha))
    if ref.direction == LOWER_TAIL:
        return float(np.quantile(ref.samples, alpha))
    return float(np.quantile(ref.abs_sorted(), 1.0 - alpha))


# ---------------------------------------------------------------------------
# Complete tests
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TestOutcome:
    """Result of one complete private test, echoing its full configuration."""

    test: str
    statistic: float
    p_value: float
    n: int
    g: int | None
    epsilon: float
    delta: float
    split: float | None
    z: int
    seed: int
    stream: int
    reference: str
    m_tilde: float | None = None
    m_star: int | None = None


class ReferenceCache:
    """Memoizes reference distributions on their public parameters.

    Each distinct key gets its own derived stream, so cached results do not
    depend on lookup order of other keys beyond first-encounter order, and
    a fixed sequence of requests is fully reproducible.
    """

    def __init__(self, rng: RandomStream):
        self._rng = rng
        self._store: dict = {}

    def get(self, key, builder):
        if key not in self._store:
            self._store[key] = builder(self._rng.child(len(self._store)))
        return self._store[key]


def _default_mode(test: str) -> str | None:
    if test == "kw":
        return "chi2-laplace"
    if test == "mw":
        return "full-sim"
    return None


def run_test(
    data,
    test: str,
    budget: PrivacyBudget,
    z: int,
    rng: RandomStream,
    known_equal: bool = False,
    mode: str | None = None,
    ref_cache: ReferenceCache | None = None,
) -> TestOutcome:
    """Run a complete private hypothesis test.

    The private statistic is computed once from the data; the reference
    distribution is then built from released values only. ``rng`` fully
    determines the outcome. ``ref_cache`` lets callers reuse reference
    distributions across runs with identical public parameters.
    """
    if test not in TEST_KINDS:
        raise InvalidParameterError(f"unknown test kind {test!r}")
    if z < MIN_RELEASED_Z:
        raise InvalidParameterError(f"a released p-value needs z >= {MIN_RELEASED_Z}")
    mode = mode if mode is not None else _default_mode(test)
    stat_rng = rng.child(0)
    ref_rng = rng.child(1)

    def build_ref(key, builder):
        if ref_cache is not None:
            return ref_cache.get(key, builder)
        return builder(ref_rng)

    g: int | None = None
    m_tilde = None
    m_star = None
    split: float | None = None

    if test in ("kw", "kwabs", "mw"):
        if not isinstance(data, GroupedSample):
            raise InvalidInputError(f"{test} expects grouped data")
        n, g = data.n, data.g
        if test == "kw":
            result = private_kw(data, budget, stat_rng)
            ref = build_ref(
                ("kw", g, n, budget.epsilon, z, mode),
                lambda r: ref_kw(g, n, budget.epsilon, z, r, mode=mode),
            )
        elif test == "kwabs":
            result = private_kwabs(data, budget, stat_rng)
            ref = build_ref(
                ("kwabs", g, n, budget.epsilon, z),
                lambda r: ref_kwabs(g, n, budget.epsilon, z, r),
            )
        else:
            result = private_mw(data, budget, stat_rng, known_equal=known_equal)
            m_tilde, m_star = result.m_tilde, result.m_star
            if not known_equal:
                split = budget.split if budget.split is not None else MW_DEFAULT_SPLIT
            ref = build_ref(
                ("mw", n, m_star, budget.epsilon, budget.delta, budget.split, z, mode, known_equal),
                lambda r: ref_mw(n, m_star, budget, z, r, mode=mode, known_equal=known_equal),
            )
    elif test == "wilcoxon":
        if not isinstance(data, PairedSample):
            raise InvalidInputError("wilcoxon expects paired data")
        n = data.n
        result = private_wilcoxon(data, budget, stat_rng)
        ref = build_ref(
            ("wilcoxon", n, budget.epsilon, z),
            lambda r: ref_wilcoxon(n, budget.epsilon, z, r),
        )
    else:
        if not isinstance(data, BoundedSample):
            raise InvalidInputError("ttest expects bounded single-column data")
        n = data.n
        result = private_t(data, budget, stat_rng)
        split = budget.split if budget.split is not None else T_DEFAULT_SPLIT
        ref = build_ref(
            ("ttest", n, budget.epsilon, budget.split, z),
            lambda r: ref_t(n, budget, z, r),
        )

    return TestOutcome(
        test=test,
        statistic=result.statistic,
        p_value=p_value(result.statistic, ref),
        n=n,
        g=g,
        epsilon=budget.epsilon,
        delta=budget.delta,
        split=split,
        z=z,
        seed=rng.seed,
        stream=rng.stream,
        reference=ref.provenance,
        m_tilde=m_tilde,
        m_star=m_star,
    )
