"""Laplace mechanism and the private test statistics.

Each ``private_*`` function spends the whole privacy budget it is given on
one release. Noise scales are fixed sensitivity constants over epsilon:
87 for the Kruskal-Wallis h, 8 for the absolute-value variant, 2n for the
Pratt signed-rank sum, and 2/n plus 5/(n-1) for the t-test's mean and
variance components. The Mann-Whitney statistic instead uses a private
upper bound on its local sensitivity: a noisy estimate of the minimum
group size m is shrunk by c = -ln(2*delta)/eps_m so that, with probability
at least 1 - delta, n - m* bounds the local sensitivity max{n1, n2}.

With ``epsilon = inf`` every noise scale is zero and the private statistics
coincide with their public counterparts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, InvalidParameterError
from .rankstats import (
    BoundedSample,
    GroupedSample,
    PairedSample,
    kw_stat,
    kwabs_stat,
    mw_stat,
    rank_midrank,
    rank_random,
    wilcoxon_pratt_stat,
)
from .streams import RandomStream

KW_SENSITIVITY = 87.0
KWABS_SENSITIVITY = 8.0

MW_DEFAULT_SPLIT = 0.65  # fraction of epsilon spent estimating m
T_DEFAULT_SPLIT = 0.5  # fraction of epsilon spent on the mean


@dataclass(frozen=True)
class PrivacyBudget:
    """Privacy parameters for a single test run.

    ``split`` is interpreted per test: for Mann-Whitney it is the fraction
    of epsilon allotted to the group-size estimate (default 0.65); for the
    t-test it is the fraction allotted to the mean (default 0.5).
    """

    epsilon: float
    delta: float = 0.0
    split: float | None = None

    def __post_init__(self):
        if not (self.epsilon > 0):
            raise InvalidParameterError("epsilon must be positive")
        if not (0.0 <= self.delta < 1.0):
            raise InvalidParameterError("delta must lie in [0, 1)")
        if self.split is not None and not (0.0 < self.split < 1.0):
            raise InvalidParameterError("split fraction must lie in (0, 1)")

    def mw_epsilons(self) -> tuple[float, float]:
        frac = MW_DEFAULT_SPLIT if self.split is None else self.split
        return frac * self.epsilon, (1.0 - frac) * self.epsilon

    def t_epsilons(self) -> tuple[float, float]:
        frac = T_DEFAULT_SPLIT if self.split is None else self.split
        return frac * self.epsilon, (1.0 - frac) * self.epsilon


@dataclass(frozen=True)
class PrivateStatResult:
    """A privatized statistic plus the extra released values, if any."""

    statistic: float
    m_tilde: float | None = None
    m_star: int | None = None


def laplace_sample(scale: float, rng: RandomStream, size=None):
    """Draw from Lap(scale) by inverse CDF of a uniform on (0, 1).

    x = -scale * sgn(u - 1/2) * ln(1 - 2|u - 1/2|)
    """
    if not (scale > 0):
        raise InvalidParameterError("Laplace scale must be positive")
    u = rng.uniform_open(size)
    centered = u - 0.5
    return -scale * np.sign(centered) * np.log1p(-2.0 * np.abs(centered))


def _noise(scale: float, rng: RandomStream) -> float:
    # epsilon = inf gives scale 0: the mechanism is exact.
    if scale == 0.0:
        return 0.0
    return float(laplace_sample(scale, rng))


def _require_pure_dp(budget: PrivacyBudget, test: str):
    if budget.delta != 0.0:
        raise InvalidParameterError(f"{test} is a pure-epsilon mechanism; delta must be 0")


def private_kw(db: GroupedSample, budget: PrivacyBudget, rng: RandomStream) -> PrivateStatResult:
    """Kruskal-Wallis h with random tie-break and Lap(87/eps) noise."""
    _require_pure_dp(budget, "private_kw")
    ranks = rank_random(db.pooled(), rng)
    h = kw_stat(db, ranks)
    return PrivateStatResult(h + _noise(KW_SENSITIVITY / budget.epsilon, rng))


def private_kwabs(db: GroupedSample, budget: PrivacyBudget, rng: RandomStream) -> PrivateStatResult:
    """Absolute-value Kruskal-Wallis with random tie-break and Lap(8/eps) noise."""
    _require_pure_dp(budget, "private_kwabs")
    ranks = rank_random(db.pooled(), rng)
    h = kwabs_stat(db, ranks)
    return PrivateStatResult(h + _noise(KWABS_SENSITIVITY / budget.epsilon, rng))


def mw_shrink_offset(eps_m: float, delta: float) -> float:
    """The shrink c = -ln(2*delta)/eps_m applied to the noisy group-size estimate."""
    if eps_m == math.inf:
        return 0.0
    return -math.log(2.0 * delta) / eps_m


def private_mw(
    db: GroupedSample,
    budget: PrivacyBudget,
    rng: RandomStream,
    known_equal: bool = False,
) -> PrivateStatResult:
    """Mann-Whitney U with noise scaled by a private local-sensitivity bound.

    Releases (m_tilde, U_tilde). m* = max(ceil(m_tilde - c), 0), further
    clamped to floor(n/2) since m is a minimum group size by definition;
    a smaller m* only increases the noise, so the clamp is privacy-safe.
    With ``known_equal`` the group sizes are public knowledge, no budget is
    spent on m, and the noise scale is (n - floor(n/2))/epsilon.
    """
    sizes = db.sizes()
    if db.g != 2 or (sizes == 0).any():
        raise DegenerateInputError("Mann-Whitney requires two nonempty groups")
    n = db.n
    u = mw_stat(db, rank_midrank(db.pooled()))[0]

    if known_equal:
        scale = (n - n // 2) / budget.epsilon
        return PrivateStatResult(u + _noise(scale, rng), m_star=n // 2)

    if budget.delta <= 0.0:
        raise InvalidParameterError("Mann-Whitney needs delta > 0 unless groups are known equal")
    eps_m, eps_u = budget.mw_epsilons()
    m = int(sizes.min())
    m_tilde = m + _noise(1.0 / eps_m, rng)
    c = mw_shrink_offset(eps_m, budget.delta)
    m_star = max(math.ceil(m_tilde - c), 0)
    m_star = min(m_star, n // 2)
    u_tilde = u + _noise((n - m_star) / eps_u, rng)
    return PrivateStatResult(u_tilde, m_tilde=m_tilde, m_star=m_star)


def private_wilcoxon(db: PairedSample, budget: PrivacyBudget, rng: RandomStream) -> PrivateStatResult:
    """Pratt signed-rank sum with Lap(2n/eps) noise."""
    _require_pure_dp(budget, "private_wilcoxon")
    w = wilcoxon_pratt_stat(db)
    return PrivateStatResult(w + _noise(2.0 * db.n / budget.epsilon, rng))


def private_t(db: BoundedSample, budget: PrivacyBudget, rng: RandomStream) -> PrivateStatResult:
    """Private one-sample t on data in [-1, 1].

    Releases noisy mean and variance, then post-processes into a t value.
    A non-positive noisy variance yields 0, signalling an unwillingness to
    reject. The mean noise uses the proven sensitivity 2/n.
    """
    _require_pure_dp(budget, "private_t")
    x = db.values
    n = x.size
    eps_mean, eps_var = budget.t_epsilons()
    mean_tilde = float(np.mean(x)) + _noise((2.0 / n) / eps_mean, rng)
    var_tilde = float(np.var(x, ddof=1)) + _noise((5.0 / (n - 1)) / eps_var, rng)
    if var_tilde <= 0.0:
        return PrivateStatResult(0.0)
    return PrivateStatResult(mean_tilde / math.sqrt(var_tilde / n))
