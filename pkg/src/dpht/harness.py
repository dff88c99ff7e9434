"""Desk-scale reproduction of the power and type-I experiments.

Alternative data: g groups of unit-variance normals with means spaced
evenly so the extreme groups differ by ``effect`` standard deviations;
paired rows draw u from N(0, 1) and v from N(effect, 1); the t-test runs
on the paired differences clamped and rescaled into [-1, 1] at the scale
the null reference simulates at.

Every trial gets its own derived stream, so estimates are reproducible and
independent of scheduling; reference distributions are cached on public
parameters and shared across trials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidParameterError
from .inference import ReferenceCache, run_test
from .privacy import PrivacyBudget
from .rankstats import BoundedSample, GroupedSample, PairedSample
from .streams import RandomStream

DEFAULT_Z = 100_000

# Paired differences have standard deviation sqrt(2). The t-test input is
# clamped and rescaled into [-1, 1] so the mapped data has standard
# deviation 0.3, the same scale the null reference simulates at; the
# additive noise calibration is not scale-free, so a mismatch here would
# distort the type I error. The implied clamp sits at 1/0.3 = 3.33 data
# standard deviations, matching the reference's own truncation width.
T_CLAMP = math.sqrt(2.0) / 0.3

DATA_SHAPES = ("normal", "uniform", "zero-inflated")


@dataclass(frozen=True)
class SimulationSpec:
    """Configuration of one power or type-I simulation."""

    test: str
    n: int
    budget: PrivacyBudget
    trials: int
    g: int = 2
    proportions: tuple[float, ...] | None = None
    effect: float = 0.0
    data_shape: str = "normal"
    zero_fraction: float = 0.0
    alpha: float = 0.05
    z: int = DEFAULT_Z
    seed: int = 0
    known_equal: bool = False
    mode: str | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise InvalidParameterError("trials must be at least 1")
        if not 0.0 < self.alpha < 1.0:
            raise InvalidParameterError("alpha must lie in (0, 1)")
        if self.effect < 0:
            raise InvalidParameterError("effect must be non-negative")
        if self.data_shape not in DATA_SHAPES:
            raise InvalidParameterError(f"unknown data shape {self.data_shape!r}")
        if not 0.0 <= self.zero_fraction <= 1.0:
            raise InvalidParameterError("zero fraction must lie in [0, 1]")
        if self.test in ("kw", "kwabs", "mw"):
            if self.n < self.g:
                raise InvalidParameterError("need at least one observation per group")
            if self.proportions is not None:
                props = np.asarray(self.proportions, dtype=np.float64)
                if props.size != self.g or (props <= 0).any():
                    raise InvalidParameterError("need one positive proportion per group")
                if abs(props.sum() - 1.0) > 1e-9:
                    raise InvalidParameterError("proportions must sum to 1")


@dataclass(frozen=True)
class PowerEstimate:
    power: float
    trials: int
    standard_error: float = field(init=False)

    def __post_init__(self):
        se = math.sqrt(self.power * (1.0 - self.power) / self.trials)
        object.__setattr__(self, "standard_error", se)


# ---------------------------------------------------------------------------
# Data generation
# ---------------------------------------------------------------------------


def group_sizes_for(spec: SimulationSpec) -> np.ndarray:
    if spec.proportions is None:
        base = spec.n // spec.g
        sizes = np.full(spec.g, base, dtype=np.int64)
        sizes[: spec.n % spec.g] += 1
        return sizes
    raw = np.asarray(spec.proportions) * spec.n
    sizes = np.floor(raw).astype(np.int64)
    # hand out the remainder by largest fractional part, index order on ties
    leftover = spec.n - int(sizes.sum())
    if leftover:
        frac_order = np.argsort(-(raw - np.floor(raw)), kind="stable")
        sizes[frac_order[:leftover]] += 1
    if (sizes == 0).any():
        raise InvalidParameterError("proportions leave a group empty at this n")
    return sizes


def _group_means(spec: SimulationSpec) -> np.ndarray:
    if spec.g == 1 or spec.effect == 0.0:
        return np.zeros(spec.g)
    return np.arange(spec.g) * (spec.effect / (spec.g - 1))


def _generate_paired(spec: SimulationSpec, rng: RandomStream) -> PairedSample:
    n = spec.n
    u = rng.standard_normal(n)
    v = rng.standard_normal(n) + spec.effect
    if spec.data_shape == "zero-inflated" and spec.zero_fraction > 0.0:
        n_zero = int(round(spec.zero_fraction * n))
        idx = rng.permutation(n)[:n_zero]
        v = v.copy()
        v[idx] = u[idx]
    return PairedSample(u=u, v=v)


def generate_data(spec: SimulationSpec, rng: RandomStream):
    """One database drawn from the spec's data distribution."""
    if spec.test in ("kw", "kwabs", "mw"):
        sizes = group_sizes_for(spec)
        means = _group_means(spec)
        groups = []
        for size, mean in zip(sizes, means):
            if spec.data_shape == "uniform":
                groups.append(rng.uniform_open(size) + mean)
            else:
                groups.append(rng.standard_normal(size) + mean)
        return GroupedSample(groups, g=spec.g)
    if spec.test == "wilcoxon":
        return _generate_paired(spec, rng)
    if spec.test == "ttest":
        d = _generate_paired(spec, rng).differences()
        return BoundedSample(np.clip(d, -T_CLAMP, T_CLAMP) / T_CLAMP)
    raise InvalidParameterError(f"unknown test kind {spec.test!r}")


# ---------------------------------------------------------------------------
# Simulations
# ---------------------------------------------------------------------------


def _run_trials(spec: SimulationSpec) -> np.ndarray:
    root = RandomStream(spec.seed)
    trial_root = root.child(0)
    cache = ReferenceCache(root.child(1))
    p_values = np.empty(spec.trials)
    for i in range(spec.trials):
        trial_rng = trial_root.child(i)
        data = generate_data(spec, trial_rng.child(0))
        outcome = run_test(
            data,
            spec.test,
            spec.budget,
            spec.z,
            trial_rng.child(1),
            known_equal=spec.known_equal,
            mode=spec.mode,
            ref_cache=cache,
        )
        p_values[i] = outcome.p_value
    return p_values


def simulate_power(spec: SimulationSpec) -> PowerEstimate:
    """Fraction of trials rejecting at the spec's alpha."""
    p_values = _run_trials(spec)
    return PowerEstimate(float(np.mean(p_values < spec.alpha)), spec.trials)


def simulate_type1(spec: SimulationSpec) -> np.ndarray:
    """Null p-values (one per trial); requires effect = 0."""
    if spec.effect != 0.0:
        raise InvalidParameterError("type-I simulation requires effect = 0")
    return _run_trials(spec)


def qq_pairs(p_values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(theoretical uniform quantile, empirical quantile) pairs, plot-ready."""
    n = len(p_values)
    theoretical = np.arange(1, n + 1) / (n + 1.0)
    return theoretical, np.sort(np.asarray(p_values))


def sweep_budget_split(
    spec: SimulationSpec, fractions
) -> list[tuple[float, PowerEstimate]]:
    """Power per budget-split fraction, same seeds across fractions."""
    if spec.test not in ("mw", "ttest"):
        raise InvalidParameterError("budget splits only apply to mw and ttest")
    out = []
    for frac in fractions:
        if not 0.0 < frac < 1.0:
            raise InvalidParameterError("split fractions must lie strictly in (0, 1)")
        swept = replace(spec, budget=replace(spec.budget, split=float(frac)))
        out.append((float(frac), simulate_power(swept)))
    return out
