"""Reference distributions, p-values, critical values and complete tests."""

import itertools
import math

import numpy as np
import pytest

from dpht.errors import InvalidInputError, InvalidParameterError
from dpht.inference import (
    LOWER_TAIL,
    TWO_SIDED,
    UPPER_TAIL,
    ReferenceCache,
    ReferenceDistribution,
    _kwabs_reference_for_sizes,
    critical_value,
    kwabs_from_rank_sums,
    near_equal_sizes,
    p_value,
    ref_kw,
    ref_kwabs,
    ref_mw,
    ref_t,
    ref_wilcoxon,
    run_test,
)
from dpht.privacy import PrivacyBudget, private_kw
from dpht.rankstats import GroupedSample, PairedSample
from dpht.streams import RandomStream

from conftest import fresh_stream

PUBLIC = math.inf


class TestNearEqualSizes:
    def test_divisible(self):
        assert near_equal_sizes(9, 3).tolist() == [3, 3, 3]

    def test_remainder_to_leading_groups(self):
        assert near_equal_sizes(10, 3).tolist() == [4, 3, 3]
        assert near_equal_sizes(11, 3).tolist() == [4, 4, 3]


class TestRefKw:
    def test_chi2_quantile_without_noise(self):
        ref = ref_kw(3, 150, PUBLIC, 10**6, fresh_stream(1))
        assert critical_value(ref, 0.05) == pytest.approx(5.991, abs=0.05)

    def test_modes_agree(self):
        a = ref_kw(3, 150, 1.0, 200_000, fresh_stream(2), mode="chi2-laplace")
        b = ref_kw(3, 150, 1.0, 200_000, fresh_stream(3), mode="full-sim")
        qa, qb = critical_value(a, 0.05), critical_value(b, 0.05)
        assert qa == pytest.approx(qb, rel=0.05)

    def test_zero_reps_rejected(self):
        with pytest.raises(InvalidParameterError):
            ref_kw(3, 150, 1.0, 0, fresh_stream(4))

    def test_unknown_mode_rejected(self):
        with pytest.raises(InvalidParameterError):
            ref_kw(3, 150, 1.0, 10, fresh_stream(5), mode="bootstrap")


class TestRefKwabs:
    def test_one_row_per_group_is_constant(self):
        # with n = g every rank permutation spends all ranks, so the
        # statistic is the same constant for each of the g! assignments
        g = n = 4
        enumerated = set()
        sizes = np.ones(g, dtype=np.int64)
        for perm in itertools.permutations(range(1, n + 1)):
            enumerated.add(
                round(kwabs_from_rank_sums(np.array(perm, dtype=float), sizes, n), 12)
            )
        assert len(enumerated) == 1
        ref = ref_kwabs(g, n, PUBLIC, 500, fresh_stream(6))
        assert np.allclose(ref.samples, enumerated.pop())

    def test_mean_matches_independent_simulation(self):
        # oracle: plain numpy permutations, no shared ranking kernels
        n, g = 30, 3
        ref = ref_kwabs(g, n, PUBLIC, 30_000, fresh_stream(7))
        rng = np.random.default_rng(123)
        sizes = near_equal_sizes(n, g)
        oracle = []
        for _ in range(10_000):
            perm = rng.permutation(n) + 1
            sums = np.array([perm[:10].sum(), perm[10:20].sum(), perm[20:].sum()], float)
            oracle.append(kwabs_from_rank_sums(sums, sizes, n))
        tol = 3 * math.sqrt(
            np.var(oracle) / len(oracle) + ref.samples.var() / ref.z
        )
        assert ref.samples.mean() == pytest.approx(np.mean(oracle), abs=tol)

    def test_single_sample_reference(self):
        ref = ref_kwabs(3, 9, 1.0, 1, fresh_stream(8))
        assert ref.z == 1
        assert p_value(ref.samples[0] - 1.0, ref) == 1.0

    def test_equal_sizes_give_largest_critical_value(self):
        # worst case over allocations of n = 60 into three groups
        z = 60_000
        equal = _kwabs_reference_for_sizes(
            np.array([20, 20, 20]), 1.0, z, fresh_stream(9)
        )
        q_equal = critical_value(equal, 0.05)
        for split in ([30, 20, 10], [40, 15, 5]):
            other = _kwabs_reference_for_sizes(np.array(split), 1.0, z, fresh_stream(10))
            # allow Monte-Carlo slack on the dominance direction
            assert q_equal >= critical_value(other, 0.05) - 0.15


class TestRefMw:
    def test_m_star_zero_is_pure_laplace(self):
        budget = PrivacyBudget(1.0, 1e-6)
        ref = ref_mw(100, 0, budget, 100_000, fresh_stream(11))
        eps_u = budget.mw_epsilons()[1]
        assert np.abs(ref.samples).mean() == pytest.approx(100 / eps_u, rel=0.02)
        assert ref.samples.mean() == pytest.approx(0.0, abs=5 * (100 / eps_u) / math.sqrt(ref.z))

    def test_normal_moments_without_noise(self):
        # the stated normal has mean m*(n - m*)/2 and variance m*(n - m*)(n+1)/12
        ref = ref_mw(
            100, 50, PrivacyBudget(PUBLIC, 1e-6), 10**6, fresh_stream(12),
            mode="normal-laplace",
        )
        assert ref.samples.mean() == pytest.approx(50 * 50 / 2.0, abs=10)
        assert ref.samples.var() == pytest.approx(50 * 50 * 101 / 12.0, rel=0.02)

    def test_modes_agree_at_matched_noise(self):
        # with known-equal groups both modes share the same noise scale, so
        # the comparison isolates the normal approximation of U
        budget = PrivacyBudget(1.0)
        a = ref_mw(200, 100, budget, 150_000, fresh_stream(13), mode="normal-laplace", known_equal=True)
        b = ref_mw(200, 100, budget, 150_000, fresh_stream(14), mode="full-sim", known_equal=True)
        qa = np.quantile(a.samples, 0.05)
        qb = np.quantile(b.samples, 0.05)
        assert qa == pytest.approx(qb, rel=0.05)

    def test_full_sim_no_less_conservative(self):
        # the replayed group-size estimate shrinks m* again, widening the
        # noise, so full-sim rejection thresholds sit at or below the
        # normal-laplace ones
        budget = PrivacyBudget(1.0, 1e-6)
        a = ref_mw(200, 100, budget, 150_000, fresh_stream(15), mode="normal-laplace")
        b = ref_mw(200, 100, budget, 150_000, fresh_stream(16), mode="full-sim")
        assert np.quantile(b.samples, 0.05) <= np.quantile(a.samples, 0.05) + 20.0

    def test_m_star_out_of_range(self):
        with pytest.raises(InvalidParameterError):
            ref_mw(100, 51, PrivacyBudget(1.0, 1e-6), 10, fresh_stream(17))


class TestRefWilcoxon:
    def test_normal_std_without_noise(self):
        ref = ref_wilcoxon(100, PUBLIC, 10**6, fresh_stream(18))
        assert ref.samples.std() == pytest.approx(math.sqrt(100 * 101 * 201 / 6), rel=0.01)

    def test_direction_two_sided(self):
        ref = ref_wilcoxon(10, 1.0, 1000, fresh_stream(19))
        assert ref.direction == TWO_SIDED


class TestRefT:
    def test_matches_student_t_without_noise(self):
        ref = ref_t(10_000, PrivacyBudget(PUBLIC), 10_000, fresh_stream(20))
        assert np.quantile(ref.samples, 0.975) == pytest.approx(1.96, abs=0.05)

    def test_point_mass_at_zero_under_heavy_noise(self):
        ref = ref_t(10, PrivacyBudget(0.5), 20_000, fresh_stream(21))
        assert np.mean(ref.samples == 0.0) > 0.2

    def test_thousand_samples_sorted(self):
        ref = ref_t(50, PrivacyBudget(1.0), 1000, fresh_stream(22))
        assert ref.z == 1000
        assert np.all(np.diff(ref.samples) >= 0)


class TestPValue:
    def test_above_all_upper(self):
        ref = ReferenceDistribution(np.arange(100.0), UPPER_TAIL, "full-sim")
        assert p_value(1000.0, ref) == 0.0

    def test_at_minimum_upper(self):
        ref = ReferenceDistribution(np.arange(100.0), UPPER_TAIL, "full-sim")
        assert p_value(0.0, ref) == 1.0

    def test_median_of_odd_reference(self):
        samples = np.arange(1001.0)
        ref = ReferenceDistribution(samples, UPPER_TAIL, "full-sim")
        assert p_value(500.0, ref) == pytest.approx(501 / 1001)

    def test_lower_tail_counts_at_or_below(self):
        ref = ReferenceDistribution(np.arange(10.0), LOWER_TAIL, "full-sim")
        assert p_value(3.0, ref) == pytest.approx(0.4)

    def test_two_sided_uses_absolute_values(self):
        ref = ReferenceDistribution(np.array([-5.0, -1.0, 0.0, 2.0]), TWO_SIDED, "full-sim")
        assert p_value(-2.0, ref) == pytest.approx(0.5)
        assert p_value(0.5, ref) == pytest.approx(0.75)


class TestCriticalValue:
    def test_resolution_guard(self):
        ref = ReferenceDistribution(np.arange(1000.0), UPPER_TAIL, "full-sim")
        with pytest.raises(InvalidParameterError):
            critical_value(ref, 0.005)
        critical_value(ref, 0.05)

    def test_alpha_range(self):
        ref = ReferenceDistribution(np.arange(1000.0), UPPER_TAIL, "full-sim")
        with pytest.raises(InvalidParameterError):
            critical_value(ref, 0.0)

    def test_directions(self):
        samples = np.arange(10_000.0)
        upper = ReferenceDistribution(samples, UPPER_TAIL, "full-sim")
        lower = ReferenceDistribution(samples, LOWER_TAIL, "full-sim")
        assert critical_value(upper, 0.05) == pytest.approx(np.quantile(samples, 0.95))
        assert critical_value(lower, 0.05) == pytest.approx(np.quantile(samples, 0.05))


class CountingSample(GroupedSample):
    """Counts data accesses so tests can assert post-processing discipline."""

    def __init__(self, groups, g=None):
        super().__init__(groups, g)
        object.__setattr__(self, "reads", 0)

    def _bump(self):
        object.__setattr__(self, "reads", self.reads + 1)

    def pooled(self):
        self._bump()
        return super().pooled()

    def sizes(self):
        self._bump()
        return super().sizes()


class TestRunTest:
    def test_deterministic(self):
        db = GroupedSample([[1.0, 5.0, 2.0], [4.0, 3.0, 6.0]])
        a = run_test(db, "kw", PrivacyBudget(1.0), 2000, fresh_stream(23))
        b = run_test(db, "kw", PrivacyBudget(1.0), 2000, fresh_stream(23))
        assert a == b

    def test_strong_separation_rejects(self):
        rng = np.random.default_rng(0)
        groups = [rng.normal(loc=10 * i, scale=1.0, size=100) for i in range(3)]
        db = GroupedSample(groups)
        out = run_test(db, "kwabs", PrivacyBudget(PUBLIC), 10_000, fresh_stream(24))
        assert out.p_value < 0.001

    def test_reference_built_from_released_values_only(self):
        groups = [[1.0, 5.0, 2.0, 8.0], [4.0, 3.0, 6.0, 9.0]]
        budget = PrivacyBudget(1.0)
        probe = CountingSample(groups)
        private_kw(probe, budget, fresh_stream(25).child(0))
        direct_reads = probe.reads

        probe2 = CountingSample(groups)
        run_test(probe2, "kw", budget, 2000, fresh_stream(25))
        assert probe2.reads == direct_reads

    def test_small_reps_rejected(self):
        db = GroupedSample([[1.0, 2.0], [3.0, 4.0]])
        with pytest.raises(InvalidParameterError):
            run_test(db, "kw", PrivacyBudget(1.0), 999, fresh_stream(26))

    def test_type_mismatch_rejected(self):
        db = PairedSample(rows=[(0, 1), (2, 3)])
        with pytest.raises(InvalidInputError):
            run_test(db, "kw", PrivacyBudget(1.0), 2000, fresh_stream(27))

    def test_mw_outcome_carries_released_sizes(self):
        db = GroupedSample([np.arange(30.0), np.arange(30.0, 60.0)])
        out = run_test(db, "mw", PrivacyBudget(1.0, 1e-6), 2000, fresh_stream(28))
        assert out.m_star is not None and out.m_tilde is not None
        assert out.reference == "full-sim"
        assert out.split == 0.65

    def test_cache_reuse_is_deterministic(self):
        db = GroupedSample([[1.0, 5.0, 2.0], [4.0, 3.0, 6.0]])
        budget = PrivacyBudget(1.0)
        cache = ReferenceCache(fresh_stream(29))
        a = run_test(db, "kw", budget, 2000, fresh_stream(30), ref_cache=cache)
        b = run_test(db, "kw", budget, 2000, fresh_stream(30), ref_cache=cache)
        assert a == b
        assert len(cache._store) == 1
