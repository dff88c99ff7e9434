"""Random stream reproducibility and the Laplace inverse-CDF transform."""

import math

import numpy as np
import pytest

from dpht.errors import InvalidParameterError
from dpht.privacy import laplace_sample
from dpht.streams import RandomStream

from conftest import StubStream


class TestRandomStream:
    def test_identical_keys_identical_sequences(self):
        a = RandomStream(123, 5).uniform_open(1000)
        b = RandomStream(123, 5).uniform_open(1000)
        assert np.array_equal(a, b)

    def test_distinct_streams_differ(self):
        a = RandomStream(123, 5).uniform_open(100)
        b = RandomStream(123, 6).uniform_open(100)
        assert not np.array_equal(a, b)

    def test_children_are_stable_and_distinct(self):
        root = RandomStream(7)
        a1 = root.child(3).uniform_open(50)
        a2 = RandomStream(7).child(3).uniform_open(50)
        b = root.child(4).uniform_open(50)
        assert np.array_equal(a1, a2)
        assert not np.array_equal(a1, b)

    def test_uniforms_avoid_endpoints(self):
        u = RandomStream(1).uniform_open(100_000)
        assert u.min() > 0.0
        assert u.max() < 1.0

    def test_negative_seed_rejected(self):
        with pytest.raises(InvalidParameterError):
            RandomStream(-1)

    def test_large_stream_ids_accepted(self):
        RandomStream(2**63, 2**63).uniform_open(1)


class TestLaplaceSample:
    def test_median_uniform_gives_zero(self):
        assert laplace_sample(1.0, StubStream([0.5])) == 0.0

    def test_quartile_uniform(self):
        # u = 0.25 at scale 2: -2 * sgn(-0.25) * ln(0.5) = 2 ln(0.5)
        value = laplace_sample(2.0, StubStream([0.25]))
        assert value == pytest.approx(2.0 * math.log(0.5), abs=1e-12)
        assert value == pytest.approx(-1.3863, abs=1e-4)

    def test_symmetry_of_upper_quartile(self):
        lo = laplace_sample(1.0, StubStream([0.25]))
        hi = laplace_sample(1.0, StubStream([0.75]))
        assert hi == pytest.approx(-lo, abs=1e-12)
        assert hi == pytest.approx(0.6931, abs=1e-4)

    def test_invalid_scale(self):
        with pytest.raises(InvalidParameterError):
            laplace_sample(0.0, StubStream([0.5]))
        with pytest.raises(InvalidParameterError):
            laplace_sample(-1.0, StubStream([0.5]))

    def test_moments(self):
        rng = RandomStream(99)
        b = 2.0
        s = laplace_sample(b, rng, 10**6)
        # mean within 3 standard errors of 0; MAD equals the scale within 1%
        se = b * math.sqrt(2.0) / math.sqrt(len(s))
        assert abs(s.mean()) < 3 * se
        assert np.abs(s).mean() == pytest.approx(b, rel=0.01)
