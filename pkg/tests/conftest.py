"""Shared test helpers."""

from __future__ import annotations

import numpy as np
import pytest

from dpht.streams import RandomStream


class StubStream:
    """Random-stream double that returns scripted uniforms.

    ``uniform_open`` pops values from the given sequence; permutations are
    the identity. Used to pin noise draws to known inputs.
    """

    def __init__(self, uniforms):
        self._values = list(uniforms)

    def uniform_open(self, size=None):
        if size is None:
            return self._values.pop(0)
        count = int(np.prod(size))
        out = np.array([self._values.pop(0) for _ in range(count)])
        return out.reshape(size)

    def permutation(self, n):
        return np.arange(n)

    def child(self, index):
        return self


@pytest.fixture
def rng():
    return RandomStream(20240817)


def fresh_stream(seed: int = 0) -> RandomStream:
    return RandomStream(seed)
