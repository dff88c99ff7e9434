"""Reproducible, counter-based random streams.

All randomness in the package flows through :class:`RandomStream`, a thin
wrapper around numpy's Philox counter-based generator keyed by a
``(seed, stream)`` pair. Identical keys produce identical sample sequences
on every platform; distinct keys give statistically independent streams.
Derived streams (``child``) extend the key, so a simulation that hands
stream ``(seed, k)`` to replicate ``k`` is reproducible no matter how the
replicates are scheduled.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidParameterError

_U32 = 0xFFFFFFFF


def _words(value: int) -> tuple[int, int]:
    # SeedSequence spawn keys are 32-bit words; split 64-bit ids.
    return (value & _U32, (value >> 32) & _U32)


class RandomStream:
    """Deterministic random stream identified by a seed and a stream id."""

    def __init__(self, seed: int, stream: int = 0, _path: tuple[int, ...] = ()):
        if seed < 0 or stream < 0:
            raise InvalidParameterError("seed and stream id must be non-negative")
        self.seed = int(seed)
        self.stream = int(stream)
        self._path = tuple(int(p) for p in _path)
        key = _words(self.stream)
        for p in self._path:
            key += _words(p)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=key)
        self._gen = np.random.Generator(np.random.Philox(ss))

    def child(self, index: int) -> "RandomStream":
        """Independent stream derived from this one; stable in ``index``."""
        return RandomStream(self.seed, self.stream, self._path + (int(index),))

    # -- sampling primitives ------------------------------------------------

    def uniform_open(self, size=None):
        """Uniform draws on the open interval (0, 1).

        Endpoints are excluded so inverse-CDF transforms never see 0 or 1.
        """
        raw = self._gen.integers(1, 1 << 53, size=size)
        return raw * (2.0 ** -53)

    def standard_normal(self, size=None):
        return self._gen.standard_normal(size)

    def normal(self, loc, scale, size=None):
        return self._gen.normal(loc, scale, size)

    def chisquare(self, df, size=None):
        return self._gen.chisquare(df, size)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def integers(self, low, high, size=None):
        return self._gen.integers(low, high, size=size)

    def __repr__(self) -> str:  # pragma: no cover
        return f"RandomStream(seed={self.seed}, stream={self.stream}, path={self._path})"
