"""Seeded random streams."""

from typing import Optional, Sequence, Tuple, Union

import numpy as np

from deliberpy.core.errors import ValidationError


class SeededRNG:
    """Deterministic random stream built on numpy's ``SeedSequence``.

    Child streams derived with :meth:`spawn` depend only on the root seed and
    the keys, so per-step and per-utterance randomness is reproducible no
    matter how work is scheduled.
    """

    def __init__(self, seed: int, keys: Tuple[int, ...] = ()):
        if seed < 0:
            raise ValidationError("seed must be non-negative")
        self.seed = seed
        self.keys = tuple(keys)
        self._gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=self.keys)))

    def spawn(self, *keys: int) -> "SeededRNG":
        return SeededRNG(self.seed, self.keys + tuple(int(k) for k in keys))

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None):
        return self._gen.uniform(low, high, size)

    def normal(self, loc: float = 0.0, scale: float = 1.0, size=None):
        return self._gen.normal(loc, scale, size)

    def integers(self, low: int, high: Optional[int] = None, size=None, endpoint: bool = False):
        return self._gen.integers(low, high, size=size, endpoint=endpoint)

    def bernoulli(self, p: float) -> bool:
        return bool(self._gen.random() < p)

    def choice(self, n: int, size=None, replace: bool = True):
        return self._gen.choice(n, size=size, replace=replace)

    def categorical(self, probs: Union[Sequence[float], np.ndarray]) -> int:
        """Draw one index from a discrete distribution by inverse CDF."""
        p = np.asarray(probs, dtype=np.float64)
        if p.ndim != 1 or p.size == 0:
            raise ValidationError("categorical needs a non-empty 1-D probability vector")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValidationError("categorical probabilities must be finite and non-negative")
        cdf = np.cumsum(p)
        if cdf[-1] <= 0:
            raise ValidationError("categorical probabilities sum to zero")
        u = self._gen.random() * cdf[-1]
        index = int(np.searchsorted(cdf, u, side="right"))
        # a zero-mass tail can never be drawn
        return min(index, int(np.flatnonzero(p)[-1]))


def seeded_rng(seed: int) -> SeededRNG:
    return SeededRNG(seed)
