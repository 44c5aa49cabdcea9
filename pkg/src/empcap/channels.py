"""Causal channels, realized noise and the dithering wrapper.

A channel is stepped one symbol at a time with ``step(x) -> y``. It may keep
whatever history it needs. Channel randomness comes from a private numpy
generator handed over by ``start``, never from protocol randomness.
"""

from __future__ import annotations

import copy
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core_types import SymbolSeq, empirical_entropy, entropy

INDIVIDUAL_NOISE = "individual_noise"
NOISE_SEQUENCE = "noise_sequence"
MODULO_ADDITIVE = "modulo_additive"
MEMORYLESS = "memoryless"
GENERAL_CAUSAL = "general_causal"

_BATCH = 4096


class Channel:
    """Base class. Subclasses set ``tags`` and implement ``_step``."""

    tags: frozenset = frozenset({GENERAL_CAUSAL})
    informed = False

    def __init__(self, size: int = 2):
        if size < 2:
            raise ValueError("alphabet size must be >= 2")
        self.size = size
        self.rng = np.random.default_rng(0)
        self.k = 0

    def start(self, rng: np.random.Generator | None = None, theta=None):
        """Reset the history. Informed channels may look at ``theta``."""
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.k = 0
        self._reset()

    def reseed(self, rng: np.random.Generator):
        """Swap the randomness source without touching the history."""
        self.rng = rng
        self._drop_buffers()

    def _reset(self):
        self._drop_buffers()

    def _drop_buffers(self):
        pass

    def step(self, x: int) -> int:
        y = self._step(x)
        self.k += 1
        return y

    def _step(self, x: int) -> int:
        raise NotImplementedError

    @property
    def family(self) -> str:
        for tag in (INDIVIDUAL_NOISE, NOISE_SEQUENCE, MEMORYLESS, MODULO_ADDITIVE):
            if tag in self.tags:
                return tag
        return GENERAL_CAUSAL


class _Buffered:
    """Mixin: pre-draw i.i.d. symbols in batches from the channel rng."""

    def _drop_buffers(self):
        self._buf = []
        self._pos = 0

    def _draw(self) -> int:
        if self._pos >= len(self._buf):
            self._buf = self._batch().tolist()
            self._pos = 0
        v = self._buf[self._pos]
        self._pos += 1
        return v


class IndividualNoise(Channel):
    """y_k = x_k + z_k for a fixed noise sequence z."""

    tags = frozenset({INDIVIDUAL_NOISE, NOISE_SEQUENCE, MODULO_ADDITIVE})

    def __init__(self, z: Sequence[int], size: int = 2):
        super().__init__(size)
        self.z = [int(v) for v in z]
        if any(not 0 <= v < size for v in self.z):
            raise ValueError("noise symbol outside the alphabet")

    def _step(self, x):
        if self.k >= len(self.z):
            raise IndexError("individual noise sequence exhausted")
        return (x + self.z[self.k]) % self.size


class FixedCompositionNoise(IndividualNoise):
    """Individual noise with an exact number of each symbol.

    The positions are shuffled with the channel rng on ``start``, so each
    trial sees a different sequence with the same empirical distribution.
    """

    def __init__(self, counts: Sequence[int], size: int = 2):
        super().__init__([], size)
        if len(counts) != size:
            raise ValueError("one count per symbol")
        self.counts = [int(c) for c in counts]

    @classmethod
    def with_fraction(cls, n: int, p: float, size: int = 2) -> "FixedCompositionNoise":
        ones = round(p * n)
        return cls([n - ones, ones] + [0] * (size - 2), size)

    def _reset(self):
        z = np.repeat(np.arange(self.size), self.counts)
        self.z = self.rng.permutation(z).tolist()


class MemorylessAdditive(_Buffered, Channel):
    tags = frozenset({NOISE_SEQUENCE, MODULO_ADDITIVE, MEMORYLESS})

    def __init__(self, pmf: Sequence[float]):
        super().__init__(len(pmf))
        pmf = np.asarray(pmf, dtype=float)
        if np.any(pmf < 0) or not math.isclose(pmf.sum(), 1.0):
            raise ValueError("noise pmf must be a probability vector")
        self.pmf = pmf / pmf.sum()
        self._drop_buffers()

    def _batch(self):
        return self.rng.choice(self.size, size=_BATCH, p=self.pmf)

    def _step(self, x):
        return (x + self._draw()) % self.size


def bsc(p: float) -> MemorylessAdditive:
    return MemorylessAdditive([1.0 - p, p])


def clean(size: int = 2) -> MemorylessAdditive:
    return MemorylessAdditive([1.0] + [0.0] * (size - 1))


class StateConstrainedAdversary(Channel):
    """Flips (adds 1) whenever the running budget allows: flips + 1 <= p*k.

    Against a binary Horstein transmitter every flip pushes the posterior
    away from the message point, so the greedy rule is to spend the budget
    as soon as it is available.
    """

    tags = frozenset({NOISE_SEQUENCE, MODULO_ADDITIVE})
    informed = True

    def __init__(self, p: float, size: int = 2):
        super().__init__(size)
        if not 0 <= p <= 1:
            raise ValueError("budget must lie in [0, 1]")
        self.p = p
        self.flips = 0

    def _reset(self):
        self.flips = 0

    def _step(self, x):
        if self.flips + 1 <= self.p * (self.k + 1):
            self.flips += 1
            return (x + 1) % self.size
        return x


class PushToUniformAdversary(Channel):
    """Plays the least frequent past noise symbol (ties to the smallest)."""

    tags = frozenset({NOISE_SEQUENCE, MODULO_ADDITIVE})

    def __init__(self, size: int = 2):
        super().__init__(size)
        self.counts = [0] * size

    def _reset(self):
        self.counts = [0] * self.size

    def _step(self, x):
        z = self.counts.index(min(self.counts))
        self.counts[z] += 1
        return (x + z) % self.size


class OutputOnly(_Buffered, Channel):
    """Output is 1 with probability eps, else 0, whatever the input."""

    tags = frozenset({GENERAL_CAUSAL})

    def __init__(self, eps: float, size: int = 2):
        super().__init__(size)
        self.eps = eps
        self._drop_buffers()

    def _batch(self):
        return (self.rng.random(_BATCH) < self.eps).astype(np.int64)

    def _step(self, x):
        return self._draw()


class GeneralMemoryless(_Buffered, Channel):
    """Memoryless channel with transition rows W[x][y]."""

    tags = frozenset({MEMORYLESS})

    def __init__(self, rows: Sequence[Sequence[float]]):
        rows = np.asarray(rows, dtype=float)
        if rows.ndim != 2 or rows.shape[0] != rows.shape[1]:
            raise ValueError("transition matrix must be square")
        if np.any(rows < 0) or not np.allclose(rows.sum(axis=1), 1.0):
            raise ValueError("rows must be probability vectors")
        super().__init__(rows.shape[0])
        self.cdf = np.cumsum(rows, axis=1)
        self.cdf[:, -1] = 1.0
        self._drop_buffers()

    @classmethod
    def binary(cls, p00: float, p11: float) -> "GeneralMemoryless":
        return cls([[p00, 1 - p00], [1 - p11, p11]])

    def _batch(self):
        return self.rng.random(_BATCH)

    def _step(self, x):
        u = self._draw()
        row = self.cdf[x]
        y = 0
        while u >= row[y]:
            y += 1
        return y


class DitheredChannel(Channel):
    """Adds a shared uniform dither before the inner channel and removes it
    after: the inner channel sees x + phi and the caller gets y~ - phi."""

    def __init__(self, inner: Channel, enabled: bool = True):
        super().__init__(inner.size)
        self.inner = inner
        self.enabled = enabled
        self.tags = inner.tags if not enabled else frozenset({GENERAL_CAUSAL})
        self.dither_rng = np.random.default_rng(0)
        self.inner_x: list = []
        self.inner_y: list = []
        self._drop_buffers()

    def start(self, rng=None, theta=None, dither_rng=None):
        super().start(rng, theta)
        self.inner.start(rng, theta)
        if dither_rng is not None:
            self.dither_rng = dither_rng
        self.inner_x, self.inner_y = [], []
        self._drop_buffers()

    def _drop_buffers(self):
        self._phi = []
        self._pos = 0

    def _step(self, x):
        if not self.enabled:
            y = self.inner.step(x)
            self.inner_x.append(x)
            self.inner_y.append(y)
            return y
        if self._pos >= len(self._phi):
            self._phi = self.dither_rng.integers(0, self.size, size=_BATCH).tolist()
            self._pos = 0
        phi = self._phi[self._pos]
        self._pos += 1
        xt = (x + phi) % self.size
        yt = self.inner.step(xt)
        self.inner_x.append(xt)
        self.inner_y.append(yt)
        return (yt - phi) % self.size


def realized_noise(x: Sequence[int], y: Sequence[int], size: int = 2) -> SymbolSeq:
    if len(x) != len(y):
        raise ValueError("input and output lengths differ")
    z = (np.asarray(y, dtype=np.int64) - np.asarray(x, dtype=np.int64)) % size
    return SymbolSeq.of(z.tolist(), size)


def empirical_capacity(z) -> float:
    """log|X| minus the empirical entropy of the realized noise."""
    if len(z) == 0:
        raise ValueError("empirical capacity of an empty sequence")
    if isinstance(z, SymbolSeq):
        return math.log2(z.alphabet.size) - empirical_entropy(z)
    raise TypeError("expected a SymbolSeq")


def empirical_capacity_of_array(z: np.ndarray, size: int) -> float:
    """Same as ``empirical_capacity`` for a plain integer array."""
    if len(z) == 0:
        raise ValueError("empirical capacity of an empty sequence")
    counts = np.bincount(np.asarray(z), minlength=size)
    return math.log2(size) - entropy(counts / counts.sum())


def read_noise_file(path, size: int = 2) -> list:
    """One decimal symbol per line; blank lines are skipped."""
    out = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line:
            v = int(line)
            if not 0 <= v < size:
                raise ValueError(f"noise symbol {v} outside alphabet of size {size}")
            out.append(v)
    return out


def write_noise_file(path, z: Iterable[int]):
    Path(path).write_text("".join(f"{int(v)}\n" for v in z))


def shift_audit(channel: Channel, history: Sequence[int], trials: int = 2000,
                seed: int = 0) -> tuple:
    """Monte-Carlo check that the law of Z_k does not depend on x_k.

    The channel is driven with ``history`` as inputs, then for every input
    value v it is cloned ``trials`` times (fresh randomness per clone) and
    stepped once with v. Returns (passed, max z-score) where the score
    compares each symbol's frequency between inputs under a two-sample
    binomial test; the audit passes when every score is below 4.
    """
    base = copy.deepcopy(channel)
    base.start(np.random.default_rng(seed))
    for x in history:
        base.step(int(x))
    q = channel.size
    freq = np.zeros((q, q))
    for v in range(q):
        for t in range(trials):
            ch = copy.deepcopy(base)
            ch.reseed(np.random.default_rng([seed, v, t]))
            freq[v, (ch.step(v) - v) % q] += 1
    freq /= trials
    worst = 0.0
    for a in range(q):
        for b in range(a + 1, q):
            for s in range(q):
                pa, pb = freq[a, s], freq[b, s]
                pooled = (pa + pb) / 2
                sd = math.sqrt(max(pooled * (1 - pooled), 0.0) * 2 / trials)
                if sd == 0:
                    score = 0.0 if pa == pb else math.inf
                else:
                    score = abs(pa - pb) / sd
                worst = max(worst, score)
    return worst < 4.0, worst
