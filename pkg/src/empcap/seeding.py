"""Seed splitting.

trial_seed(master, i) = splitmix64((master + i * 0x9E3779B97F4A7C15) mod 2^64)
stream_seed(trial, s) = splitmix64(trial XOR s)

with stream ids MESSAGE=1, PROTOCOL=2, CHANNEL=3, DITHER=4. Each stream
seed feeds ``numpy.random.default_rng``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

MESSAGE, PROTOCOL, CHANNEL, DITHER = 1, 2, 3, 4


def splitmix64(x: int) -> int:
    z = (x + GOLDEN) & MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def trial_seed(master: int, index: int) -> int:
    return splitmix64((master + index * GOLDEN) & MASK)


def stream_seed(trial: int, stream: int) -> int:
    return splitmix64((trial ^ stream) & MASK)


@dataclass
class TrialSeeds:
    seed: int
    message: np.random.Generator
    protocol: np.random.Generator
    channel: np.random.Generator
    dither: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int) -> "TrialSeeds":
        seed &= MASK
        gens = [np.random.default_rng(stream_seed(seed, s)) for s in (MESSAGE, PROTOCOL, CHANNEL, DITHER)]
        return cls(seed, *gens)


def random_message_point(rng: np.random.Generator, bits: int = 512) -> Fraction:
    """A uniformly drawn dyadic rational k / 2^bits."""
    k = int.from_bytes(rng.bytes((bits + 7) // 8), "big") >> (8 * ((bits + 7) // 8) - bits)
    return Fraction(k, 1 << bits)
