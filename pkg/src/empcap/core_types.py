"""Modulo-alphabet sequences, empirical statistics and sampling operators.

Distributions hold exact ``Fraction`` masses. Entropy is the only float.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Symbol = int


@dataclass(frozen=True)
class Alphabet:
    """Residues {0, ..., size-1} with modulo addition."""

    size: int

    def __post_init__(self):
        if not isinstance(self.size, int) or self.size < 2:
            raise ValueError(f"alphabet size must be an integer >= 2, got {self.size!r}")

    def add(self, a: Symbol, b: Symbol) -> Symbol:
        return (a + b) % self.size

    def sub(self, a: Symbol, b: Symbol) -> Symbol:
        return (a - b) % self.size

    def __contains__(self, symbol) -> bool:
        return isinstance(symbol, int) and 0 <= symbol < self.size

    def __iter__(self):
        return iter(range(self.size))

    def __len__(self) -> int:
        return self.size


BINARY = Alphabet(2)


@dataclass(frozen=True)
class SymbolSeq:
    alphabet: Alphabet
    data: tuple

    def __post_init__(self):
        data = tuple(int(s) for s in self.data)
        for s in data:
            if not 0 <= s < self.alphabet.size:
                raise ValueError(f"symbol {s} outside alphabet of size {self.alphabet.size}")
        object.__setattr__(self, "data", data)

    @classmethod
    def of(cls, symbols: Iterable[int], size: int = 2) -> "SymbolSeq":
        return cls(Alphabet(size), tuple(symbols))

    def __len__(self) -> int:
        return len(self.data)

    def __iter__(self):
        return iter(self.data)

    def __getitem__(self, idx):
        return self.data[idx]

    def counts(self) -> list[int]:
        c = Counter(self.data)
        return [c.get(i, 0) for i in range(self.alphabet.size)]


@dataclass(frozen=True)
class PatternSeq:
    """Binary selection pattern; the 1-positions pick a subsequence."""

    bits: tuple

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError("pattern entries must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    @property
    def length(self) -> int:
        return len(self.bits)

    def ones(self) -> int:
        return sum(self.bits)

    def __len__(self) -> int:
        return len(self.bits)


def _check_masses(mass: Sequence[Fraction], size: int) -> tuple:
    mass = tuple(Fraction(m) for m in mass)
    if len(mass) != size:
        raise ValueError(f"expected {size} masses, got {len(mass)}")
    if any(m < 0 for m in mass):
        raise ValueError("masses must be nonnegative")
    return mass


@dataclass(frozen=True)
class EmpiricalDistribution:
    alphabet: Alphabet
    mass: tuple

    def __post_init__(self):
        mass = _check_masses(self.mass, self.alphabet.size)
        if sum(mass) != 1:
            raise ValueError(f"masses sum to {sum(mass)}, not 1")
        object.__setattr__(self, "mass", mass)

    def __getitem__(self, i: int) -> Fraction:
        return self.mass[i]

    def __len__(self) -> int:
        return len(self.mass)

    def entropy(self) -> float:
        return entropy(self.mass)


@dataclass(frozen=True)
class ScaledSampleDistribution:
    """Sample occurrence counts divided by the expected sample size.

    ``mass`` sums to ``scale``; for a nonempty sample ``mass/scale`` is the
    plain empirical distribution of the sample.
    """

    alphabet: Alphabet
    mass: tuple
    scale: Fraction

    def __post_init__(self):
        mass = _check_masses(self.mass, self.alphabet.size)
        scale = Fraction(self.scale)
        if scale < 0:
            raise ValueError("scale must be nonnegative")
        if sum(mass) != scale:
            raise ValueError("masses must sum to the scale")
        object.__setattr__(self, "mass", mass)
        object.__setattr__(self, "scale", scale)

    def __getitem__(self, i: int) -> Fraction:
        return self.mass[i]

    def __len__(self) -> int:
        return len(self.mass)


def uniform(alphabet: Alphabet) -> EmpiricalDistribution:
    return EmpiricalDistribution(alphabet, (Fraction(1, alphabet.size),) * alphabet.size)


def distribution_from_counts(alphabet: Alphabet, counts: Sequence[int]) -> EmpiricalDistribution:
    total = sum(counts)
    if total == 0:
        return uniform(alphabet)
    return EmpiricalDistribution(alphabet, tuple(Fraction(c, total) for c in counts))


def empirical_distribution(seq: SymbolSeq) -> EmpiricalDistribution:
    # a null string has the uniform distribution by convention
    return distribution_from_counts(seq.alphabet, seq.counts())


def entropy(p: Sequence) -> float:
    """Shannon entropy in bits, with 0 log 0 = 0."""
    h = 0.0
    for x in p:
        x = float(x)
        if x > 0:
            h -= x * math.log2(x)
    return h


def empirical_entropy(seq: SymbolSeq) -> float:
    return entropy(empirical_distribution(seq).mass)


def linf_distance(p, q) -> Fraction:
    if p.alphabet != q.alphabet:
        raise ValueError("alphabet mismatch")
    return max(abs(a - b) for a, b in zip(p.mass, q.mass))


def entropy_linf_lower_bound(p: EmpiricalDistribution) -> float:
    size = p.alphabet.size
    dev = linf_distance(p, uniform(p.alphabet))
    return math.log2(size) * float(1 - size * dev)


def sample(seq: SymbolSeq, pattern: PatternSeq) -> SymbolSeq:
    if len(seq) != len(pattern):
        raise ValueError("sequence and pattern lengths differ")
    return SymbolSeq(seq.alphabet, tuple(s for s, b in zip(seq.data, pattern.bits) if b))


def alpha_normalized_sample_distribution(seq: SymbolSeq, pattern: PatternSeq,
                                         expected_ones) -> ScaledSampleDistribution:
    expected_ones = Fraction(expected_ones)
    if expected_ones <= 0:
        raise ValueError("expected_ones must be positive")
    sub = sample(seq, pattern)
    return scaled_from_counts(seq.alphabet, sub.counts(), expected_ones)


def scaled_from_counts(alphabet: Alphabet, counts: Sequence[int], expected_ones) -> ScaledSampleDistribution:
    """Counts over an expected sample size; the empty sample gives all zeros."""
    expected_ones = Fraction(expected_ones)
    mass = tuple(Fraction(c) / expected_ones for c in counts)
    return ScaledSampleDistribution(alphabet, mass, Fraction(sum(counts)) / expected_ones)
