"""Krichevsky-Trofimov estimators with lazy (scheduled) count commits.

Half counts are kept doubled so everything stays integer: the estimate of
symbol i is (2*c_i + 1) / (2*T + |X|).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .core_types import Alphabet, Symbol, SymbolSeq


@dataclass(frozen=True)
class UpdateSchedule:
    """When pending observations fold into the committed counts.

    ``policy`` is one of ``"every_step"``, ``"every_b_steps"`` (with ``b``)
    or ``"explicit"`` (with ``positions``, 1-based observation indices after
    which a commit happens).
    """

    policy: str = "every_step"
    b: int = 1
    positions: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.policy not in ("every_step", "every_b_steps", "explicit"):
            raise ValueError(f"unknown schedule policy {self.policy!r}")
        if self.policy == "every_b_steps" and self.b < 1:
            raise ValueError("b must be >= 1")
        object.__setattr__(self, "positions", frozenset(self.positions))

    @classmethod
    def every_step(cls) -> "UpdateSchedule":
        return cls("every_step")

    @classmethod
    def every_b_steps(cls, b: int) -> "UpdateSchedule":
        return cls("every_b_steps", b=b)

    @classmethod
    def explicit(cls, positions) -> "UpdateSchedule":
        return cls("explicit", positions=frozenset(positions))

    def commits_at(self, k: int) -> bool:
        """True if the k-th observation (1-based) triggers a commit."""
        if self.policy == "every_step":
            return True
        if self.policy == "every_b_steps":
            return k % self.b == 0
        return k in self.positions

    def nu(self, k: int) -> int:
        """Index of the last committed observation when estimating symbol k."""
        if self.policy == "every_step":
            return k - 1
        if self.policy == "every_b_steps":
            return ((k - 1) // self.b) * self.b
        return max((p for p in self.positions if p <= k - 1), default=0)


@dataclass(frozen=True)
class KtEstimator:
    alphabet: Alphabet
    committed_counts: tuple = ()
    pending: tuple = ()

    def __post_init__(self):
        counts = tuple(self.committed_counts) or (0,) * self.alphabet.size
        if len(counts) != self.alphabet.size or any(c < 0 for c in counts):
            raise ValueError("bad committed counts")
        object.__setattr__(self, "committed_counts", counts)
        object.__setattr__(self, "pending", tuple(self.pending))

    @classmethod
    def fresh(cls, size: int) -> "KtEstimator":
        return cls(Alphabet(size))

    @property
    def committed_total(self) -> int:
        return sum(self.committed_counts)

    @property
    def observed(self) -> int:
        return self.committed_total + len(self.pending)

    def estimates(self) -> tuple:
        den = 2 * self.committed_total + self.alphabet.size
        return tuple(Fraction(2 * c + 1, den) for c in self.committed_counts)

    def float_estimates(self) -> list[float]:
        den = 2 * self.committed_total + self.alphabet.size
        return [(2 * c + 1) / den for c in self.committed_counts]


def estimate(est: KtEstimator, symbol: Symbol) -> Fraction:
    if symbol not in est.alphabet:
        raise ValueError(f"symbol {symbol!r} outside alphabet")
    return Fraction(2 * est.committed_counts[symbol] + 1,
                    2 * est.committed_total + est.alphabet.size)


def commit(est: KtEstimator) -> KtEstimator:
    counts = list(est.committed_counts)
    for s in est.pending:
        counts[s] += 1
    return KtEstimator(est.alphabet, tuple(counts), ())


def commit_counts(est: KtEstimator, counts: Sequence[int]) -> KtEstimator:
    """Fold externally supplied counts (e.g. a decoded noise type) into the
    committed state. Pending observations are left alone."""
    if len(counts) != est.alphabet.size or any(c < 0 for c in counts):
        raise ValueError("bad count vector")
    new = tuple(a + int(c) for a, c in zip(est.committed_counts, counts))
    return KtEstimator(est.alphabet, new, est.pending)


def observe(est: KtEstimator, symbol: Symbol, schedule: UpdateSchedule) -> KtEstimator:
    if symbol not in est.alphabet:
        raise ValueError(f"symbol {symbol!r} outside alphabet")
    nxt = KtEstimator(est.alphabet, est.committed_counts, est.pending + (symbol,))
    if schedule.commits_at(nxt.observed):
        nxt = commit(nxt)
    return nxt


def assigned_probability(seq: SymbolSeq, schedule: UpdateSchedule,
                         observations: SymbolSeq | None = None) -> Fraction:
    """Product of the sequential estimates of ``seq`` while the estimator
    watches ``observations`` (defaults to ``seq`` itself)."""
    if observations is None:
        observations = seq
    if len(seq) != len(observations):
        raise ValueError("sequence and observations lengths differ")
    size = seq.alphabet.size
    # integer bookkeeping: same arithmetic as estimate()/observe(), just faster
    counts = [0] * size
    pending = []
    num, den = 1, 1
    for k, (z, w) in enumerate(zip(seq.data, observations.data), start=1):
        num *= 2 * counts[z] + 1
        den *= 2 * (k - 1 - len(pending)) + size
        pending.append(w)
        if schedule.commits_at(k):
            for s in pending:
                counts[s] += 1
            pending.clear()
    return Fraction(num, den)


def codelength_bits(seq: SymbolSeq, schedule: UpdateSchedule,
                    observations: SymbolSeq | None = None) -> float:
    p = assigned_probability(seq, schedule, observations)
    return log2_fraction(1 / p) if p else math.inf


def log2_fraction(x: Fraction) -> float:
    """log2 of a positive rational without float overflow."""
    x = Fraction(x)
    if x <= 0:
        raise ValueError("log of nonpositive number")
    a, b = x.numerator, x.denominator
    shift = a.bit_length() - b.bit_length()
    # scale into a comfortable float range before dividing
    if shift > 0:
        b <<= shift
    else:
        a <<= -shift
    return shift + math.log2(a / b)
