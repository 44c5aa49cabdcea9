"""Property checks for the entropy, redundancy and sampling bounds.

Each check returns a ``LemmaResult`` with the number of violations and the
smallest observed slack (bound minus observed; negative means violated).
The Monte-Carlo checks allow a 3-sigma binomial slack on top of the bound.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core_types import (Alphabet, EmpiricalDistribution, SymbolSeq, empirical_entropy, entropy,
                         entropy_linf_lower_bound)
from .estimators import UpdateSchedule, assigned_probability, log2_fraction

# additive constant of the concrete KT redundancy bound is |X| times this
KT_CONSTANT = 1.0


@dataclass
class LemmaResult:
    name: str
    passed: bool
    instances: int
    violations: int
    min_slack: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.name}: {self.instances} instances, {self.violations} violations, "
                f"min slack {self.min_slack:.6g}{' (' + self.detail + ')' if self.detail else ''}")


@dataclass
class LemmaReport:
    results: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def text(self) -> str:
        return "\n".join(r.line() for r in self.results)


def entropy_bound_check(draws: int = 10_000, seed: int = 1) -> LemmaResult:
    rng = np.random.default_rng(seed)
    worst, bad = math.inf, 0
    for t in range(draws):
        size = int(rng.integers(2, 9))
        # mix spread-out and near-degenerate points
        conc = [0.1, 1.0, 10.0][t % 3]
        w = rng.dirichlet([conc] * size)
        mass = [Fraction(float(v)) for v in w]
        tot = sum(mass)
        p = EmpiricalDistribution(Alphabet(size), tuple(m / tot for m in mass))
        slack = entropy(p.mass) - entropy_linf_lower_bound(p)
        worst = min(worst, slack)
        bad += slack < -1e-12
    return LemmaResult("entropy L-inf bound", bad == 0, draws, bad, worst)


def kt_bound(n: int, h: float, size: int, constant: float = KT_CONSTANT) -> float:
    """n H + ((|X|-1)/2) log2 n + constant * |X|."""
    return n * h + (size - 1) / 2 * math.log2(n) + constant * size


def kt_redundancy_check(random_instances: int = 1000, max_n: int = 4096, seed: int = 2,
                        constant: float = KT_CONSTANT) -> LemmaResult:
    every = UpdateSchedule.every_step()
    worst, bad, count = math.inf, 0, 0
    # exhaustive oracle over binary strings up to length 12
    for n in range(1, 13):
        for bits in itertools.product((0, 1), repeat=n):
            seq = SymbolSeq.of(bits, 2)
            code = log2_fraction(1 / assigned_probability(seq, every))
            slack = kt_bound(n, empirical_entropy(seq), 2, constant) - code
            worst = min(worst, slack)
            bad += slack < -1e-9
            count += 1
    rng = np.random.default_rng(seed)
    for _ in range(random_instances):
        size = int(rng.integers(2, 5))
        n = int(rng.integers(1, max_n + 1))
        pmf = rng.dirichlet([0.5] * size)
        seq = SymbolSeq.of(rng.choice(size, size=n, p=pmf).tolist(), size)
        code = log2_fraction(1 / assigned_probability(seq, every))
        slack = kt_bound(n, empirical_entropy(seq), size, constant) - code
        worst = min(worst, slack)
        bad += slack < -1e-9
        count += 1
    return LemmaResult("KT redundancy", bad == 0, count, bad, worst,
                       f"constant {constant:g}*|X|")


def noisy_kt_check(instances: int = 10_000, seed: int = 3) -> LemmaResult:
    rng = np.random.default_rng(seed)
    every = UpdateSchedule.every_step()
    worst, bad = math.inf, 0
    for _ in range(instances):
        size = int(rng.integers(2, 5))
        n = int(rng.integers(1, 513))
        b = int(rng.integers(1, 65))
        d = int(rng.integers(0, min(n, 32) + 1))
        z = rng.choice(size, size=n, p=rng.dirichlet([0.5] * size))
        w = z.copy()
        pos = rng.choice(n, size=d, replace=False)
        w[pos] = (w[pos] + rng.integers(1, size, size=d)) % size
        zs, ws = SymbolSeq.of(z.tolist(), size), SymbolSeq.of(w.tolist(), size)
        excess = log2_fraction(assigned_probability(zs, every)
                               / assigned_probability(zs, UpdateSchedule.every_b_steps(b), ws))
        bound = 2 * size * (b + d - 1) * math.log2(2 * n * math.e)
        slack = bound - excess
        worst = min(worst, slack)
        bad += slack < -1e-9
    return LemmaResult("noisy KT(b) excess", bad == 0, instances, bad, worst)


def _mc_verdict(name, hits, trials, bound, detail) -> LemmaResult:
    freq = hits / trials
    slack3 = 3 * math.sqrt(max(bound * (1 - bound), 0.0) / trials)
    margin = bound + slack3 - freq
    return LemmaResult(name, margin >= 0, trials, int(margin < 0), margin,
                       f"freq {freq:.5f} vs bound {bound:.5f} + {slack3:.5f}; {detail}")


def sampling_check(trials: int = 100_000, n: int = 200, m: int = 50, tau: float = 0.2,
                   size: int = 2, seed: int = 4, chunk: int = 10_000) -> LemmaResult:
    """Uniform fixed-weight sampling without replacement."""
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    pmf = np.full(size, 1 / size)
    while done < trials:
        c = min(chunk, trials - done)
        z = rng.choice(size, size=(c, n), p=pmf)
        picks = np.argsort(rng.random((c, n)), axis=1)[:, :m]
        zs = np.take_along_axis(z, picks, axis=1)
        dev = np.zeros(c)
        for i in range(size):
            full = (z == i).mean(axis=1)
            sub = (zs == i).mean(axis=1)
            dev = np.maximum(dev, np.abs(full - sub))
        hits += int(np.count_nonzero(dev > tau))
        done += c
    bound = 2 * size * math.exp(-2 * m * tau ** 2)
    return _mc_verdict("sampling without replacement", hits, trials, bound,
                       f"n={n} m={m} tau={tau}")


def causal_sampling_check(trials: int = 20_000, n: int = 1000, q: float = 0.5, tau: float = 0.2,
                          seed: int = 5, chunk: int = 5_000) -> LemmaResult:
    """Bernoulli(q) causal sampling with the coupled noise Z_1 = 0, Z_k = B_{k-1}."""
    rng = np.random.default_rng(seed)
    hits, done = 0, 0
    while done < trials:
        c = min(chunk, trials - done)
        bsel = rng.random((c, n)) < q
        z = np.zeros((c, n), dtype=np.int8)
        z[:, 1:] = bsel[:, :-1]
        dev = np.zeros(c)
        for i in (0, 1):
            full = (z == i).sum(axis=1) / n
            scaled = ((z == i) & bsel).sum(axis=1) / (n * q)
            dev = np.maximum(dev, np.abs(full - scaled))
        hits += int(np.count_nonzero(dev > tau))
        done += c
    bound = 2 * 2 * math.exp(-n * tau ** 2 * q ** 2 / 2)
    return _mc_verdict("causal sampling", hits, trials, bound, f"n={n} q={q} tau={tau}")


def lemma_suite(quick: bool = False, kt_constant: float = KT_CONSTANT) -> LemmaReport:
    """Run every check. ``quick`` shrinks the random instance counts."""
    k = 10 if quick else 1
    return LemmaReport([
        entropy_bound_check(10_000 // k),
        kt_redundancy_check(1000 // k, constant=kt_constant),
        noisy_kt_check(10_000 // k),
        sampling_check(100_000 // k),
        causal_sampling_check(20_000 // k),
    ])
