import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from empcap.core_types import (Alphabet, EmpiricalDistribution, PatternSeq, SymbolSeq,
                               alpha_normalized_sample_distribution, empirical_distribution,
                               empirical_entropy, entropy, entropy_linf_lower_bound,
                               linf_distance, sample, uniform)


def seq(symbols, size=2):
    return SymbolSeq.of(symbols, size)


def dist(values, size=None):
    values = [Fraction(v) for v in values]
    return EmpiricalDistribution(Alphabet(size or len(values)), tuple(values))


def test_alphabet_group_ops():
    a = Alphabet(4)
    assert a.add(3, 2) == 1
    assert a.sub(0, 1) == 3
    with pytest.raises(ValueError):
        Alphabet(1)


def test_symbol_out_of_range():
    with pytest.raises(ValueError):
        seq([0, 2], 2)


def test_empirical_distribution_examples():
    assert empirical_distribution(seq([0, 1, 1, 0])).mass == (Fraction(1, 2), Fraction(1, 2))
    assert empirical_distribution(seq([])).mass == (Fraction(1, 2), Fraction(1, 2))
    assert empirical_distribution(seq([3, 3, 0, 1], 4)).mass == (
        Fraction(1, 4), Fraction(1, 4), 0, Fraction(1, 2))


def test_empirical_entropy_examples():
    assert empirical_entropy(seq([0, 0, 0, 0])) == 0.0
    assert empirical_entropy(seq([0, 1, 1, 0])) == 1.0
    h = empirical_entropy(seq([1, 1, 0, 0, 0, 0, 0, 0]))
    assert h == pytest.approx(0.811278, abs=1e-6)


def test_linf_examples():
    p = dist([Fraction(1, 3), Fraction(2, 3)])
    assert linf_distance(p, p) == 0
    assert linf_distance(dist([1, 0]), uniform(Alphabet(2))) == Fraction(1, 2)
    d = linf_distance(dist(["0.9", "0.1"]), dist(["0.88", "0.12"]))
    assert d == Fraction(1, 50)
    with pytest.raises(ValueError):
        linf_distance(dist([1, 0]), uniform(Alphabet(3)))


def test_entropy_bound_examples():
    assert entropy_linf_lower_bound(uniform(Alphabet(4))) == 2.0
    assert entropy_linf_lower_bound(dist([1, 0])) == 0.0
    p = dist([Fraction(3, 4), Fraction(1, 4)])
    assert entropy_linf_lower_bound(p) == 0.5
    assert entropy(p.mass) == pytest.approx(0.8113, abs=1e-4)


def test_sample_examples():
    s = seq([0, 1, 1, 0])
    assert sample(s, PatternSeq((1, 0, 0, 1))).data == (0, 0)
    assert sample(s, PatternSeq((0, 0, 0, 0))).data == ()
    assert sample(s, PatternSeq((1, 1, 1, 1))) == s
    with pytest.raises(ValueError):
        sample(s, PatternSeq((1, 0)))


def test_alpha_normalized_examples():
    s = seq([0, 1, 1, 0])
    d = alpha_normalized_sample_distribution(s, PatternSeq((1, 0, 0, 1)), 2)
    assert d.scale == 1 and d.mass == (1, 0)
    d = alpha_normalized_sample_distribution(s, PatternSeq((1, 1, 1, 0)), 2)
    assert d.scale == Fraction(3, 2) and d.mass == (Fraction(1, 2), 1)
    d = alpha_normalized_sample_distribution(seq([]), PatternSeq(()), 2)
    assert d.scale == 0 and d.mass == (0, 0)
    with pytest.raises(ValueError):
        alpha_normalized_sample_distribution(s, PatternSeq((1, 1, 1, 0)), 0)


probability_vectors = st.integers(2, 8).flatmap(
    lambda k: st.lists(st.integers(0, 1000), min_size=k, max_size=k).filter(lambda c: sum(c) > 0))


@settings(max_examples=500, deadline=None)
@given(probability_vectors)
def test_entropy_bound_holds(counts):
    total = sum(counts)
    p = dist([Fraction(c, total) for c in counts])
    assert entropy(p.mass) >= entropy_linf_lower_bound(p) - 1e-12


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 5).flatmap(lambda k: st.tuples(
    st.just(k), st.lists(st.integers(0, k - 1), max_size=40))), st.data())
def test_sample_length_and_exact_sums(args, data):
    k, symbols = args
    bits = data.draw(st.lists(st.integers(0, 1), min_size=len(symbols), max_size=len(symbols)))
    s = seq(symbols, k)
    assert len(sample(s, PatternSeq(bits))) == sum(bits)
    p = empirical_distribution(s)
    assert sum(p.mass) == 1
    assert all(isinstance(m, Fraction) for m in p.mass)
    if sum(bits):
        a = alpha_normalized_sample_distribution(s, PatternSeq(bits), Fraction(len(bits) + 1, 3))
        assert sum(a.mass) == a.scale


def test_lemma1_random_simplex():
    from empcap.lemmas import entropy_bound_check
    r = entropy_bound_check(2000)
    assert r.passed, r.line()
    assert math.isfinite(r.min_slack)
