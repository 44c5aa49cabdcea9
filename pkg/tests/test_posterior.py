import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from empcap.core_types import SymbolSeq
from empcap.estimators import (KtEstimator, UpdateSchedule, assigned_probability, log2_fraction,
                               observe)
from empcap.posterior import (BinaryInterval, ExactTracker, FastTracker, Posterior,
                              ambiguity_bit, decode_binary_interval, encode_symbol,
                              horstein_update, interval_by_index, message_interval,
                              partition_points)


def test_partition_points_examples():
    assert partition_points(Posterior.uniform(2)) == [F(1, 2)]
    assert partition_points(Posterior.uniform(4)) == [F(1, 4), F(1, 2), F(3, 4)]
    p = Posterior(Posterior.uniform(2).alphabet,
                  ((0, F(1, 2), F(3, 2)), (F(1, 2), 1, F(1, 2))))
    assert partition_points(p) == [F(1, 3)]


def test_encode_symbol_examples():
    assert encode_symbol(Posterior.uniform(4), F(3, 10)) == 1
    assert encode_symbol(Posterior.uniform(2), F(3, 10)) == 0
    assert encode_symbol(Posterior.uniform(2), F(1, 2)) == 1
    with pytest.raises(ValueError):
        encode_symbol(Posterior.uniform(2), F(1))


def test_horstein_update_examples():
    p = horstein_update(Posterior.uniform(2), 0, [F(3, 4), F(1, 4)])
    assert [s[2] for s in p.segments] == [F(3, 2), F(1, 2)]
    for q in (2, 3, 5):
        post = Posterior.uniform(q)
        post = horstein_update(post, 1, [F(1, q)] * q)
        assert all(w == 1 for _, _, w in post.segments)
    with pytest.raises(ValueError):
        horstein_update(Posterior.uniform(2), 0, [F(1, 2), F(1, 3)])


def test_message_interval_examples():
    assert message_interval(Posterior.uniform(2), F(1, 3)).segment_index == 0
    p = horstein_update(Posterior.uniform(2), 0, [F(3, 4), F(1, 4)])
    mi = message_interval(p, F(3, 10))
    assert (mi.left, mi.right, mi.segment_index) == (0, F(1, 2), 0)
    assert interval_by_index(Posterior.uniform(3), 0) == (0, 1)
    with pytest.raises(IndexError):
        interval_by_index(p, 2)


def random_kt_walk(q, n, rng, b=1):
    """Exact reference walk with KT(b) estimates on random noise."""
    post, kt = Posterior.uniform(q), KtEstimator.fresh(q)
    sched = UpdateSchedule.every_b_steps(b)
    theta = F(rng.getrandbits(64), 1 << 64)
    zs = []
    for _ in range(n):
        x = encode_symbol(post, theta)
        z = rng.choice([0] * 3 + list(range(q)))
        post = horstein_update(post, (x + z) % q, kt.estimates())
        kt = observe(kt, z, sched)
        zs.append(z)
    return post, theta, zs, sched


def test_mass_conservation_and_segment_count():
    rng = random.Random(11)
    cases = 0
    while cases < 10_000:
        q = rng.randint(2, 4)
        post = Posterior.uniform(q)
        for k in range(1, 41):
            est = [F(rng.randint(1, 9)) for _ in range(q)]
            tot = sum(est)
            post = horstein_update(post, rng.randrange(q), [e / tot for e in est])
            assert post.mass() == 1
            assert len(post) <= k * (q - 1) + 1
            cases += 1


@pytest.mark.parametrize("q", [2, 3, 4])
@pytest.mark.parametrize("b", [1, 7])
def test_identity_with_sequential_estimates(q, b):
    rng = random.Random(q * 100 + b)
    post, theta, zs, sched = random_kt_walk(q, 60, rng, b)
    p_hat = assigned_probability(SymbolSeq.of(zs, q), sched)
    assert post.density_at(theta) == q ** len(zs) * p_hat


def test_fixed_p_identity():
    rng = random.Random(5)
    p = F(1, 4)
    tr = ExactTracker(2)
    theta = F(rng.getrandbits(512), 1 << 512)
    n1 = 0
    for _ in range(300):
        z = int(rng.random() < 0.25)
        n1 += z
        tr.update((tr.encode(theta) + z) % 2, [1 - p, p])
    assert tr.density_at(theta) == 2 ** 300 * (1 - p) ** (300 - n1) * p ** n1


@pytest.mark.parametrize("q", [2, 3, 4])
def test_exact_tracker_matches_reference(q):
    rng = random.Random(q)
    ref, tr = Posterior.uniform(q), ExactTracker(q)
    kt = KtEstimator.fresh(q)
    theta = F(rng.getrandbits(128), 1 << 128)
    for _ in range(40):
        x = encode_symbol(ref, theta)
        assert tr.encode(theta) == x
        assert tr.partition_points() == partition_points(ref)
        y = (x + rng.choice([0, 0, 1])) % q
        ref = horstein_update(ref, y, kt.estimates())
        tr.update(y, kt.estimates())
        kt = observe(kt, (y - x) % q, UpdateSchedule.every_step())
        assert tr.to_posterior() == ref
        assert tr.message_interval(theta) == message_interval(ref, theta)
    for i in range(len(ref)):
        assert tr.interval_by_index(i) == interval_by_index(ref, i)


def test_fast_tracker_identity_and_agreement():
    rng = random.Random(3)
    q, n = 2, 400
    ex, fa = ExactTracker(q), FastTracker.for_horizon(q, n)
    kt = KtEstimator.fresh(q)
    theta = F(rng.getrandbits(512), 1 << 512)
    th = fa.embed(theta)
    zs = []
    for _ in range(n):
        # the exact engine follows the fast engine's decisions
        x = fa.encode(th)
        margin = abs(ex.partition_points()[0] - theta)
        if margin > F(1, 10 ** 12):
            assert ex.encode(theta) == x
        z = int(rng.random() < 0.1)
        zs.append(z)
        ex.update((x + z) % q, kt.estimates())
        fa.update((x + z) % q, kt.float_estimates())
        kt = observe(kt, z, UpdateSchedule.every_step())
        assert abs(fa.mass() - 1) < 1e-9
    p_hat = assigned_probability(SymbolSeq.of(zs, q), UpdateSchedule.every_step())
    target = n + log2_fraction(p_hat)
    assert fa.log2_density_at(th) == pytest.approx(target, abs=1e-6)
    mi = fa.message_interval(th)
    assert mi.left <= theta < mi.right


def test_fast_tracker_snapshot_restore():
    rng = random.Random(9)
    fa = FastTracker.for_horizon(3, 500)
    est = [0.7, 0.2, 0.1]
    for _ in range(50):
        fa.update(rng.randrange(3), est)
    snap = fa.snapshot()
    before = fa.state()
    intervals = [fa.interval_by_index(i) for i in range(fa.segment_count)]
    for _ in range(200):
        fa.update(rng.randrange(3), est)
    assert [fa.snapshot_interval(snap, i) for i in range(len(intervals))] == intervals
    fa.restore(snap)
    assert fa.state() == before


def test_fast_tracker_message_interval_in_archives():
    fa = FastTracker.for_horizon(2, 400)
    theta = fa.embed(F(1, 3))
    for _ in range(400):
        x = fa.encode(theta)
        fa.update(x, [0.98, 0.02])
    assert fa.la or fa.ra
    for t in [F(1, 1000), F(999, 1000), F(1, 3)]:
        mi = fa.message_interval(fa.embed(t))
        assert mi.left <= t < mi.right
        assert fa.interval_by_index(mi.segment_index) == (mi.left, mi.right)


def test_decode_binary_interval_examples():
    d = decode_binary_interval((F(3, 10), F(35, 100)), 1)
    assert (d.depth, d.left, d.right, d.bits()) == (4, F(5, 16), F(3, 8), "0101")
    assert decode_binary_interval((F(0), F(1)), 1) == BinaryInterval(0, 0)
    d = decode_binary_interval((F(1, 4), F(1, 2)), 0)
    assert (d.depth, d.left, d.right) == (2, F(1, 4), F(1, 2))
    with pytest.raises(ValueError):
        decode_binary_interval((F(1, 2), F(1, 2)), 0)


def test_ambiguity_bit_examples():
    t = (F(3, 10), F(35, 100))
    assert ambiguity_bit(t, F(33, 100)) == 1
    assert ambiguity_bit(t, F(305, 1000)) == 0
    assert decode_binary_interval((F(1, 4), F(1, 2)), ambiguity_bit((F(1, 4), F(1, 2)), F(1, 3))) \
        == BinaryInterval(2, 1)
    with pytest.raises(ValueError):
        ambiguity_bit(t, F(1, 2))


@settings(max_examples=2000, deadline=None)
@given(st.integers(1, 40), st.data())
def test_decoded_interval_contains_message(d, data):
    den = 1 << d
    a = data.draw(st.integers(0, den - 1))
    b = data.draw(st.integers(a + 1, den))
    left, right = F(a, den), F(b, den)
    theta = left + (right - left) * F(data.draw(st.integers(0, 999)), 1000)
    out = decode_binary_interval((left, right), ambiguity_bit((left, right), theta))
    assert out.contains(theta)
    assert out.length < 2 * (right - left)
