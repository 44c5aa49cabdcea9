import math

import numpy as np
import pytest

from empcap import channels as ch
from empcap.core_types import SymbolSeq, entropy


def drive(channel, xs, seed=0):
    channel.start(np.random.default_rng(seed))
    return [channel.step(int(x)) for x in xs]


def test_individual_noise_is_deterministic():
    z = [1, 0, 1, 1, 0]
    xs = [0, 1, 1, 0, 1]
    assert drive(ch.IndividualNoise(z), xs) == [(x + v) % 2 for x, v in zip(xs, z)]
    c = ch.IndividualNoise([1])
    c.start()
    c.step(0)
    with pytest.raises(IndexError):
        c.step(0)


def test_memoryless_additive_frequencies():
    c = ch.MemorylessAdditive([0.9, 0.1])
    ys = drive(c, [1] * 20000, seed=3)
    freq = sum((y - 1) % 2 for y in ys) / 20000
    assert abs(freq - 0.1) < 4 * math.sqrt(0.09 / 20000)


def test_output_only_ignores_input():
    a = drive(ch.OutputOnly(0.1), [0] * 500, seed=8)
    b = drive(ch.OutputOnly(0.1), [1] * 500, seed=8)
    assert a == b


def test_realized_noise_examples():
    assert ch.realized_noise([1, 0, 1], [1, 0, 1]).data == (0, 0, 0)
    assert ch.realized_noise([0, 1, 1], [1, 1, 0]).data == (1, 0, 1)
    assert ch.realized_noise([3, 2], [0, 0], 4).data == (1, 2)
    with pytest.raises(ValueError):
        ch.realized_noise([0], [0, 1])


def test_empirical_capacity_examples():
    assert ch.empirical_capacity(SymbolSeq.of([0] * 8)) == 1.0
    assert ch.empirical_capacity(SymbolSeq.of([0, 1] * 4)) == 0.0
    c = ch.empirical_capacity(SymbolSeq.of([1, 0, 0, 0] * 2))
    assert c == pytest.approx(0.18872, abs=1e-5)
    with pytest.raises(ValueError):
        ch.empirical_capacity(SymbolSeq.of([]))
    assert ch.empirical_capacity_of_array(np.array([1, 0, 0, 0]), 2) == pytest.approx(c)


def test_fixed_composition_noise():
    c = ch.FixedCompositionNoise.with_fraction(1000, 0.15)
    ys = drive(c, [0] * 1000, seed=1)
    assert sum(ys) == 150
    ys2 = drive(c, [0] * 1000, seed=2)
    assert ys != ys2 and sum(ys2) == 150


def test_state_constrained_budget():
    c = ch.StateConstrainedAdversary(0.2)
    ys = drive(c, [0] * 1000)
    for k in range(1, 1001):
        assert sum(ys[:k]) <= 0.2 * k
    assert sum(ys) == 200


def test_push_to_uniform():
    c = ch.PushToUniformAdversary(3)
    zs = [(y - x) % 3 for x, y in zip([2] * 9, drive(c, [2] * 9))]
    assert zs == [0, 1, 2] * 3


def test_general_memoryless_rows():
    c = ch.GeneralMemoryless.binary(0.9, 0.7)
    ys = drive(c, [1] * 20000, seed=4)
    assert abs(sum(ys) / 20000 - 0.7) < 0.02


@pytest.mark.parametrize("make", [
    lambda: ch.IndividualNoise(list(np.random.default_rng(0).integers(0, 2, 200))),
    lambda: ch.MemorylessAdditive([0.7, 0.3]),
    lambda: ch.bsc(0.2),
    lambda: ch.StateConstrainedAdversary(0.3),
    lambda: ch.PushToUniformAdversary(2),
    lambda: ch.MemorylessAdditive([0.5, 0.2, 0.3]),
])
def test_shift_audit_passes_for_modulo_additive(make):
    channel = make()
    assert ch.MODULO_ADDITIVE in channel.tags
    history = np.random.default_rng(1).integers(0, channel.size, 50)
    ok, score = ch.shift_audit(channel, history, trials=1000)
    assert ok, score


def test_shift_audit_rejects_output_only():
    channel = ch.OutputOnly(0.1)
    assert ch.MODULO_ADDITIVE not in channel.tags
    ok, score = ch.shift_audit(channel, [0, 1] * 10, trials=1000)
    assert not ok


def test_noise_file_roundtrip(tmp_path):
    z = [0, 1, 1, 0, 1]
    path = tmp_path / "noise.txt"
    ch.write_noise_file(path, z)
    assert path.read_text() == "0\n1\n1\n0\n1\n"
    assert ch.read_noise_file(path) == z
    path.write_text("0\n2\n")
    with pytest.raises(ValueError):
        ch.read_noise_file(path, 2)


def test_dither_makes_inputs_uniform():
    n, q = 100_000, 2
    d = ch.DitheredChannel(ch.bsc(0.1))
    d.start(np.random.default_rng(1), dither_rng=np.random.default_rng(2))
    for _ in range(n):
        d.step(0)                     # worst case: a constant input policy
    freq = np.bincount(d.inner_x, minlength=q) / n
    assert np.max(np.abs(freq - 1 / q)) < 3 * math.sqrt(q / n)
    # realized noise of the dithered pair equals that of the caller's pair
    zt = (np.array(d.inner_y) - np.array(d.inner_x)) % q
    assert abs(zt.mean() - 0.1) < 0.01


def _dithered_noise(inner, n=100_000, seed=0):
    d = ch.DitheredChannel(inner)
    d.start(np.random.default_rng(seed), dither_rng=np.random.default_rng(seed + 1))
    xs = np.random.default_rng(seed + 2).integers(0, 2, n)
    ys = [d.step(int(x)) for x in xs]
    return (np.array(ys) - xs) % 2


def test_induced_general_memoryless_statistic():
    z = _dithered_noise(ch.GeneralMemoryless.binary(0.9, 0.7))
    assert abs(z.mean() - 0.2) < 0.01
    target = 1 - entropy([0.2, 0.8])
    assert abs(ch.empirical_capacity_of_array(z, 2) - target) < 0.02


def test_output_only_dithered_is_uniform():
    z = _dithered_noise(ch.OutputOnly(0.1))
    assert abs(ch.empirical_capacity_of_array(z, 2)) < 0.02
