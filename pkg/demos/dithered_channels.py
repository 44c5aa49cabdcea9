"""Dithering turns any causal channel into a modulo-additive one.

Adding a shared uniform dither to the input and subtracting it at the
output makes the realized noise y - x independent of what the transmitter
meant to send. For a channel that ignores its input the induced noise is
uniform and C_emp collapses to 0; for a binary memoryless channel with
P(0|0)=0.9, P(1|1)=0.7 it becomes a BSC with crossover 0.2.

    python3 demos/dithered_channels.py
"""

import numpy as np

from empcap import channels as ch
from empcap.core_types import entropy


def induced_capacity(inner, n=100_000, seed=0):
    d = ch.DitheredChannel(inner)
    d.start(np.random.default_rng(seed), dither_rng=np.random.default_rng(seed + 1))
    xs = np.zeros(n, dtype=np.int64)        # the worst input policy: constant
    ys = np.array([d.step(0) for _ in xs])
    return ch.empirical_capacity_of_array((ys - xs) % 2, 2)


def main():
    print(f"output_only(0.1):       C_emp = {induced_capacity(ch.OutputOnly(0.1)):.4f}")
    c = induced_capacity(ch.GeneralMemoryless.binary(0.9, 0.7))
    print(f"general(0.9, 0.7):      C_emp = {c:.4f}  (1 - h(0.2) = {1 - entropy([0.2, 0.8]):.4f})")
    c = induced_capacity(ch.bsc(0.1))
    print(f"bsc(0.1), already additive: C_emp = {c:.4f}  (1 - h(0.1) = {1 - entropy([0.1, 0.9]):.4f})")


if __name__ == "__main__":
    main()
