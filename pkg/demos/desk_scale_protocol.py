"""The full block protocol at a horizon a laptop can simulate.

With the canonical exponents the discard threshold 5*n^(-1/16) stays above
1 until n is astronomically large, so every block is thrown away and the
decoder falls back to [0,1). That is the scheme working as designed, just
far from its asymptotic regime. Overriding tau and using the
fixed-composition plan (exactly m training and m update positions, with m a
multiple of the payload length so every update bit gets the same number of
repetitions) makes the feedback loop visible: blocks are accepted, KT
estimates arrive two accepted blocks late, and the rate follows C_emp.
With only ~20 repetitions per update bit an occasional bit error gets
through; when it corrupts the message-interval index the run decodes the
wrong interval, which the err column reports.

    python3 demos/desk_scale_protocol.py
"""

import math

from empcap import channels as ch
from empcap.protocol import SchemeParams, run_finite_horizon

N = 1 << 16


def main():
    canonical = SchemeParams(n=N)
    print(f"canonical: b={canonical.b} m={canonical.m} tau_d={canonical.tau_d:.3f}")
    rec = run_finite_horizon(canonical, ch.bsc(0.02), seeds=0)
    print(f"  discarded {rec.discarded_blocks}/{canonical.blocks} blocks, R_n={rec.rate}\n")

    desk = SchemeParams(n=N, a0=0.8, a1=math.log(680, N), tau_override=0.08,
                        family_mode="noise_sequence")
    print(f"desk scale: b={desk.b} m={desk.m} s={desk.s} tau_u={desk.tau_u} tau_d={desk.tau_d}")
    print(f"{'noise':<14} {'C_emp':>7} {'R_n':>7} {'gap':>7} {'err':>4} {'bit errs':>8}")
    for name, channel in [("clean", ch.clean(2)),
                          ("bsc 0.02", ch.bsc(0.02)),
                          ("fixed 0.05", ch.FixedCompositionNoise.with_fraction(N, 0.05)),
                          ("adversary .03", ch.StateConstrainedAdversary(0.03))]:
        rec = run_finite_horizon(desk, channel, seeds=1)
        print(f"{name:<14} {rec.emp_capacity:7.3f} {rec.rate:7.3f} {rec.gap:7.3f} "
              f"{int(rec.error):>4} {rec.update_bit_errors:>8}")


if __name__ == "__main__":
    main()
