"""The universal feedback scheme: block plans, update payloads and runners.

A finite-horizon run is a sequence of blocks. Each block starts with an
optional active prefix (charged sync only), then ``b_p`` passive positions
typed training / update / regular by the shared plan. Regular positions run
the Horstein iteration with the committed KT estimates. At the end of the
block the receiver either discards it (state rewinds to the block start)
or accepts it and applies the update payload carried by the update
positions: the noise type over regular positions of the previously accepted
block, the message-interval index at the end of that block and one
ambiguity bit.

Both terminals run the same receiver code on the same data. By default the
transmitter's replica of the receiver state *is* the receiver state object;
``debug_sync=True`` keeps a separate replica and compares them every step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from .channels import Channel, DitheredChannel, empirical_capacity_of_array
from .core_types import Alphabet, linf_distance, scaled_from_counts, uniform
from .estimators import (KtEstimator, UpdateSchedule, assigned_probability, commit_counts,
                         observe)
from .posterior import (BinaryInterval, ExactTracker, FastTracker, ambiguity_bit,
                        decode_binary_interval)
from .core_types import SymbolSeq
from .seeding import TrialSeeds, random_message_point

REGULAR, TRAINING, UPDATE = 0, 1, 2

FAMILY_MODES = ("modulo_additive", "noise_sequence", "general_causal_dithered")


def _ceil_pow(x: float, a: float) -> int:
    # guard against x**a landing a hair above an exact integer
    v = x ** a
    r = round(v)
    return r if abs(v - r) < 1e-9 * max(1.0, v) else math.ceil(v)


@dataclass(frozen=True)
class SchemeParams:
    q: int = 2
    n: int = 1 << 14
    a0: float = 0.75
    a1: float = 0.5
    a2: float = 1 / 16
    sync_mode: str = "free"
    variant: str = "finite_horizon"
    family_mode: str = "modulo_additive"
    b0: int = 64
    a3: float = 3 / 8
    a4: float = 1 / 16
    arith: str = "fast"
    fill_symbol: int = 0
    genie_b: int = 1
    tau_override: float | None = None

    def __post_init__(self):
        if self.q < 2:
            raise ValueError("alphabet size must be >= 2")
        if self.sync_mode not in ("free", "charged"):
            raise ValueError(f"unknown sync mode {self.sync_mode!r}")
        if self.variant not in ("finite_horizon", "horizon_free"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.family_mode not in FAMILY_MODES:
            raise ValueError(f"unknown family mode {self.family_mode!r}")
        if self.arith not in ("fast", "exact"):
            raise ValueError(f"unknown arithmetic mode {self.arith!r}")

    @classmethod
    def horizon_free(cls, **kw) -> "SchemeParams":
        kw.setdefault("a1", 7 / 8)
        kw.setdefault("a2", 1 / 8)
        return cls(variant="horizon_free", **kw)

    # finite-horizon derived quantities
    @property
    def b(self) -> int:
        return _ceil_pow(self.n, self.a0)

    @property
    def m(self) -> int:
        return _ceil_pow(self.n, self.a1)

    @property
    def tau(self) -> float:
        if self.tau_override is not None:
            return self.tau_override
        return self.n ** -self.a2

    @property
    def tau_u(self) -> float:
        return 2 * self.tau

    @property
    def tau_d(self) -> float:
        return 5 * self.tau

    @property
    def s(self) -> int:
        return 2 * (self.q - 1) * self.n.bit_length()

    @property
    def b_a(self) -> int:
        return active_length(self.sync_mode, self.m, self.b)

    @property
    def b_p(self) -> int:
        return self.b - self.b_a

    @property
    def blocks(self) -> int:
        return self.n // self.b

    def payload_bits(self) -> int:
        return payload_size(self.q, self.b, self.n)

    def block_geometry(self, k: int, start: int = 0) -> "BlockGeometry":
        """Sizes for block k (1-based); ``start`` is the channel uses so far."""
        if self.variant == "finite_horizon":
            return BlockGeometry(k, self.b, self.m, self.tau, self.b_a, self.s,
                                 self.b, (self.n * (self.q - 1)).bit_length())
        bk = self.b0 + k
        mk = _ceil_pow(bk, self.a1)
        if 2 * mk > bk:
            mk = bk // 3
        tau = self.tau_override if self.tau_override is not None else bk ** -self.a2
        s = 2 * self.q * bk.bit_length()
        return BlockGeometry(k, bk, mk, tau, active_length(self.sync_mode, mk, bk), s,
                             bk, (start * (self.q - 1)).bit_length())

    def conditions(self) -> list:
        """(description, holds) pairs for the parameter conditions."""
        out = []
        if self.variant == "finite_horizon":
            out.append(("a1 < a0 < 1", self.a1 < self.a0 < 1))
            out.append(("a0 < 2(a1 - a2)", self.a0 < 2 * (self.a1 - self.a2)))
            out.append(("b <= n", self.b <= self.n))
            if self.sync_mode == "charged":
                out.append(("b_a < b (charged sync)", self.b_a < self.b))
            out.append(("2m <= b_p", 2 * self.m <= self.b_p))
            out.append(("payload fits in s bits", self.payload_bits() <= self.s))
        else:
            out.append(("max(1 - a1, a2) < a3(a1 - 1/2)",
                        max(1 - self.a1, self.a2) < self.a3 * (self.a1 - 0.5)))
            out.append(("a3 + a4 < 1/2", self.a3 + self.a4 < 0.5))
            out.append(("b0 >= 1", self.b0 >= 1))
        return out

    def check(self):
        """Raise ValueError naming the first violated condition.

        The asymptotic exponent conditions are reported by ``conditions`` but
        only the concrete feasibility ones are enforced here.
        """
        hard = ("b <= n", "b_a < b (charged sync)", "2m <= b_p", "payload fits in s bits")
        for name, ok in self.conditions():
            if not ok and name in hard:
                raise ValueError(f"infeasible parameters: {name} violated")
        return self


def active_length(sync_mode: str, m: int, b: int) -> int:
    if sync_mode == "free":
        return 0
    return 8 * m * (b - 1).bit_length()


def payload_size(q: int, base: int, n: int) -> int:
    """Bits for (type, message-interval index, ambiguity bit)."""
    return type_bits(q, base) + (n * (q - 1)).bit_length() + 1


def type_bits(q: int, base: int) -> int:
    return (base ** (q - 1) - 1).bit_length()


@dataclass(frozen=True)
class BlockGeometry:
    k: int
    b: int
    m: int
    tau: float
    b_a: int
    s: int
    base: int
    index_bits: int

    @property
    def b_p(self) -> int:
        return self.b - self.b_a

    @property
    def tau_u(self) -> float:
        return 2 * self.tau

    @property
    def tau_d(self) -> float:
        return 5 * self.tau


@dataclass
class BlockPlan:
    k: int
    b: int
    b_a: int
    types: np.ndarray
    gamma: np.ndarray
    m_t: int
    m_u: int
    m_r: int
    s: int
    m: int

    @property
    def b_p(self) -> int:
        return self.b - self.b_a


def plan_block(params: SchemeParams, k: int, rng: np.random.Generator,
               geometry: BlockGeometry | None = None) -> BlockPlan:
    g = geometry or params.block_geometry(k)
    q = params.q
    b_p, m = g.b_p, g.m
    alph = (q - 1) * g.s
    if params.family_mode == "noise_sequence":
        if 2 * m > b_p:
            raise ValueError("fixed-composition plan needs 2m <= b_p")
        types = np.zeros(b_p, dtype=np.int8)
        types[:m] = TRAINING
        types[m:2 * m] = UPDATE
        types = rng.permutation(types)
        # as even a split over the update alphabet as m allows
        gamma = rng.permutation(np.arange(m) % alph)
    else:
        u = rng.random(b_p)
        p = m / b_p
        types = np.where(u < p, TRAINING, np.where(u < 2 * p, UPDATE, REGULAR)).astype(np.int8)
        m_u = int(np.count_nonzero(types == UPDATE))
        gamma = rng.integers(0, alph, size=m_u)
    m_t = int(np.count_nonzero(types == TRAINING))
    m_u = int(np.count_nonzero(types == UPDATE))
    return BlockPlan(k, g.b, g.b_a, types, gamma, m_t, m_u, b_p - m_t - m_u, g.s, m)


def range_check(plan: BlockPlan, m: int | None = None) -> bool:
    """Accept iff both M_t and M_u lie in [ceil(m/2), 2m]."""
    m = plan.m if m is None else m
    lo, hi = (m + 1) // 2, 2 * m
    return lo <= plan.m_t <= hi and lo <= plan.m_u <= hi


def active_budget_bits(plan: BlockPlan, q: int) -> int:
    """Bits needed to describe Lambda's type, its index in the type class and Gamma."""
    b_p = plan.b_p
    type_bits_ = 2 * b_p.bit_length()
    log_multinomial = (math.lgamma(b_p + 1) - math.lgamma(plan.m_t + 1)
                       - math.lgamma(plan.m_u + 1) - math.lgamma(plan.m_r + 1)) / math.log(2)
    gamma_bits = plan.m_u * ((q - 1) * plan.s - 1).bit_length()
    return type_bits_ + math.ceil(log_multinomial - 1e-9) + gamma_bits


@dataclass(frozen=True)
class UpdatePayload:
    noise_type: tuple
    message_interval_index: int
    ambiguity_bit: int


def _to_bits(value: int, width: int) -> list:
    return [(value >> (width - 1 - i)) & 1 for i in range(width)]


def _from_bits(bits: Sequence[int]) -> int:
    v = 0
    for bit in bits:
        v = (v << 1) | int(bit)
    return v


def encode_payload(payload: UpdatePayload, q: int, base: int, index_bits: int, s: int) -> list:
    """MSB-first: mixed-radix type (first |X|-1 counts), index, bit, zero pad."""
    tb = type_bits(q, base)
    v = 0
    for c in payload.noise_type[:q - 1]:
        if not 0 <= c < base:
            raise ValueError("type count out of range for the radix")
        v = v * base + c
    bits = _to_bits(v, tb)
    if payload.message_interval_index >= 1 << index_bits:
        raise ValueError("message-interval index does not fit")
    bits += _to_bits(payload.message_interval_index, index_bits)
    bits.append(int(payload.ambiguity_bit))
    if len(bits) > s:
        raise ValueError(f"payload needs {len(bits)} bits but only {s} are available")
    return bits + [0] * (s - len(bits))


def decode_payload(bits: Sequence[int], q: int, base: int, index_bits: int,
                   regular_total: int) -> UpdatePayload:
    """Inverse of ``encode_payload``. The last type count is implied by
    ``regular_total``; an inconsistent decoded type clamps it to 0."""
    tb = type_bits(q, base)
    v = _from_bits(bits[:tb])
    digits = []
    for _ in range(q - 1):
        v, d = divmod(v, base)
        digits.append(d)
    # leftover value (only possible after bit errors) lands in the top digit
    digits[-1] += v * base
    counts = digits[::-1]
    counts.append(max(regular_total - sum(counts), 0))
    index = _from_bits(bits[tb:tb + index_bits])
    return UpdatePayload(tuple(counts), index, int(bits[tb + index_bits]))


def decode_update_bit(p_train, p_upd: Sequence, tau_u) -> int:
    """1 iff max_j ||p_train - p_upd_j||_inf > tau_u; equality decodes 0."""
    return int(max(linf_distance(p_train, p) for p in p_upd) > tau_u)


@dataclass
class BlockRecord:
    index: int
    start: int
    length: int
    accepted: bool
    reason: str
    train_distance: float
    m_t: int
    m_u: int
    m_r: int
    bit_errors: int = 0
    budget_bits: int = 0
    complete: bool = True


@dataclass
class TrialRecord:
    seed: int
    n: int
    rate: float
    emp_capacity: float
    error: bool
    discarded_blocks: int
    update_bit_errors: int
    blocks: list = field(default_factory=list)
    x: np.ndarray | None = None
    y: np.ndarray | None = None
    decoded: BinaryInterval | None = None
    theta: Fraction | None = None
    extra: dict = field(default_factory=dict)

    @property
    def gap(self) -> float:
        return self.emp_capacity - self.rate

    @property
    def z(self) -> np.ndarray:
        q = self.extra.get("q", 2)
        return (self.y.astype(np.int64) - self.x.astype(np.int64)) % q

    @property
    def accepted_blocks(self) -> int:
        return sum(1 for b in self.blocks if b.accepted)


class Terminal:
    """Receiver-side state; the transmitter holds an identical replica."""

    def __init__(self, params: SchemeParams, horizon: int):
        self.params = params
        q = params.q
        self.alphabet = Alphabet(q)
        if params.arith == "exact":
            self.tracker = ExactTracker(q)
        else:
            self.tracker = FastTracker.for_horizon(q, horizon)
        self.kt = KtEstimator(self.alphabet)
        self.last_accepted = None      # (block index, M_r) of the last accepted block
        self.last_interval = None      # last known message interval
        self.last_bit = 0
        self._snap = None
        self._est = None

    def begin_block(self):
        self._snap = (self.tracker.snapshot(), self.kt)
        if self.params.arith == "exact":
            self._est = list(self.kt.estimates())
        else:
            self._est = self.kt.float_estimates()

    @property
    def estimates(self):
        return self._est

    def regular(self, y: int):
        self.tracker.update(y, self._est)

    def discard(self):
        snap, kt = self._snap
        self.tracker.restore(snap)
        self.kt = kt

    def accept(self, plan: BlockPlan, payload: UpdatePayload | None):
        if self.last_accepted is not None and payload is not None:
            self.kt = commit_counts(self.kt, payload.noise_type)
            count = self.tracker.snapshot_segment_count(self._snap[0])
            idx = min(payload.message_interval_index, count - 1)
            self.last_interval = self.tracker.snapshot_interval(self._snap[0], idx)
            self.last_bit = payload.ambiguity_bit
        self.last_accepted = (plan.k, plan.m_r)

    def state(self):
        return (self.tracker.state(), self.kt, self.last_accepted, self.last_interval, self.last_bit)


def _receive_block(term: Terminal, plan: BlockPlan, geo: BlockGeometry, y_pass: np.ndarray,
                   q: int):
    """Block-end decisions from the received passive symbols.

    Returns (accepted, reason, train_distance, decoded_bits).
    """
    types = plan.types
    train = np.bincount(y_pass[types == TRAINING], minlength=q)
    p_train = scaled_from_counts(term.alphabet, train.tolist(), geo.m)
    dist = linf_distance(p_train, uniform(term.alphabet))
    if not range_check(plan, geo.m):
        return False, "range", dist, None
    if dist < geo.tau_d:
        return False, "uniform", dist, None
    yu = y_pass[types == UPDATE].astype(np.int64)
    rows = (q - 1) * geo.s
    table = np.bincount(plan.gamma.astype(np.int64) * q + yu, minlength=rows * q).reshape(rows, q)
    expected = Fraction(geo.m, rows)
    bits = []
    for i in range(geo.s):
        upd = [scaled_from_counts(term.alphabet, table[i + j * geo.s].tolist(), expected)
               for j in range(q - 1)]
        bits.append(decode_update_bit(p_train, upd, geo.tau_u))
    return True, "", dist, bits


class _Run:
    """Shared machinery of the finite-horizon and horizon-free runners."""

    def __init__(self, params: SchemeParams, channel: Channel, theta, seeds: TrialSeeds,
                 horizon: int, debug_sync: bool = False):
        self.params = params
        self.channel = channel
        self.seeds = seeds
        self.theta = Fraction(theta)
        self.rx = Terminal(params, horizon)
        # the transmitter's replica of the receiver
        self.tx = Terminal(params, horizon) if debug_sync else self.rx
        self.debug_sync = debug_sync
        self.theta_int = self.rx.tracker.embed(self.theta)
        self.xs: list = []
        self.ys: list = []
        self.blocks: list = []
        self.bit_errors = 0
        self.discarded = 0
        # transmitter memory: actual regular-position noise type per accepted block
        self.tx_last_type = None

    def _sync_check(self):
        if self.debug_sync and self.tx.state() != self.rx.state():
            raise AssertionError("transmitter replica diverged from the receiver")

    def block(self, geo: BlockGeometry, limit: int | None = None) -> BlockRecord:
        """Run one block; ``limit`` truncates it (horizon-free stop)."""
        params, q = self.params, self.params.q
        plan = plan_block(params, geo.k, self.seeds.protocol, geo)
        start = len(self.xs)
        for term in {id(self.rx): self.rx, id(self.tx): self.tx}.values():
            term.begin_block()
        tx = self.tx
        # payload fixed at block start from the transmitter's knowledge
        if tx.last_accepted is not None and self.tx_last_type is not None:
            mi = tx.tracker.message_interval(self.theta_int)
            payload = UpdatePayload(tuple(self.tx_last_type), mi.segment_index,
                                    ambiguity_bit((mi.left, mi.right), self.theta))
        else:
            payload = UpdatePayload((0,) * q, 0, 0)
        sent_bits = encode_payload(payload, q, geo.base, geo.index_bits, geo.s)

        ch = self.channel
        xs, ys = self.xs, self.ys
        fill = params.fill_symbol
        total = geo.b if limit is None else min(limit, geo.b)
        n_active = min(geo.b_a, total)
        for _ in range(n_active):
            xs.append(fill)
            ys.append(ch.step(fill))
        types = plan.types.tolist()
        gamma = plan.gamma.tolist()
        s = geo.s
        enc = tx.tracker.encode
        theta = self.theta_int
        rx_reg = self.rx.regular
        tx_reg = tx.regular if tx is not self.rx else None
        noise = [0] * q
        u = 0
        for t in types[:total - n_active]:
            if t == REGULAR:
                x = enc(theta)
                y = ch.step(x)
                rx_reg(y)
                if tx_reg is not None:
                    tx_reg(y)
                    self._sync_check()
                noise[(y - x) % q] += 1
            elif t == TRAINING:
                x = 0
                y = ch.step(0)
            else:
                g = gamma[u]
                u += 1
                x = (g // s) + 1 if sent_bits[g % s] else 0
                y = ch.step(x)
            xs.append(x)
            ys.append(y)
        if limit is not None and limit < geo.b:
            # stopped mid-block: no decision is ever taken on this block
            return BlockRecord(geo.k, start, total, False, "incomplete", math.nan,
                               plan.m_t, plan.m_u, plan.m_r, complete=False)

        y_pass = np.asarray(ys[start + geo.b_a:], dtype=np.int64)
        accepted, reason, dist, bits = _receive_block(self.rx, plan, geo, y_pass, q)
        rec = BlockRecord(geo.k, start, geo.b, accepted, reason, float(dist),
                          plan.m_t, plan.m_u, plan.m_r)
        if params.sync_mode == "charged" and range_check(plan, geo.m):
            rec.budget_bits = active_budget_bits(plan, q)
            assert rec.budget_bits <= geo.b_a, "active-position budget exceeded"
        if not accepted:
            self.discarded += 1
            for term in {id(self.rx): self.rx, id(self.tx): self.tx}.values():
                term.discard()
            self._sync_check()
            return rec
        rec.bit_errors = sum(a != b for a, b in zip(bits, sent_bits))
        self.bit_errors += rec.bit_errors
        prev_mr = self.rx.last_accepted[1] if self.rx.last_accepted else 0
        decoded = decode_payload(bits, q, geo.base, geo.index_bits, prev_mr)
        for term in {id(self.rx): self.rx, id(self.tx): self.tx}.values():
            term.accept(plan, decoded)
        self._sync_check()
        self.tx_last_type = noise
        return rec

    def finish(self, n: int, decoded: BinaryInterval, extra=None) -> TrialRecord:
        q = self.params.q
        x = np.asarray(self.xs, dtype=np.uint8)
        y = np.asarray(self.ys, dtype=np.uint8)
        z = (y.astype(np.int64) - x) % q
        error = not decoded.contains(self.theta)
        if error and self.bit_errors == 0:
            raise AssertionError("decoding error without any update decoding error")
        info = {"q": q}
        if extra:
            info.update(extra)
        return TrialRecord(self.seeds.seed, n, decoded.depth / n,
                           empirical_capacity_of_array(z, q), error, self.discarded,
                           self.bit_errors, self.blocks, x, y, decoded, self.theta, info)

    def final_decode(self) -> BinaryInterval:
        if self.rx.last_interval is None:
            return BinaryInterval(0, 0)
        return decode_binary_interval(self.rx.last_interval, self.rx.last_bit)


def _start(channel: Channel, seeds: TrialSeeds, theta):
    if isinstance(channel, DitheredChannel):
        channel.start(seeds.channel, theta, dither_rng=seeds.dither)
    else:
        channel.start(seeds.channel, theta)


def _seeds(seeds) -> TrialSeeds:
    if isinstance(seeds, TrialSeeds):
        return seeds
    return TrialSeeds.from_seed(int(seeds))


def default_message(seeds: TrialSeeds) -> Fraction:
    return random_message_point(seeds.message)


def run_finite_horizon(params: SchemeParams, channel: Channel, theta=None, seeds=0,
                       debug_sync: bool = False) -> TrialRecord:
    if params.variant != "finite_horizon":
        raise ValueError("finite-horizon runner needs variant=finite_horizon")
    params.check()
    seeds = _seeds(seeds)
    if theta is None:
        theta = default_message(seeds)
    _start(channel, seeds, theta)
    run = _Run(params, channel, theta, seeds, params.n, debug_sync)
    geo = params.block_geometry(1)
    for k in range(1, params.blocks + 1):
        run.blocks.append(run.block(replace(geo, k=k)))
    # leftover channel uses after the last full block carry nothing
    for _ in range(params.n - params.blocks * params.b):
        run.xs.append(params.fill_symbol)
        run.ys.append(channel.step(params.fill_symbol))
    return run.finish(params.n, run.final_decode())


def run_horizon_free(params: SchemeParams, channel: Channel, theta=None, stop_time: int = 1 << 14,
                     seeds=0, debug_sync: bool = False) -> TrialRecord:
    if params.variant != "horizon_free":
        raise ValueError("horizon-free runner needs variant=horizon_free")
    seeds = _seeds(seeds)
    if theta is None:
        theta = default_message(seeds)
    _start(channel, seeds, theta)
    run = _Run(params, channel, theta, seeds, stop_time, debug_sync)
    pos, k = 0, 0
    while pos < stop_time:
        k += 1
        geo = params.block_geometry(k, pos)
        if geo.b_a >= geo.b:
            raise ValueError(f"infeasible parameters: b_a < b violated in block {k}")
        if type_bits(params.q, geo.base) + geo.index_bits + 1 > geo.s:
            raise ValueError(f"payload does not fit in block {k}")
        rec = run.block(geo, limit=stop_time - pos)
        run.blocks.append(rec)
        pos += rec.length
    k_acc = run.rx.last_accepted[0] if run.rx.last_accepted else None
    rho = k ** params.a3
    if k_acc is None or k_acc < rho:
        decoded = BinaryInterval(0, 0)
    else:
        decoded = run.final_decode()
    return run.finish(stop_time, decoded, {"last_block": k, "last_accepted": k_acc, "rho": rho})


def run_dithered(params: SchemeParams, channel: Channel, theta=None, seeds=0,
                 debug_sync: bool = False, stop_time: int | None = None) -> TrialRecord:
    """Dithered run over a general causal channel.

    The shared control sequence is the free-sync i.i.d. plan (no active
    positions). The realized noise of the dithered pair equals that of the
    undithered pair, so ``emp_capacity`` is reported from (x, y).
    """
    params = replace(params, family_mode="general_causal_dithered", sync_mode="free")
    wrapped = channel if isinstance(channel, DitheredChannel) else DitheredChannel(channel)
    if params.variant == "horizon_free":
        return run_horizon_free(params, wrapped, theta, stop_time or params.n, seeds, debug_sync)
    return run_finite_horizon(params, wrapped, theta, seeds, debug_sync)


def floor_log2(x: Fraction) -> int:
    a, b = x.numerator, x.denominator
    e = a.bit_length() - b.bit_length()
    if e >= 0:
        return e if a >= b << e else e - 1
    return e if a << -e >= b else e - 1


def run_genie(params: SchemeParams, channel: Channel, theta=None, seeds=0) -> TrialRecord:
    """Horstein + KT(b) on every position, side information delivered free.

    The estimator commits every ``params.genie_b`` steps on the true noise.
    Asserts f_n(theta) = |X|^n p(z^n) exactly and the rate lower bound.
    """
    seeds = _seeds(seeds)
    if theta is None:
        theta = default_message(seeds)
    theta = Fraction(theta)
    _start(channel, seeds, theta)
    q, n = params.q, params.n
    tracker = ExactTracker(q)
    schedule = UpdateSchedule.every_b_steps(params.genie_b)
    kt = KtEstimator(Alphabet(q))
    xs, ys = [], []
    for _ in range(n):
        x = tracker.encode(theta)
        y = channel.step(x)
        tracker.update(y, kt.estimates())
        kt = observe(kt, (y - x) % q, schedule)
        xs.append(x)
        ys.append(y)
    z = [(b - a) % q for a, b in zip(xs, ys)]
    f = tracker.density_at(theta)
    p_hat = assigned_probability(SymbolSeq.of(z, q), schedule)
    if f != q ** n * p_hat:
        raise AssertionError("posterior identity f_n(theta) = |X|^n p(z^n) failed")
    mi = tracker.message_interval(theta)
    decoded = decode_binary_interval((mi.left, mi.right), ambiguity_bit((mi.left, mi.right), theta))
    rate = decoded.depth / n
    bound = (floor_log2(f) - 1) / n
    if rate < bound:
        raise AssertionError("decoded rate below the posterior-density bound")
    x = np.asarray(xs, dtype=np.uint8)
    y = np.asarray(ys, dtype=np.uint8)
    zz = np.asarray(z, dtype=np.int64)
    return TrialRecord(seeds.seed, n, rate, empirical_capacity_of_array(zz, q),
                       not decoded.contains(theta), 0, 0, [], x, y, decoded, theta,
                       {"q": q, "density": f, "p_hat": p_hat, "rate_bound": bound,
                        "interval_mass": f * (mi.right - mi.left),
                        "segments": tracker.segment_count})
