"""Piecewise-constant posterior over [0, 1) and the Horstein iteration.

``Posterior`` is the immutable reference value used by the operation API and
the tests. The protocol drives one of two mutable engines with the same
semantics:

* ``ExactTracker``: rational endpoints, integer segment masses over a common
  denominator. Used to check the mass identities exactly.
* ``FastTracker``: fixed-point integer endpoints and normalized float masses.
  Segments whose mass falls below ``RETIRE`` at either edge of the support
  are frozen with zero mass, which keeps the working window small.

Segments are never merged, so a segment index is a function of the update
transcript alone. All intervals are half-open and a point sitting on a
partition boundary belongs to the cell on its right.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from itertools import accumulate
from typing import Sequence

from .core_types import Alphabet


@dataclass(frozen=True)
class BinaryInterval:
    depth: int
    index: int

    def __post_init__(self):
        if self.depth < 0 or not 0 <= self.index < (1 << self.depth):
            raise ValueError("index out of range for depth")

    @property
    def left(self) -> Fraction:
        return Fraction(self.index, 1 << self.depth)

    @property
    def right(self) -> Fraction:
        return Fraction(self.index + 1, 1 << self.depth)

    @property
    def length(self) -> Fraction:
        return Fraction(1, 1 << self.depth)

    def bits(self) -> str:
        return format(self.index, f"0{self.depth}b") if self.depth else ""

    def contains(self, theta) -> bool:
        return self.left <= theta < self.right


@dataclass(frozen=True)
class MessageInterval:
    left: Fraction
    right: Fraction
    segment_index: int


@dataclass(frozen=True)
class Posterior:
    """Density ``weight`` on each half-open segment ``[left, right)``."""

    alphabet: Alphabet
    segments: tuple

    def __post_init__(self):
        segs = tuple((Fraction(l), Fraction(r), Fraction(w)) for l, r, w in self.segments)
        if not segs or segs[0][0] != 0 or segs[-1][1] != 1:
            raise ValueError("segments must cover [0, 1)")
        for (l, r, w), nxt in zip(segs, segs[1:] + (None,)):
            if not l < r or w <= 0:
                raise ValueError("empty segment or nonpositive weight")
            if nxt is not None and nxt[0] != r:
                raise ValueError("segments are not contiguous")
        if sum(w * (r - l) for l, r, w in segs) != 1:
            raise ValueError("total mass is not 1")
        object.__setattr__(self, "segments", segs)

    @classmethod
    def uniform(cls, size: int = 2) -> "Posterior":
        return cls(Alphabet(size), ((Fraction(0), Fraction(1), Fraction(1)),))

    def __len__(self) -> int:
        return len(self.segments)

    def mass(self) -> Fraction:
        return sum(w * (r - l) for l, r, w in self.segments)

    def density_at(self, theta) -> Fraction:
        return self.segments[message_interval(self, theta).segment_index][2]


def partition_points(post: Posterior) -> list:
    """Points c_1..c_{|X|-1} with mass j/|X| to their left."""
    q = post.alphabet.size
    points = []
    cum = Fraction(0)
    segs = iter(post.segments)
    l, r, w = next(segs)
    for j in range(1, q):
        target = Fraction(j, q)
        while cum + w * (r - l) <= target:
            cum += w * (r - l)
            l, r, w = next(segs)
        points.append(l + (target - cum) / w)
    return points


def _check_theta(theta):
    if not 0 <= theta < 1:
        raise ValueError(f"message point {theta} outside [0, 1)")


def encode_symbol(post: Posterior, theta) -> int:
    _check_theta(theta)
    return bisect_right(partition_points(post), theta)


def _check_estimates(estimates, q):
    if len(estimates) != q:
        raise ValueError("one estimate per symbol required")
    if any(e <= 0 for e in estimates) or sum(estimates) != 1:
        raise ValueError("estimates must be positive and sum to 1")


def horstein_update(post: Posterior, y: int, estimates: Sequence) -> Posterior:
    q = post.alphabet.size
    estimates = [Fraction(e) for e in estimates]
    _check_estimates(estimates, q)
    points = partition_points(post)
    out = []
    for l, r, w in post.segments:
        cuts = [l] + [c for c in points if l < c < r] + [r]
        for a, b in zip(cuts, cuts[1:]):
            cell = bisect_right(points, a)
            out.append((a, b, w * q * estimates[(y - cell) % q]))
    return Posterior(post.alphabet, tuple(out))


def message_interval(post: Posterior, theta) -> MessageInterval:
    _check_theta(theta)
    lefts = [s[0] for s in post.segments]
    i = bisect_right(lefts, theta) - 1
    l, r, _ = post.segments[i]
    return MessageInterval(l, r, i)


def interval_by_index(post: Posterior, index: int) -> tuple:
    if not 0 <= index < len(post.segments):
        raise IndexError(f"segment index {index} out of range")
    l, r, _ = post.segments[index]
    return l, r


def _pair(left: Fraction, right: Fraction) -> tuple:
    """Depth and left-member index of the covering pair of dyadic intervals."""
    left, right = Fraction(left), Fraction(right)
    if not 0 <= left < right <= 1:
        raise ValueError("target must satisfy 0 <= left < right <= 1")
    size = right - left
    # largest L with 2^-L >= size
    depth = (size.denominator // size.numerator).bit_length() - 1
    if depth == 0:
        return 0, 0
    i = (left.numerator << depth) // left.denominator
    if i + 1 == 1 << depth:
        i -= 1
    return depth, i


def decode_binary_interval(target: tuple, ambiguity_bit: int) -> BinaryInterval:
    depth, i = _pair(*target)
    if depth == 0:
        return BinaryInterval(0, 0)
    return BinaryInterval(depth, i + (1 if ambiguity_bit else 0))


def ambiguity_bit(target: tuple, theta) -> int:
    left, right = target
    if not left <= theta < right:
        raise ValueError("message point outside the target interval")
    depth, i = _pair(left, right)
    if depth == 0:
        return 0
    return int(theta >= Fraction(i + 1, 1 << depth))


class ExactTracker:
    """Mutable exact engine.

    True segment masses are ``masses[i] / total``; splits keep ``total``
    divisible by |X| so the quantile targets stay integers.
    """

    exact = True

    def __init__(self, size: int):
        self.size = size
        self.lefts = [Fraction(0)]
        self.masses = [1]
        self.total = 1
        self._plan = None

    # message points are kept as Fractions
    def embed(self, theta) -> Fraction:
        theta = Fraction(theta)
        _check_theta(theta)
        return theta

    @property
    def segment_count(self) -> int:
        return len(self.lefts)

    def _right(self, i: int) -> Fraction:
        return self.lefts[i + 1] if i + 1 < len(self.lefts) else Fraction(1)

    def _prepare(self):
        if self._plan is not None:
            return self._plan
        q = self.size
        if self.total % q:
            self.masses = [m * q for m in self.masses]
            self.total *= q
        cum = list(accumulate(self.masses))
        splits = []
        for j in range(1, q):
            t = j * self.total // q
            w = bisect_right(cum, t)
            before = cum[w - 1] if w else 0
            splits.append((w, t - before))
        points = []
        for w, part in splits:
            l = self.lefts[w]
            points.append(l + (self._right(w) - l) * Fraction(part, self.masses[w]) if part else l)
        self._plan = (splits, points)
        return self._plan

    def partition_points(self) -> list:
        return list(self._prepare()[1])

    def encode(self, theta) -> int:
        return bisect_right(self._prepare()[1], theta)

    def update(self, y: int, estimates: Sequence):
        q = self.size
        estimates = [Fraction(e) for e in estimates]
        splits, points = self._prepare()
        self._plan = None
        for (w, part), c in zip(reversed(splits), reversed(points)):
            if part:
                self.lefts.insert(w + 1, c)
                m = self.masses[w]
                self.masses[w:w + 1] = [part, m - part]
        starts = [0] + [bisect_left(self.lefts, c) for c in points] + [len(self.lefts)]
        gains = [q * estimates[(y - c) % q] for c in range(q)]
        den = math.lcm(*(g.denominator for g in gains))
        nums = [g.numerator * (den // g.denominator) for g in gains]
        masses = []
        for c in range(q):
            a = nums[c]
            masses.extend(m * a for m in self.masses[starts[c]:starts[c + 1]])
        self.masses = masses
        self.total *= den

    def mass(self) -> Fraction:
        return Fraction(sum(self.masses), self.total)

    def density_at(self, theta) -> Fraction:
        i = self.message_interval(theta).segment_index
        return Fraction(self.masses[i], self.total) / (self._right(i) - self.lefts[i])

    def message_interval(self, theta) -> MessageInterval:
        i = bisect_right(self.lefts, theta) - 1
        return MessageInterval(self.lefts[i], self._right(i), i)

    def interval_by_index(self, index: int) -> tuple:
        if not 0 <= index < len(self.lefts):
            raise IndexError(f"segment index {index} out of range")
        return self.lefts[index], self._right(index)

    def to_posterior(self) -> Posterior:
        segs = []
        for i, l in enumerate(self.lefts):
            r = self._right(i)
            segs.append((l, r, Fraction(self.masses[i], self.total) / (r - l)))
        return Posterior(Alphabet(self.size), tuple(segs))

    def snapshot(self):
        return (list(self.lefts), list(self.masses), self.total)

    def restore(self, snap):
        lefts, masses, total = snap
        self.lefts, self.masses, self.total = list(lefts), list(masses), total
        self._plan = None

    def snapshot_interval(self, snap, index: int) -> tuple:
        lefts = snap[0]
        index = min(max(index, 0), len(lefts) - 1)
        r = lefts[index + 1] if index + 1 < len(lefts) else Fraction(1)
        return lefts[index], r

    def snapshot_segment_count(self, snap) -> int:
        return len(snap[0])

    def state(self):
        return (tuple(self.lefts), tuple(self.masses), self.total)


RETIRE = 1e-60


class FastTracker:
    """Fixed-point endpoints (``frac_bits`` fractional bits) and float masses.

    Only a contiguous window of segments carries mass. Segments that drift
    below ``RETIRE`` at the window edges move to the left archive (kept in
    order) or the right archive (kept in reverse order) with zero mass.
    """

    exact = False

    def __init__(self, size: int, frac_bits: int):
        self.size = size
        self.F = frac_bits
        self.one = 1 << frac_bits
        self.la: list = []
        self.ra: list = []
        self.wl: list = [0]
        self.wm: list = [1.0]
        self._plan = None

    @classmethod
    def for_horizon(cls, size: int, n: int) -> "FastTracker":
        bits = math.ceil(n * math.log2(size)) + 64
        return cls(size, max(bits, 576))

    def embed(self, theta) -> int:
        theta = Fraction(theta)
        _check_theta(theta)
        return (theta.numerator << self.F) // theta.denominator

    def to_fraction(self, x: int) -> Fraction:
        return Fraction(x, self.one)

    @property
    def segment_count(self) -> int:
        return len(self.la) + len(self.wl) + len(self.ra)

    def _wright(self, w: int) -> int:
        if w + 1 < len(self.wl):
            return self.wl[w + 1]
        return self.ra[-1] if self.ra else self.one

    def _prepare(self):
        if self._plan is not None:
            return self._plan
        q = self.size
        wm = self.wm
        cum = list(accumulate(wm))
        total = cum[-1]
        last = len(wm) - 1
        splits = []
        points = []
        for j in range(1, q):
            t = j * total / q
            w = min(bisect_right(cum, t), last)
            before = cum[w - 1] if w else 0.0
            m = wm[w]
            frac = (t - before) / m if m > 0 else 0.0
            l = self.wl[w]
            off = 0
            if frac >= 1.0:
                # rounding pushed the target past this segment
                splits.append((w, 0.0))
                points.append(self._wright(w))
                continue
            if frac > 0.0:
                mant, exp = math.frexp(frac)
                length = self._wright(w) - l
                off = (int(mant * 9007199254740992) * length) >> (53 - exp)
            splits.append((w, frac if off else 0.0))
            points.append(l + off)
        self._plan = (splits, points, total)
        return self._plan

    def partition_points(self) -> list:
        return [Fraction(c, self.one) for c in self._prepare()[1]]

    def encode(self, theta: int) -> int:
        return bisect_right(self._prepare()[1], theta)

    def update(self, y: int, estimates: Sequence[float]):
        q = self.size
        splits, points, total = self._prepare()
        self._plan = None
        wl, wm = self.wl, self.wm
        for (w, frac), c in zip(reversed(splits), reversed(points)):
            if frac:
                wl.insert(w + 1, c)
                m = wm[w]
                a = m * frac
                wm[w:w + 1] = [a, m - a]
        gains = [q * estimates[(y - c) % q] / total for c in range(q)]
        if q == 2:
            s = bisect_left(wl, points[0])
            g0, g1 = gains
            if g0 == 1.0 and g1 == 1.0:
                pass
            else:
                wm = [m * g0 for m in wm[:s]] + [m * g1 for m in wm[s:]]
        else:
            starts = [0] + [bisect_left(wl, c) for c in points] + [len(wl)]
            new = []
            for c in range(q):
                g = gains[c]
                new.extend(m * g for m in wm[starts[c]:starts[c + 1]])
            wm = new
        # retire negligible edge segments, never the whole window
        k = 0
        while k < len(wm) - 1 and wm[k] < RETIRE:
            k += 1
        if k:
            self.la.extend(wl[:k])
            del wl[:k]
            del wm[:k]
        k = 0
        while k < len(wm) - 1 and wm[-1 - k] < RETIRE:
            k += 1
        if k:
            self.ra.extend(reversed(wl[-k:]))
            del wl[-k:]
            del wm[-k:]
        self.wm = wm

    def mass(self) -> float:
        return math.fsum(self.wm)

    def log2_density_at(self, theta: int) -> float:
        """log2 of the posterior density on the segment containing ``theta``."""
        i = self.message_interval(theta).segment_index - len(self.la)
        if not 0 <= i < len(self.wl) or self.wm[i] <= 0:
            return -math.inf
        length = self._wright(i) - self.wl[i]
        return math.log2(self.wm[i] / math.fsum(self.wm)) - (math.log2(length) - self.F)

    # segment lookups over (left archive, window, reversed right archive)
    def _left_of(self, i: int, la: int, wl: list, ra: int) -> int:
        if i < la:
            return self.la[i]
        i -= la
        if i < len(wl):
            return wl[i]
        return self.ra[ra - 1 - (i - len(wl))]

    def _interval(self, i: int, la: int, wl: list, ra: int) -> tuple:
        count = la + len(wl) + ra
        l = self._left_of(i, la, wl, ra)
        r = self._left_of(i + 1, la, wl, ra) if i + 1 < count else self.one
        return l, r

    def message_interval(self, theta: int) -> MessageInterval:
        la, ra, wl = len(self.la), len(self.ra), self.wl
        if theta < wl[0]:
            i = bisect_right(self.la, theta) - 1
        elif ra and theta >= self.ra[-1]:
            # ra is descending: count entries <= theta
            lo, hi = 0, ra
            while lo < hi:
                mid = (lo + hi) // 2
                if self.ra[mid] <= theta:
                    hi = mid
                else:
                    lo = mid + 1
            i = la + len(wl) + (ra - lo) - 1
        else:
            i = la + bisect_right(wl, theta) - 1
        l, r = self._interval(i, la, wl, ra)
        return MessageInterval(Fraction(l, self.one), Fraction(r, self.one), i)

    def interval_by_index(self, index: int) -> tuple:
        if not 0 <= index < self.segment_count:
            raise IndexError(f"segment index {index} out of range")
        l, r = self._interval(index, len(self.la), self.wl, len(self.ra))
        return Fraction(l, self.one), Fraction(r, self.one)

    def snapshot(self):
        return (len(self.la), len(self.ra), list(self.wl), list(self.wm))

    def restore(self, snap):
        la, ra, wl, wm = snap
        del self.la[la:]
        del self.ra[ra:]
        self.wl, self.wm = list(wl), list(wm)
        self._plan = None

    def snapshot_segment_count(self, snap) -> int:
        return snap[0] + len(snap[2]) + snap[1]

    def snapshot_interval(self, snap, index: int) -> tuple:
        la, ra, wl, _ = snap
        index = min(max(index, 0), la + len(wl) + ra - 1)
        l, r = self._interval(index, la, wl, ra)
        return Fraction(l, self.one), Fraction(r, self.one)

    def state(self):
        return (tuple(self.la), tuple(self.ra), tuple(self.wl), tuple(self.wm))
