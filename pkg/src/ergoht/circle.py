"""Exact points, interval unions and certified signs on the unit circle.

The observable throughout is f = 2*chi_U - 1 for a finite union U of
half-open intervals [l, r) with total measure exactly 1/2, so f takes
values in {+1, -1}.  Orbit points x + n*alpha are handled either exactly
(rational test mode) or through rational enclosures derived from
continued-fraction convergents, refined until the sign is certified.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .cf import CFNumber
from .errors import MeasureError

# eval_sign result when an enclosure straddles an interval endpoint
UNDETERMINED = 0

AlphaLike = Union[CFNumber, Fraction]


def frac_mod1(x: Fraction) -> Fraction:
    return x - (x.numerator // x.denominator)


def distance_to_zero(p: Fraction) -> Fraction:
    """Distance from p to 0 on the circle: min({p}, 1-{p}), in [0, 1/2]."""
    r = frac_mod1(p)
    return min(r, 1 - r)


@dataclass(frozen=True)
class UnitPoint:
    """An exact rational point of the circle [0, 1)."""

    value: Fraction

    def __post_init__(self):
        if not (0 <= self.value < 1):
            raise ValueError("UnitPoint must lie in [0,1); use UnitPoint.mod1")

    @classmethod
    def mod1(cls, x) -> "UnitPoint":
        return cls(frac_mod1(Fraction(x)))

    @classmethod
    def zero(cls) -> "UnitPoint":
        return cls(Fraction(0))


@dataclass(frozen=True)
class PointEnclosure:
    """Rational interval [lo, hi] of width < 1, interpreted mod 1.

    The enclosed true point is strictly interior unless the enclosure is
    degenerate (lo == hi), which encodes an exactly known point.
    """

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.hi < self.lo or self.hi - self.lo >= 1:
            raise ValueError("PointEnclosure needs lo <= hi < lo + 1")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def pieces(self) -> list[tuple[Fraction, Fraction]]:
        """The enclosure as 1 or 2 subintervals of [0, 1)."""
        lo = frac_mod1(self.lo)
        hi = lo + self.width
        if hi <= 1:
            return [(lo, hi)]
        return [(lo, Fraction(1)), (Fraction(0), hi - 1)]


class IntervalUnion:
    """U = union of B half-open intervals [l, r) with m(U) exactly 1/2.

    Endpoints are rationals in [0, 1); `r` may also be 1 for a final
    interval, and r < l denotes a single interval wrapping through 0.
    A wrapping interval counts once toward B (it has two endpoints, like
    any other interval), but is split into two pieces internally.
    The measure-1/2 invariant is validated exactly at construction;
    failing unions are rejected, never renormalized.
    """

    __slots__ = ("_intervals", "_pieces", "_bounds", "_inside")

    def __init__(self, intervals: Sequence[tuple[Fraction, Fraction]]):
        ivs = []
        for l, r in intervals:
            l, r = Fraction(l), Fraction(r)
            if not (0 <= l < 1):
                raise ValueError(f"left endpoint {l} outside [0,1)")
            if not (0 < r <= 1):
                raise ValueError(f"right endpoint {r} outside (0,1]")
            if l == r or (l == 0 and r == 1):
                raise ValueError("intervals must be proper and nonempty")
            ivs.append((l, r))
        if not ivs:
            raise ValueError("at least one interval required")
        self._intervals = tuple(ivs)

        pieces = []
        for l, r in ivs:
            if l < r:
                pieces.append((l, r))
            else:  # wraps through 0
                pieces.append((l, Fraction(1)))
                pieces.append((Fraction(0), r))
        pieces.sort()
        for (l1, r1), (l2, r2) in zip(pieces, pieces[1:]):
            if r1 > l2:
                raise ValueError("intervals must be pairwise disjoint")
        self._pieces = tuple(pieces)

        measure = sum((r - l for l, r in pieces), Fraction(0))
        if measure != Fraction(1, 2):
            raise MeasureError(f"m(U) must be exactly 1/2, got {measure}")

        # partition of [0,1) into alternating inside/outside segments
        bounds = [Fraction(0)]
        inside = []
        cursor = Fraction(0)
        for l, r in self._pieces:
            if l > cursor:
                inside.append(False)
                bounds.append(l)
            elif l < cursor:
                raise AssertionError("pieces not disjoint")
            inside.append(True)
            if r < 1:
                bounds.append(r)
            cursor = r
        if cursor < 1:
            inside.append(False)
        self._bounds = tuple(bounds)
        self._inside = tuple(inside)

    # -- structure -------------------------------------------------------------

    @property
    def intervals(self) -> tuple[tuple[Fraction, Fraction], ...]:
        return self._intervals

    @property
    def B(self) -> int:
        return len(self._intervals)

    @property
    def pieces(self) -> tuple[tuple[Fraction, Fraction], ...]:
        return self._pieces

    def segments(self) -> tuple[tuple[Fraction, ...], tuple[bool, ...]]:
        """Partition of [0,1): segment starts and their inside flags."""
        return self._bounds, self._inside

    def min_gap(self) -> Fraction:
        """Length of the shortest inside/outside segment."""
        bounds = list(self._bounds) + [Fraction(1)]
        return min(b - a for a, b in zip(bounds, bounds[1:]))

    # -- evaluation ------------------------------------------------------------

    def contains(self, x) -> bool:
        v = x.value if isinstance(x, UnitPoint) else frac_mod1(Fraction(x))
        i = _bisect_frac(self._bounds, v)
        return self._inside[i]

    def sign(self, x) -> int:
        return 1 if self.contains(x) else -1

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> str:
        return json.dumps(
            {"intervals": [[_frac_str(l), _frac_str(r)] for l, r in self._intervals]}
        )

    @classmethod
    def from_json(cls, text: str) -> "IntervalUnion":
        data = json.loads(text)
        return cls([(Fraction(l), Fraction(r)) for l, r in data["intervals"]])

    @classmethod
    def halfcircle(cls) -> "IntervalUnion":
        return cls([(Fraction(0), Fraction(1, 2))])

    @classmethod
    def quarters(cls) -> "IntervalUnion":
        return cls([(Fraction(0), Fraction(1, 4)), (Fraction(1, 2), Fraction(3, 4))])

    def __repr__(self) -> str:
        ivs = ", ".join(f"[{l},{r})" for l, r in self._intervals)
        return f"IntervalUnion({ivs})"


def _frac_str(x: Fraction) -> str:
    return str(x) if x.denominator > 1 else f"{x.numerator}"


def _bisect_frac(bounds: Sequence[Fraction], v: Fraction) -> int:
    """Index of the partition segment containing v (bounds[0] == 0)."""
    lo, hi = 0, len(bounds)
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if bounds[mid] <= v:
            lo = mid
        else:
            hi = mid
    return lo


def eval_sign(U: IntervalUnion, e: PointEnclosure) -> int:
    """+1 if e lies wholly inside U, -1 if wholly outside, else UNDETERMINED.

    A nondegenerate enclosure is treated as the open interval (lo, hi)
    because the true point is strictly interior, so an enclosure touching a
    segment endpoint is still decided.
    """
    if e.is_point:
        return U.sign(UnitPoint(frac_mod1(e.lo)))
    bounds, inside = U.segments()
    verdict = None
    for lo, hi in e.pieces():
        if lo == hi:
            continue
        i = _bisect_frac(bounds, lo)
        seg_end = bounds[i + 1] if i + 1 < len(bounds) else Fraction(1)
        if hi > seg_end:
            return UNDETERMINED
        v = 1 if inside[i] else -1
        if verdict is None:
            verdict = v
        elif verdict != v:
            return UNDETERMINED
    return verdict if verdict is not None else UNDETERMINED


def orbit_point(alpha: AlphaLike, x: UnitPoint, n: int, k: int = 16) -> PointEnclosure:
    """Enclosure of x + n*alpha (mod 1) at convergent depth k.

    Rational alpha gives a degenerate (exact) enclosure; the depth argument
    is then ignored.  For CF alpha the width is |n| / (q_k q_{k+1}).
    """
    if isinstance(alpha, Fraction):
        v = frac_mod1(x.value + n * alpha)
        return PointEnclosure(v, v)
    if n == 0:
        return PointEnclosure(x.value, x.value)
    enc = alpha.enclose(k)
    a, b = n * enc.lo, n * enc.hi
    if a > b:
        a, b = b, a
    if b - a >= 1:
        raise ValueError(
            f"depth {k} enclosure too wide for n={n}; increase depth"
        )
    lo = x.value + a
    shift = lo.numerator // lo.denominator
    return PointEnclosure(lo - shift, x.value + b - shift)


def _depth_for(alpha: CFNumber, n: int, gap: Fraction) -> int:
    """Smallest cached-or-next depth whose enclosure width resolves `gap`."""
    k = 1
    target = abs(n) / gap  # need q_k q_{k+1} > target
    while alpha.q(k) * alpha.q(k + 1) <= target:
        k += 1
    return k


def sign_at(alpha: AlphaLike, x: UnitPoint, n: int, U: IntervalUnion, max_doublings: int = 64) -> int:
    """Certified sign of f(x + n*alpha), refining depth until decided.

    For irrational alpha and n != 0 termination is guaranteed: the orbit
    point can only coincide with an interval endpoint if alpha is rational.
    Digit exhaustion surfaces as DigitExhaustionError with the needed depth.
    """
    if isinstance(alpha, Fraction) or n == 0:
        return U.sign(UnitPoint(frac_mod1(x.value + (n * alpha if n else 0))))
    k = _depth_for(alpha, n, U.min_gap())
    for _ in range(max_doublings):
        s = eval_sign(U, orbit_point(alpha, x, n, k))
        if s != UNDETERMINED:
            return s
        k *= 2
    raise RuntimeError(f"sign at n={n} undecided after {max_doublings} refinements")


@dataclass(frozen=True)
class OrbitSegment:
    """The orbit points T^i(x) for i in [j1, j2] under rotation by alpha."""

    alpha: AlphaLike
    x: UnitPoint
    j1: int
    j2: int

    def __post_init__(self):
        if self.j1 > self.j2:
            raise ValueError("need j1 <= j2")

    @property
    def length(self) -> int:
        return self.j2 - self.j1 + 1


def segment_sum(seg: OrbitSegment, U: IntervalUnion) -> int:
    """s(segment) = sum of f over the orbit segment, an exact integer."""
    from .signs import sign_range

    signs = sign_range(seg.alpha, seg.x, U, seg.j1, seg.j2)
    return int(signs.sum())
