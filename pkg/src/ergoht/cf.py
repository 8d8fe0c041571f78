"""Continued fractions with exact big-integer convergents.

All numbers handled here live in (0, 1) and are given by their continued
fraction digits [a_1 a_2 ...], a_i >= 1.  Convergents use the recurrence
q_n = a_n * q_{n-1} + q_{n-2} seeded with q_0 = 1, and the analogous
p-recurrence seeded with p_0 = 0 (so p_1/q_1 = 1/a_1).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import gmpy2

from .errors import DigitExhaustionError

# Digit rule: maps (cf, i) -> a_i, consulted only for i beyond the stored
# prefix and only after digits a_1..a_{i-1} have been materialized.
DigitRule = Callable[["CFNumber", int], int]


class CFNumber:
    """An irrational in (0,1) represented by its CF digit prefix.

    The convergent cache is append-only: digits are only ever appended, and
    each append extends the p/q lists in lockstep, which keeps the
    fundamental identity |p_k q_{k-1} - p_{k-1} q_k| = 1 checkable at all
    times.  Instances are safe for concurrent readers; extending digits is a
    single-writer operation.
    """

    __slots__ = ("_digits", "_p", "_q", "_rule")

    def __init__(self, digits: Iterable[int] = (), digit_rule: Optional[DigitRule] = None):
        self._digits: list[int] = []
        self._p: list[int] = [0]
        self._q: list[int] = [1]
        self._rule = digit_rule
        for a in digits:
            self.append_digit(a)
        if not self._digits and self._rule is None:
            raise ValueError("CFNumber needs at least one digit or a digit rule")

    # -- construction helpers -------------------------------------------------

    @classmethod
    def golden(cls) -> "CFNumber":
        """[1 1 1 ...], the golden-ratio fractional part (sqrt(5)-1)/2."""
        return cls([1], digit_rule=lambda cf, i: 1)

    @classmethod
    def sqrt2_fractional(cls) -> "CFNumber":
        """[2 2 2 ...] = sqrt(2) - 1, the fractional part of 1 + sqrt(2)."""
        return cls([2], digit_rule=lambda cf, i: 2)

    @classmethod
    def from_json(cls, text: str) -> "CFNumber":
        digits = json.loads(text)
        return cls([int(d) for d in digits])

    def to_json(self, depth: Optional[int] = None) -> str:
        """Serialize the known prefix as a JSON array of decimal strings."""
        digits = self._digits if depth is None else self._digits[:depth]
        return json.dumps([str(d) for d in digits])

    # -- digit access ----------------------------------------------------------

    def append_digit(self, a: int) -> None:
        a = int(a)
        if a < 1:
            raise ValueError(f"CF digit must be >= 1, got {a}")
        k = len(self._digits)
        self._digits.append(a)
        self._p.append(a * self._p[k] + (self._p[k - 1] if k >= 1 else 1))
        self._q.append(a * self._q[k] + (self._q[k - 1] if k >= 1 else 0))

    def ensure(self, n: int) -> None:
        """Materialize digits a_1..a_n, consulting the digit rule if any."""
        while len(self._digits) < n:
            if self._rule is None:
                raise DigitExhaustionError(needed=n, available=len(self._digits))
            self.append_digit(self._rule(self, len(self._digits) + 1))

    def digit(self, i: int) -> int:
        """a_i (1-based)."""
        if i < 1:
            raise IndexError("digit indices start at 1")
        self.ensure(i)
        return self._digits[i - 1]

    @property
    def known_digits(self) -> int:
        return len(self._digits)

    @property
    def digits(self) -> tuple[int, ...]:
        return tuple(self._digits)

    @property
    def extensible(self) -> bool:
        return self._rule is not None

    # -- convergents -----------------------------------------------------------

    def q(self, k: int) -> int:
        """Denominator q_k, k >= 0."""
        if k < 0:
            raise IndexError("q index must be >= 0")
        self.ensure(k)
        return self._q[k]

    def p(self, k: int) -> int:
        """Numerator p_k, k >= 0 (p_0 = 0)."""
        if k < 0:
            raise IndexError("p index must be >= 0")
        self.ensure(k)
        return self._p[k]

    def convergent(self, k: int) -> tuple[int, int]:
        return self.p(k), self.q(k)

    def convergents(self, n: int) -> list[tuple[int, int]]:
        """Exact (p_k, q_k) for k = 1..n."""
        self.ensure(n)
        return [(self._p[k], self._q[k]) for k in range(1, n + 1)]

    def convergent_value(self, k: int) -> Fraction:
        return Fraction(self.p(k), self.q(k))

    def enclose(self, k: int) -> "RationalEnclosure":
        """Open interval between the k-th and (k+1)-st convergents.

        Every irrational whose expansion starts with the known prefix lies
        strictly between consecutive convergents, so this encloses the whole
        cylinder of the prefix.  Width is exactly 1/(q_k q_{k+1}) because
        |p_{k+1} q_k - p_k q_{k+1}| = 1, and successive enclosures nest.
        """
        a = self.convergent_value(k)
        b = self.convergent_value(k + 1)
        lo, hi = (a, b) if a < b else (b, a)
        return RationalEnclosure(lo, hi)

    def estimate_type(self, depth: int) -> Fraction:
        """Finite-depth lower estimate of the approximation type.

        Returns max over k < depth (with q_k >= 2) of log q_{k+1} / log q_k,
        as a certified rational lower bound of that maximum.  The true type
        is undecidable from any finite prefix; this is a diagnostic only.
        """
        if depth < 3:
            raise ValueError("estimate_type needs depth >= 3")
        self.ensure(depth)
        best: Optional[Fraction] = None
        ctx_down = gmpy2.context(precision=128, round=gmpy2.RoundDown)
        ctx_up = gmpy2.context(precision=128, round=gmpy2.RoundUp)
        for k in range(1, depth):
            qk, qk1 = self._q[k], self._q[k + 1]
            if qk < 2:
                continue
            with ctx_down:
                num = gmpy2.log(gmpy2.mpfr(qk1))
            with ctx_up:
                den = gmpy2.log(gmpy2.mpfr(qk))
            ratio = Fraction(*num.as_integer_ratio()) / Fraction(*den.as_integer_ratio())
            if best is None or ratio > best:
                best = ratio
        if best is None:
            raise ValueError("no index with q_k >= 2 below requested depth")
        return best

    def all_q_odd(self, n: int) -> bool:
        """True iff q_1..q_n are all odd."""
        self.ensure(n)
        return all(self._q[k] % 2 == 1 for k in range(1, n + 1))

    def __repr__(self) -> str:
        shown = ",".join(str(d) for d in self._digits[:8])
        more = ",..." if (len(self._digits) > 8 or self._rule is not None) else ""
        return f"CFNumber([{shown}{more}])"


@dataclass(frozen=True)
class RationalEnclosure:
    """A nonempty open rational interval certified to contain a target."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("enclosure requires lo < hi")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x: Fraction) -> bool:
        return self.lo < x < self.hi

    def contains_interval(self, other: "RationalEnclosure") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi


@dataclass(frozen=True)
class CylinderSet:
    """All irrationals whose CF expansion starts with the given prefix."""

    prefix: tuple[int, ...]

    def __post_init__(self):
        if not self.prefix:
            raise ValueError("cylinder prefix must be nonempty")
        if any(a < 1 for a in self.prefix):
            raise ValueError("cylinder prefix digits must be >= 1")

    def hull(self) -> RationalEnclosure:
        """Smallest interval containing the cylinder.

        As a_{m+1} ranges over [1, oo) the value sweeps between p_m/q_m and
        the mediant (p_m + p_{m-1})/(q_m + q_{m-1}).
        """
        cf = CFNumber(self.prefix)
        m = len(self.prefix)
        a = Fraction(cf.p(m), cf.q(m))
        b = Fraction(cf.p(m) + cf.p(m - 1), cf.q(m) + cf.q(m - 1))
        lo, hi = (a, b) if a < b else (b, a)
        return RationalEnclosure(lo, hi)


def cf_value(prefix: Sequence[int]) -> Fraction:
    """Exact value of a finite continued fraction [a_1 ... a_n].

    Independent of the convergent recurrence; used as an oracle for it.
    """
    if not prefix:
        raise ValueError("empty prefix")
    val = Fraction(0)
    for a in reversed(prefix):
        val = Fraction(1, a + val)
    return val
