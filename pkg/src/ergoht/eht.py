"""Weighted ergodic sums, summation by parts, and the N* certificate.

The N* certificate makes the divergence argument effective: for a +-1
sequence whose normalized partial sums stay on one side of L/3 past N1,
the weighted sum must exceed A by index N*, where N* depends only on
(L, kappa, N1, A) and never on the particular sequence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import gmpy2
import numpy as np

from .cf import CFNumber
from .circle import IntervalUnion, UnitPoint
from .errors import WeightMismatchError
from .harmonic import (
    EXACT_H_LIMIT,
    harmonic_bounds,
    hsum_exact,
    least_harmonic_excess,
    rational_sum,
)
from .signs import sign_range

AlphaLike = Union[CFNumber, Fraction]


@dataclass(frozen=True)
class WeightScheme:
    """Positive non-increasing weights b_n; harmonic means 1/(n + kappa)."""

    kind: str
    kappa: int = 0
    fn: Optional[Callable[[int], Fraction]] = None

    @classmethod
    def harmonic(cls, kappa: int = 0) -> "WeightScheme":
        if kappa < 0:
            raise ValueError("kappa must be >= 0")
        return cls(kind="harmonic", kappa=kappa)

    @classmethod
    def custom(cls, fn: Callable[[int], Fraction]) -> "WeightScheme":
        return cls(kind="custom", fn=fn)

    def b(self, n: int) -> Fraction:
        if self.kind == "harmonic":
            return Fraction(1, n + self.kappa)
        value = Fraction(self.fn(n))
        if value <= 0:
            raise ValueError(f"weight b_{n} = {value} is not positive")
        return value


class PartialSumTrace:
    """Signs, counts and weighted partial sums over n = 1..N.

    Exact mode stores S_N as Fractions; certified mode stores two-sided
    128-bit bounds produced with directed rounding.  Counts s_N are always
    exact integers.  Traces are append-only; disjoint sub-ranges can be
    evaluated in parallel and merged with `merge_scan_stats`.
    """

    def __init__(self, weights: WeightScheme, signs: np.ndarray, exact: bool = True, prec: int = 128):
        self.weights = weights
        self.signs = signs
        self.N = len(signs)
        self.counts = np.cumsum(signs.astype(np.int64))
        self.exact = exact
        self.sums: Optional[list[Fraction]] = None
        self.sums_lo = None
        self.sums_hi = None
        if exact:
            acc = Fraction(0)
            sums = []
            for n in range(1, self.N + 1):
                acc += int(signs[n - 1]) * weights.b(n)
                sums.append(acc)
            self.sums = sums
        else:
            down = gmpy2.context(precision=prec, round=gmpy2.RoundDown)
            up = gmpy2.context(precision=prec, round=gmpy2.RoundUp)
            lo = gmpy2.mpfr(0)
            hi = gmpy2.mpfr(0)
            los, his = [], []
            for n in range(1, self.N + 1):
                b = weights.b(n)
                c = int(signs[n - 1])
                with down:
                    t_lo = gmpy2.mpfr(c * b.numerator) / gmpy2.mpfr(b.denominator)
                    lo = lo + t_lo
                with up:
                    t_hi = gmpy2.mpfr(c * b.numerator) / gmpy2.mpfr(b.denominator)
                    hi = hi + t_hi
                los.append(lo)
                his.append(hi)
            self.sums_lo = los
            self.sums_hi = his

    def S(self, n: int) -> Fraction:
        if not self.exact:
            raise WeightMismatchError("exact partial sums unavailable in certified mode")
        return self.sums[n - 1]

    def S_bounds(self, n: int) -> tuple[Fraction, Fraction]:
        if self.exact:
            v = self.sums[n - 1]
            return v, v
        return (
            Fraction(*self.sums_lo[n - 1].as_integer_ratio()),
            Fraction(*self.sums_hi[n - 1].as_integer_ratio()),
        )

    def rows(self):
        """Yield CSV rows (n, c_n, s_n, value columns)."""
        for n in range(1, self.N + 1):
            c = int(self.signs[n - 1])
            s = int(self.counts[n - 1])
            if self.exact:
                v = self.sums[n - 1]
                yield n, c, s, v.numerator, v.denominator
            else:
                lo, hi = self.S_bounds(n)
                yield n, c, s, repr(self.sums_lo[n - 1]), repr(self.sums_hi[n - 1])


def weighted_partial_sums(
    alpha: AlphaLike,
    x: UnitPoint,
    U: IntervalUnion,
    w: WeightScheme,
    N: int,
    mode: str = "exact",
) -> PartialSumTrace:
    """Trace of sum c_n b_n for n = 1..N with certified signs."""
    if N < 1:
        raise ValueError("N must be >= 1")
    signs = sign_range(alpha, x, U, 1, N)
    return PartialSumTrace(w, signs, exact=(mode == "exact"))


def summation_by_parts(trace: PartialSumTrace, kappa: int) -> tuple[Fraction, Fraction]:
    """Boundary and series terms of the Abel summation identity.

    For weights 1/(m+kappa), the weighted sum equals the boundary term
    s_N/(N+kappa+1) plus the series sum_{m<=N} s_m/((m+kappa)(m+kappa+1)),
    exactly; callers verify the identity against trace.S(N).
    """
    if trace.weights.kind != "harmonic" or trace.weights.kappa != kappa:
        raise WeightMismatchError(
            f"trace weights are {trace.weights.kind}(kappa={trace.weights.kappa}), need harmonic(kappa={kappa})"
        )
    if not trace.exact:
        raise WeightMismatchError("summation_by_parts needs an exact trace")
    N = trace.N
    boundary = Fraction(int(trace.counts[-1]), N + kappa + 1)
    series = rational_sum(
        [
            Fraction(int(trace.counts[m - 1]), (m + kappa) * (m + kappa + 1))
            for m in range(1, N + 1)
        ]
    )
    return boundary, series


# -- N* certificate -----------------------------------------------------------

# canonical rounding grid for the certified upper bound on E
_E_ROUND = 10**40


@dataclass(frozen=True)
class NStarCertificate:
    """Witness that |sum_{m<=Nstar} c_m/(m+kappa)| > A for admissible c.

    Admissible means s_n/(n+kappa) >= L/3 for all n > N1 (L > 0; mirrored
    for L < 0).  E is the exact value of sum_{m<=N1} m/((m+kappa)(m+kappa+1))
    when `e_is_exact`, otherwise a certified upper bound on it (rounding E
    up only enlarges N2, which preserves the guarantee).
    """

    L: Fraction
    kappa: int
    N1: int
    A: Fraction
    E: Fraction
    e_is_exact: bool
    N2: int
    Nstar: int

    def verify_digit(self, a: int, q: int) -> bool:
        return a * q > self.Nstar

    def to_json(self) -> str:
        return json.dumps(
            {
                "L": str(self.L),
                "kappa": self.kappa,
                "N1": str(self.N1),
                "A": str(self.A),
                "E": str(self.E),
                "E_is_exact": self.e_is_exact,
                "N2": str(self.N2),
                "Nstar": str(self.Nstar),
            },
            sort_keys=True,
        )


def e_term_sum(N1: int, kappa: int) -> Fraction:
    """Exact E = sum_{m=1}^{N1} m/((m+kappa)(m+kappa+1)); desk scale only."""
    if N1 + kappa + 1 > EXACT_H_LIMIT:
        raise ValueError("exact E not tractable at this N1")
    # m/((m+k)(m+k+1)) = 1/(m+k+1) - k*(1/(m+k) - 1/(m+k+1))
    h = hsum_exact(kappa + 2, N1 + kappa + 1)
    return h - kappa * (Fraction(1, kappa + 1) - Fraction(1, N1 + kappa + 1))


def _e_upper_bound(N1: int, kappa: int) -> Fraction:
    lo, hi = harmonic_bounds(N1 + kappa + 1, 192)
    base = hsum_exact(1, kappa + 1)
    e_hi = (hi - base) - kappa * (Fraction(1, kappa + 1) - Fraction(1, N1 + kappa + 1))
    # canonical deterministic rounding up
    return Fraction(-((-e_hi.numerator * _E_ROUND) // e_hi.denominator), _E_ROUND)


def compute_nstar(L, kappa: int, N1: int, A) -> NStarCertificate:
    """Certified N* for Corollary-style divergence pressure.

    N2 is the least integer with sum_{m<=N2} 1/(m+kappa+1) > (A+E)|3/L|,
    found by exact bisection at desk scale and by certified harmonic
    enclosures (Euler-Maclaurin with directed rounding) when N2 is
    astronomically large.  Nstar = max(N1, N2).
    """
    L = Fraction(L)
    A = Fraction(A)
    if L == 0:
        raise ValueError("L must be nonzero")
    if A <= 0:
        raise ValueError("A must be positive")
    if N1 < 1:
        raise ValueError("N1 must be >= 1")
    if kappa < 0:
        raise ValueError("kappa must be >= 0")
    if N1 + kappa + 1 <= EXACT_H_LIMIT:
        E = e_term_sum(N1, kappa)
        e_exact = True
    else:
        E = _e_upper_bound(N1, kappa)
        e_exact = False
    target = (A + E) * abs(Fraction(3) / L)
    N2 = least_harmonic_excess(kappa, target)
    return NStarCertificate(
        L=L, kappa=kappa, N1=N1, A=A, E=E, e_is_exact=e_exact, N2=N2, Nstar=max(N1, N2)
    )


# -- Cauchy-gap scanning ------------------------------------------------------


@dataclass(frozen=True)
class GapWitness:
    """A window [n1, n2] with |sum of c_n b_n| certifiably above threshold."""

    n1: int
    n2: int
    value_lo: Fraction  # certified lower bound on the absolute window sum
    kind: str  # "extremal" or "tau"


def _float_window_error(n_lo: int, n_hi: int, kappa: int) -> float:
    #  float64 prefix-sum error: |terms| sum is at most H ~ log, eps per op
    import math

    h = math.log(n_hi + kappa + 1) + 1
    return (n_hi - n_lo + 2) * h * 2.3e-16


def cauchy_gap_scan(
    alpha: AlphaLike,
    x: UnitPoint,
    U: IntervalUnion,
    w: WeightScheme,
    n_lo: int,
    n_hi: int,
    theta,
    breakpoints: Optional[Sequence[int]] = None,
) -> list[GapWitness]:
    """Windows inside [n_lo, n_hi] whose weighted sum exceeds theta.

    A single pass over prefix-sum extrema locates the maximal-gap window:
    a window with |sum| > theta exists iff max-min of prefix sums does.
    Reported values are certified lower bounds (float accumulation with a
    global error margin), so every reported witness is sound.  When
    `breakpoints` is given, the windows between consecutive breakpoints
    (the tau-segments of the divergence proof) are also reported.
    """
    theta = Fraction(theta)
    if theta < 0:
        raise ValueError("theta must be >= 0")
    if n_lo < 1:
        raise ValueError("scan range starts at n >= 1")
    signs = sign_range(alpha, x, U, n_lo, n_hi)
    if w.kind == "harmonic":
        weights = 1.0 / (np.arange(n_lo, n_hi + 1, dtype=np.float64) + w.kappa)
        err = _float_window_error(n_lo, n_hi, w.kappa)
    else:
        weights = np.array([float(w.b(n)) for n in range(n_lo, n_hi + 1)])
        err = float(sum(abs(w.b(n)) for n in range(n_lo, n_hi + 1))) * 2.3e-16 * (n_hi - n_lo + 2)
    terms = signs.astype(np.float64) * weights
    prefix = np.concatenate([[0.0], np.cumsum(terms)])

    witnesses: list[GapWitness] = []
    i_min = int(np.argmin(prefix))
    i_max = int(np.argmax(prefix))
    gap = prefix[i_max] - prefix[i_min]
    lo_bound = Fraction(max(gap - 2 * err, 0.0))
    if lo_bound > theta and i_min != i_max:
        a, b = sorted((i_min, i_max))
        witnesses.append(
            GapWitness(n1=n_lo + a, n2=n_lo + b - 1, value_lo=lo_bound, kind="extremal")
        )

    if breakpoints:
        pts = [n_lo - 1] + sorted(set(int(t) for t in breakpoints)) + [n_hi]
        for a, b in zip(pts, pts[1:]):
            if not (n_lo - 1 <= a < b <= n_hi):
                continue
            val = abs(prefix[b - n_lo + 1] - prefix[a - n_lo + 1])
            lo_b = Fraction(max(val - 2 * err, 0.0))
            if lo_b > theta:
                witnesses.append(GapWitness(n1=a + 1, n2=b, value_lo=lo_b, kind="tau"))
    return witnesses


def check_weight_condition(w: WeightScheme, N: int) -> tuple[Fraction, str]:
    """Finite-depth diagnostic of sum n*(b_n - b_{n+1}).

    Returns the exact partial sum to N and a trend hint ("growing" or
    "flat").  Harmonic-type weights give positive terms; no claim is made
    about the infinite limit.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    terms = [n * (w.b(n) - w.b(n + 1)) for n in range(1, N + 1)]
    partial = rational_sum(terms)
    half = rational_sum(terms[: N // 2])
    hint = "growing" if (partial - half) > partial / 10 else "flat"
    return partial, hint


def merge_scan_stats(left: tuple, right: tuple) -> tuple:
    """Associative merge of (sum, min_prefix, max_prefix) triples."""
    s1, mn1, mx1 = left
    s2, mn2, mx2 = right
    return (s1 + s2, min(mn1, s1 + mn2), max(mx1, s1 + mx2))
