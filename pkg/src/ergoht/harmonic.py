"""Exact and certified harmonic-sum machinery.

Two regimes:

* desk scale -- partial sums of 1/j are computed as exact rationals by
  balanced (tree) summation;
* astronomical scale -- H_n is enclosed by the Euler-Maclaurin expansion
  H_n = ln n + gamma + 1/(2n) - 1/(12 n^2) + r,  0 < r < 1/(120 n^4),
  evaluated in MPFR with directed rounding, which yields exact rational
  two-sided bounds at any requested precision.

The astronomical regime is what makes "least N with a harmonic excess"
searchable when N has on the order of a million digits.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import gmpy2

# Above this index, exact rational partial sums are no longer attempted.
EXACT_H_LIMIT = 200_000

_EULER_CACHE: dict[int, tuple[Fraction, Fraction]] = {}


def rational_sum(terms: Sequence[Fraction]) -> Fraction:
    """Sum fractions with a balanced tree to keep denominators tame."""
    items = list(terms)
    if not items:
        return Fraction(0)
    while len(items) > 1:
        nxt = [items[i] + items[i + 1] for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


def hsum_exact(a: int, b: int) -> Fraction:
    """Exact sum of 1/j for j in [a, b] (0 when a > b)."""
    if a > b:
        return Fraction(0)
    if a < 1:
        raise ValueError("harmonic indices start at 1")
    if b > EXACT_H_LIMIT + 2_000_000:
        raise ValueError(f"exact harmonic sum to {b} is not tractable")
    return _hsum_split(a, b)


def _hsum_split(a: int, b: int) -> Fraction:
    if b - a < 32:
        return rational_sum([Fraction(1, j) for j in range(a, b + 1)])
    mid = (a + b) // 2
    return _hsum_split(a, mid) + _hsum_split(mid + 1, b)


def _down(prec: int):
    return gmpy2.context(precision=prec, round=gmpy2.RoundDown)


def _up(prec: int):
    return gmpy2.context(precision=prec, round=gmpy2.RoundUp)


def _euler_gamma_mpfr(prec: int):
    """Directed mpfr bounds on Euler's gamma at `prec` bits (cached).

    const_euler is correctly rounded, so the RoundDown value plus one ulp
    bounds the constant from above; one evaluation suffices.
    """
    hit = _EULER_CACHE.get(prec)
    if hit is not None:
        return hit
    with _down(prec):
        lo = gmpy2.const_euler()
    hi = gmpy2.next_above(lo)
    _EULER_CACHE[prec] = (lo, hi)
    return lo, hi


def _frac_mpfr_bounds(x: Fraction, prec: int):
    """Directed mpfr bounds on an exact rational."""
    with _down(prec):
        lo = gmpy2.mpfr(x.numerator) / gmpy2.mpfr(x.denominator)
    with _up(prec):
        hi = gmpy2.mpfr(x.numerator) / gmpy2.mpfr(x.denominator)
    return lo, hi


def _log_mpfr_bounds(n: int, prec: int):
    with _down(prec):
        lo = gmpy2.log(gmpy2.mpfr(n))  # operand rounded down, log rounded down
    with _up(prec):
        hi = gmpy2.log(gmpy2.mpfr(n))
    return lo, hi


def _inv_lo(m: int, prec: int):
    """mpfr lower bound on 1/m."""
    with _up(prec):
        d = gmpy2.mpfr(m)
    with _down(prec):
        return 1 / d


def _inv_hi(m: int, prec: int):
    """mpfr upper bound on 1/m."""
    with _down(prec):
        d = gmpy2.mpfr(m)
    with _up(prec):
        return 1 / d


def _harmonic_mpfr_bounds(n: int, prec: int):
    """Directed mpfr bounds on H_n via Euler-Maclaurin; n may be huge.

    H_n = ln n + gamma + 1/(2n) - 1/(12 n^2) + r with 0 < r < 1/(120 n^4);
    every operation runs under a directed-rounding context, so no exact
    big-rational arithmetic is ever needed.
    """
    ln_lo, ln_hi = _log_mpfr_bounds(n, prec)
    g_lo, g_hi = _euler_gamma_mpfr(prec)
    corr_hi = _inv_hi(12 * n * n, prec)
    with _up(prec):
        hi = ln_hi + g_hi + _inv_hi(2 * n, prec)  # alternating tail is negative
    with _down(prec):
        lo = ln_lo + g_lo + _inv_lo(2 * n, prec) - corr_hi
    return lo, hi


def harmonic_bounds(n: int, prec: int = 128) -> tuple[Fraction, Fraction]:
    """Certified two-sided rational bounds on H_n for any positive integer."""
    if n < 1:
        raise ValueError("H_n needs n >= 1")
    if n <= 64:
        h = hsum_exact(1, n)
        return h, h
    lo, hi = _harmonic_mpfr_bounds(n, prec)
    return Fraction(*lo.as_integer_ratio()), Fraction(*hi.as_integer_ratio())


def harmonic_excess_bounds(kappa: int, n: int, prec: int = 128) -> tuple[Fraction, Fraction]:
    """Certified bounds on sum_{m=1}^{n} 1/(m + kappa + 1)."""
    base = hsum_exact(1, kappa + 1)
    lo, hi = harmonic_bounds(n + kappa + 1, prec)
    return lo - base, hi - base


def harmonic_excess_exact(kappa: int, n: int) -> Fraction:
    """Exact sum_{m=1}^{n} 1/(m + kappa + 1); desk scale only."""
    return hsum_exact(kappa + 2, n + kappa + 1)


def least_harmonic_excess(kappa: int, target: Fraction) -> int:
    """Least N >= 1 with sum_{m=1}^{N} 1/(m + kappa + 1) > target.

    Desk-scale answers are found by bisection with exact tie-breaking.
    Astronomical answers (N with up to millions of digits) are found by
    inverting the Euler-Maclaurin expansion with directed rounding,
    escalating precision until consecutive candidates are certified on
    opposite sides of the target.
    """
    if kappa < 0:
        raise ValueError("kappa must be >= 0")
    if _excess_gt(kappa, 1, target):
        return 1

    # target for H_M with M = N + kappa + 1
    r2 = target + hsum_exact(1, kappa + 1)
    if _frac_to_float(r2) < math.log(EXACT_H_LIMIT):
        return _least_excess_bisect(kappa, target)
    return _least_excess_certified(kappa, r2) - kappa - 1


def _frac_to_float(x: Fraction) -> float:
    try:
        return float(x)
    except OverflowError:
        return math.inf


def _excess_gt(kappa: int, n: int, target: Fraction) -> bool:
    """Decide sum_{m<=n} 1/(m+kappa+1) > target; exact only when needed."""
    if n + kappa + 1 > 64:
        b_lo, b_hi = harmonic_excess_bounds(kappa, n, 256)
        if b_lo > target:
            return True
        if b_hi <= target:
            return False
    return harmonic_excess_exact(kappa, n) > target


def _least_excess_bisect(kappa: int, target: Fraction) -> int:
    lo, hi = 1, 2
    while not _excess_gt(kappa, hi, target):
        lo = hi
        hi *= 2
        if hi + kappa > 8 * EXACT_H_LIMIT:
            raise ValueError("harmonic target misclassified as desk scale")
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if _excess_gt(kappa, mid, target):
            hi = mid
        else:
            lo = mid
    return hi


def _least_excess_certified(kappa: int, r2: Fraction) -> int:
    """Least integer M with H_M > r2, for astronomically large M.

    Works entirely in directed-rounding mpfr; the only exact integers are
    the candidate M values themselves (around exp(r2 - gamma), so the
    precision must cover every digit of M plus a guard).
    """
    bits_estimate = int(_frac_to_float(r2) / math.log(2)) + 1
    prec = bits_estimate + 128
    m_min = kappa + 2  # smallest M corresponding to N = 1
    while True:
        g_lo, g_hi = _euler_gamma_mpfr(prec)
        r2_lo, r2_hi = _frac_mpfr_bounds(r2, prec)
        with _down(prec):
            t_lo = gmpy2.exp(r2_lo - g_hi)
        with _up(prec):
            t_hi = gmpy2.exp(r2_hi - g_lo)
        cand_lo = max(m_min, int(gmpy2.mpz(gmpy2.floor(t_lo))) - 2)
        cand_hi = int(gmpy2.mpz(gmpy2.ceil(t_hi))) + 2
        if cand_hi - cand_lo > 64:
            prec *= 2
            continue
        # Least m in the window certified above r2, with its predecessor
        # certified at or below; any undecided comparison escalates precision.
        found = None
        for m in range(cand_lo, cand_hi + 1):
            h_lo, h_hi = _harmonic_mpfr_bounds(m, prec)
            if h_lo > r2_hi:
                if m == m_min:
                    found = m
                else:
                    p_lo, p_hi = _harmonic_mpfr_bounds(m - 1, prec)
                    if p_hi <= r2_lo:
                        found = m
                    # p_lo > r2 cannot happen: the enclosure of t brackets
                    # the crossing, so predecessors in-window were checked
                break
            if h_hi <= r2_lo:
                continue
            break
        if found is not None:
            return found
        prec *= 2
