"""Exact discrepancy of Kronecker samples and the summation-by-parts route.

Discrepancy here is the extreme (two-sided) version: the sup over all
half-open intervals [a, b) of |count/N - (b-a)|.  For a finite sample the
sup is attained in the limit at candidate intervals whose endpoints are
sample points approached from either side, so it reduces to two exact
maximizations over the sorted sample:

  overcount:   max over i <= j of (j-i+1)/N - (x_j - x_i)   (closed [x_i, x_j])
  undercount:  max over i < j  of (x_j - x_i) - (j-i-1)/N   (open (x_i, x_j)),
               with 0 and 1 admitted as outer endpoints.

Both scans are O(N) after sorting; an O(N^2) brute force over candidate
endpoint pairs serves as the independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Optional, Sequence, Union

import numpy as np

from .cf import CFNumber
from .circle import IntervalUnion, UnitPoint, frac_mod1
from .eht import PartialSumTrace, WeightScheme, weighted_partial_sums
from .errors import DigitExhaustionError
from .harmonic import rational_sum
from .signs import sign_range

AlphaLike = Union[CFNumber, Fraction]


class PointSample:
    """x_n = x + n*alpha mod 1 for n = 1..N, exact or enclosed.

    Exact samples carry integer numerators over a common denominator T.
    Enclosure samples (irrational alpha) carry the lower endpoints plus a
    uniform width bound `slack`; they stay usable as long as the slack
    does not blur the sorted order or the candidate comparisons, and the
    reported discrepancy becomes a two-sided enclosure.
    """

    def __init__(self, numerators: np.ndarray, T: int, slack: int = 0):
        self.nums = np.asarray(numerators, dtype=np.int64)
        self.T = T
        self.slack = slack

    @property
    def N(self) -> int:
        return len(self.nums)

    @classmethod
    def from_rational(cls, alpha: Fraction, x: UnitPoint, N: int) -> "PointSample":
        T = lcm(alpha.denominator, x.value.denominator)
        a = (alpha.numerator % alpha.denominator) * (T // alpha.denominator)
        b = x.value.numerator * (T // x.value.denominator)
        ns = np.arange(1, N + 1, dtype=object)
        nums = np.array([(b + int(n) * a) % T for n in ns], dtype=np.int64)
        return cls(nums, T, slack=0)

    @classmethod
    def from_cf(cls, alpha: CFNumber, x: UnitPoint, N: int, depth: Optional[int] = None) -> "PointSample":
        """Enclosure sample at a depth fine enough to sort strictly."""
        b = x.value.denominator
        k = depth if depth is not None else 1
        if depth is None:
            # want width*N well under the typical spacing 1/N, within int64
            budget = (1 << 61) // b
            while alpha.q(k) * alpha.q(k + 1) <= 16 * N * N:
                try:
                    alpha.ensure(k + 2)
                except DigitExhaustionError:
                    break
                if alpha.q(k + 1) * alpha.q(k + 2) > budget:
                    break
                k += 1
        pk, qk = alpha.convergent(k)
        pk1, qk1 = alpha.convergent(k + 1)
        D = qk * qk1
        m = min(pk * qk1, pk1 * qk)
        T = b * D
        if T >= (1 << 62):
            raise ValueError("denominator too large for int64 sample; lower depth")
        base = x.value.numerator * D
        step = m * b
        nums = np.empty(N, dtype=np.int64)
        v = base % T
        for i in range(N):  # v grows by step mod T; all < T < 2^62
            v = (v + step) % T
            nums[i] = v
        return cls(nums, T, slack=N * b)

    def points(self) -> list[Fraction]:
        return [Fraction(int(v), self.T) for v in self.nums]


@dataclass(frozen=True)
class DiscrepancyReport:
    N: int
    d_lo: Fraction
    d_hi: Fraction
    witness_lo: Fraction
    witness_hi: Fraction
    witness_kind: str  # "closed" (overcount) or "open" (undercount)

    @property
    def exact(self) -> bool:
        return self.d_lo == self.d_hi

    @property
    def value(self) -> Fraction:
        if not self.exact:
            raise ValueError("discrepancy is an enclosure; use d_lo/d_hi")
        return self.d_lo


def discrepancy(sample: PointSample) -> DiscrepancyReport:
    """Extreme discrepancy of the sample, exact (or tightly enclosed)."""
    N, T = sample.N, sample.T
    order = np.argsort(sample.nums, kind="stable")
    xs = sample.nums[order]
    if sample.slack:
        gaps = np.diff(xs)
        if len(gaps) and int(gaps.min()) <= 2 * sample.slack:
            raise ValueError("point enclosures too wide to sort; refine the sample")

    # all values are over the common scale N*T
    x_scaled = xs.astype(object) * N

    # overcount: max_j [ (j/N - x_j) + max_{i<=j}(x_i - (i-1)/N) ]
    j_arr = np.arange(1, N + 1, dtype=object)
    v = j_arr * T - x_scaled          # (j/N - x_j) * N*T
    w = x_scaled - (j_arr - 1) * T    # (x_i - (i-1)/N) * N*T
    w_run = np.maximum.accumulate(w)
    over = v + w_run
    j_best = int(np.argmax(over))
    d_over = over[j_best]
    i_best = int(np.argmax(w[: j_best + 1]))

    # undercount: max_j [ (x_j - (j-1)/N) + max_{i<j}(i/N - x_i) ], with
    # virtual endpoints 0 (i = 0) and 1 (j = N+1)
    r = x_scaled - (j_arr - 1) * T            # (x_j - (j-1)/N) * N*T
    s = j_arr * T - x_scaled                  # (i/N - x_i) * N*T
    s_prev = np.concatenate([[0], s[:-1]])    # i = 0 admits value 0
    s_run = np.maximum.accumulate(s_prev)
    under = r + s_run
    j_under = int(np.argmax(under))
    d_under = under[j_under]
    # right endpoint = 1: value = max_i (i/N - x_i) + (1 - N/N)*scale
    s_all = np.maximum.accumulate(s)
    d_under_end = s_all[-1] + (N * T - N * T)  # = max_i s_i
    if d_under_end > d_under:
        d_under = d_under_end
        j_under = None
        i_under = int(np.argmax(s))
    else:
        i_under = int(np.argmax(s_prev[: j_under + 1])) - 1  # -1 signals endpoint 0

    if d_over >= d_under:
        d = Fraction(int(d_over), N * T)
        w_lo = Fraction(int(xs[i_best]), T)
        w_hi = Fraction(int(xs[j_best]), T)
        kind = "closed"
    else:
        d = Fraction(int(d_under), N * T)
        w_lo = Fraction(0) if i_under < 0 else Fraction(int(xs[i_under]), T)
        w_hi = Fraction(1) if j_under is None else Fraction(int(xs[j_under]), T)
        kind = "open"

    # extreme discrepancy is always >= 1/N (a single-point closed interval)
    pad = Fraction(2 * sample.slack, T)
    return DiscrepancyReport(
        N=N,
        d_lo=max(d - pad, Fraction(1, N)),
        d_hi=min(d + pad, Fraction(1)),
        witness_lo=w_lo,
        witness_hi=w_hi,
        witness_kind=kind,
    )


def brute_force_discrepancy(points: Sequence[Fraction]) -> Fraction:
    """O(N^2) candidate-endpoint maximization, the oracle for `discrepancy`."""
    xs = sorted(frac_mod1(Fraction(p)) for p in points)
    N = len(xs)
    best = Fraction(0)
    # overcount over closed [x_i, x_j]
    for i in range(N):
        for j in range(i, N):
            best = max(best, Fraction(j - i + 1, N) - (xs[j] - xs[i]))
    # undercount over open (a, b), a in {0} U points, b in points U {1}
    lefts = [Fraction(0)] + xs
    rights = xs + [Fraction(1)]
    for a in lefts:
        for b in rights:
            if b <= a:
                continue
            inside = sum(1 for x in xs if a < x < b)
            best = max(best, (b - a) - Fraction(inside, N))
    return best


# -- growth of Birkhoff sums and the parts identity -----------------------------


@dataclass(frozen=True)
class GrowthCheckpoint:
    N: int
    abs_S: int
    bound_hi: Fraction  # 2 B N D_N (upper end when D is an enclosure)
    ok: bool


def sn_growth(
    alpha: AlphaLike,
    x: UnitPoint,
    U: IntervalUnion,
    checkpoints: Sequence[int],
) -> list[GrowthCheckpoint]:
    """|S_N f| against the discrepancy bound 2 B N D_N at each checkpoint.

    Each of the B intervals miscounts by at most N*D_N, and f doubles the
    deviation; wrapped intervals deviate exactly like their complements.
    """
    cps = sorted(set(int(c) for c in checkpoints))
    if not cps or cps[0] < 1:
        raise ValueError("checkpoints must be positive")
    signs = sign_range(alpha, x, U, 1, cps[-1])
    csum = np.cumsum(signs.astype(np.int64))
    out = []
    for N in cps:
        if isinstance(alpha, Fraction):
            sample = PointSample.from_rational(alpha, x, N)
        else:
            sample = PointSample.from_cf(alpha, x, N)
        rep = discrepancy(sample)
        bound = 2 * U.B * N * rep.d_hi
        s_abs = int(abs(csum[N - 1]))
        out.append(GrowthCheckpoint(N=N, abs_S=s_abs, bound_hi=bound, ok=Fraction(s_abs) <= bound))
    return out


@dataclass(frozen=True)
class PartsResult:
    N: int
    boundary: Fraction
    series: Fraction
    total: Fraction  # boundary + series == sum_{n<=N} c_n / n, exactly
    tail_bound: float
    fit_exponent: float
    fit_constant: float


def eht_via_parts(
    alpha: AlphaLike,
    x: UnitPoint,
    U: IntervalUnion,
    N: int,
    fit_checkpoints: Optional[Sequence[int]] = None,
) -> PartsResult:
    """Harmonic weighted sum via S_N f / N + sum S_n f / (n(n+1)), exactly.

    The tail bound extrapolates the empirical growth |S_n| <= C n^p (fit
    with a safety margin on the exponent); it bounds |sum_{n<=M} - sum_{n<=N}|
    for all M > N provided the growth law persists.  That proviso is
    empirical, not a theorem, and is reported as such.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    signs = sign_range(alpha, x, U, 1, N)
    csum = np.cumsum(signs.astype(np.int64))
    boundary = Fraction(int(csum[-1]), N)
    series = rational_sum(
        [Fraction(int(csum[n - 1]), n * (n + 1)) for n in range(1, N)]
    )
    total = boundary + series

    cps = list(fit_checkpoints) if fit_checkpoints else [max(2, N // 100), N // 10, N]
    cps = sorted(set(min(max(c, 2), N) for c in cps))
    abs_s = np.abs(csum).astype(np.float64)
    p_hat = 0.0
    for a, b in zip(cps, cps[1:]):
        va, vb = max(abs_s[a - 1], 1.0), max(abs_s[b - 1], 1.0)
        slope = float(np.log(vb / va) / np.log(b / a))
        p_hat = max(p_hat, slope)
    p_fit = min(p_hat + 0.05, 0.95)
    n_arr = np.arange(1, N + 1, dtype=np.float64)
    c_fit = float(np.max(np.maximum(abs_s, 1.0) / n_arr**p_fit))
    # |S_M/M| + |S_N/N| + sum_{n >= N} C n^(p-2)
    tail = c_fit * (2 * N ** (p_fit - 1) + N ** (p_fit - 2) + N ** (p_fit - 1) / (1 - p_fit))
    return PartsResult(
        N=N,
        boundary=boundary,
        series=series,
        total=total,
        tail_bound=tail,
        fit_exponent=p_fit,
        fit_constant=c_fit,
    )
