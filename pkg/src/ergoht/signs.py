"""Vectorized certified evaluation of f(x + n*alpha) along index ranges.

All arithmetic is integer-exact.  A CF alpha is bracketed between
consecutive convergents p_k/q_k and p_{k+1}/q_{k+1}; over the common
denominator D = q_k q_{k+1} those are consecutive integers m, m+1, so the
n-th orbit point is enclosed by an integer interval of width exactly n
(in units of 1/D).  Everything is scaled to one modulus T shared with the
endpoints of U.  When all quantities fit in int64 with headroom, ranges
are evaluated in numpy chunks; otherwise a plain big-integer loop does
the same thing.  Enclosures that straddle an endpoint of U are refined
individually through `sign_at`.
"""

from __future__ import annotations

import bisect
from fractions import Fraction
from math import lcm
from typing import Union

import numpy as np

from .cf import CFNumber
from .circle import IntervalUnion, UnitPoint, sign_at

AlphaLike = Union[CFNumber, Fraction]

_INT64_BUDGET = 1 << 62
_VECTOR_MIN = 64  # below this, plain loops win


def sign_range(
    alpha: AlphaLike,
    x: UnitPoint,
    U: IntervalUnion,
    n_lo: int,
    n_hi: int,
    depth: int | None = None,
) -> np.ndarray:
    """Certified signs f(x + n*alpha) for n = n_lo..n_hi as an int8 array."""
    if n_lo > n_hi:
        raise ValueError("need n_lo <= n_hi")
    if isinstance(alpha, Fraction):
        return _rational_range(alpha, x, U, n_lo, n_hi)
    if n_lo < 0 <= n_hi:
        neg = _cf_range(alpha, x, U, n_lo, -1, depth)
        pos = _cf_range(alpha, x, U, 0, n_hi, depth)
        return np.concatenate([neg, pos])
    return _cf_range(alpha, x, U, n_lo, n_hi, depth)


# -- shared helpers -----------------------------------------------------------


def _u_denominator(U: IntervalUnion) -> int:
    bounds, _ = U.segments()
    return lcm(1, *[b.denominator for b in bounds])


def _segment_arrays(U: IntervalUnion, T: int):
    bounds, inside = U.segments()
    starts = [int(b * T) for b in bounds]
    ends = starts[1:] + [T]
    flags = [1 if f else -1 for f in inside]
    return starts, ends, flags


# -- rational test mode -------------------------------------------------------


def _rational_range(alpha: Fraction, x: UnitPoint, U: IntervalUnion, n_lo, n_hi) -> np.ndarray:
    xv = x.value
    T = lcm(alpha.denominator, xv.denominator, _u_denominator(U))
    step = (alpha.numerator % alpha.denominator) * (T // alpha.denominator)
    base = xv.numerator * (T // xv.denominator)
    count = n_hi - n_lo + 1
    starts, ends, flags = _segment_arrays(U, T)

    if T < _INT64_BUDGET and count >= _VECTOR_MIN:
        starts_a = np.array(starts, dtype=np.int64)
        flags_a = np.array(flags, dtype=np.int8)
        out = np.empty(count, dtype=np.int8)
        chunk = int(min(count, max(1, _INT64_BUDGET // max(step, 1)), 1 << 20))
        offsets = (np.arange(chunk, dtype=np.int64) * step) % T
        done = 0
        while done < count:
            size = min(chunk, count - done)
            cbase = (base + (n_lo + done) * step) % T
            pos = offsets[:size] + cbase
            pos[pos >= T] -= T
            idx = np.searchsorted(starts_a, pos, side="right") - 1
            out[done : done + size] = flags_a[idx]
            done += size
        return out

    out = np.empty(count, dtype=np.int8)
    v = (base + n_lo * step) % T
    for i in range(count):
        j = bisect.bisect_right(starts, v) - 1
        out[i] = flags[j]
        v += step
        if v >= T:
            v -= T
    return out


# -- continued-fraction mode --------------------------------------------------


def _pick_depth(alpha: CFNumber, n_abs: int, d_budget: int) -> int:
    """Deepest affordable k; stops early once width ~ 1/(64 n^2) reached."""
    k = 1
    while True:
        if alpha.q(k) * alpha.q(k + 1) > 64 * n_abs * n_abs:
            return k
        try:
            alpha.ensure(k + 2)
        except Exception:
            return k
        if alpha.q(k + 1) * alpha.q(k + 2) > d_budget:
            return k
        k += 1


def _cf_range(alpha: CFNumber, x: UnitPoint, U: IntervalUnion, n_lo, n_hi, depth) -> np.ndarray:
    xv = x.value
    b = xv.denominator
    u = _u_denominator(U)
    n_abs = max(abs(n_lo), abs(n_hi), 1)
    if depth is None:
        k = _pick_depth(alpha, n_abs, _INT64_BUDGET // (b * b * u * 4))
    else:
        k = depth
    alpha.ensure(k + 1)
    pk, qk = alpha.convergent(k)
    pk1, qk1 = alpha.convergent(k + 1)
    D = qk * qk1
    m = min(pk * qk1, pk1 * qk)  # alpha in (m/D, (m+1)/D)
    if n_hi <= 0:
        m += 1  # for n < 0 the lower endpoint of n*alpha comes from (m+1)/D
    C = b * D
    s = lcm(C, u) // C
    T = C * s
    step = (m * b) % C

    w_max = n_abs * b * s
    count = n_hi - n_lo + 1
    if 2 * T + w_max < (1 << 63) and count >= _VECTOR_MIN and step > 0:
        return _cf_kernel_int64(alpha, x, U, n_lo, n_hi, b, s, C, T, step)
    return _cf_loop_bigint(alpha, x, U, n_lo, n_hi, b, s, C, T, step)


def _cf_kernel_int64(alpha, x, U, n_lo, n_hi, b, s, C, T, step) -> np.ndarray:
    xv = x.value
    count = n_hi - n_lo + 1
    starts, ends, flags = _segment_arrays(U, T)
    starts_a = np.array(starts, dtype=np.int64)
    ends_a = np.array(ends, dtype=np.int64)
    flags_a = np.array(flags, dtype=np.int8)
    out = np.empty(count, dtype=np.int8)

    base0 = xv.numerator * (C // b)  # x scaled to 1/C units
    chunk = int(min(count, max(1, _INT64_BUDGET // step), 1 << 20))
    offsets = (np.arange(chunk, dtype=np.int64) * step) % C
    wscale = b * s

    undecided: list[int] = []
    done = 0
    while done < count:
        size = min(chunk, count - done)
        n0 = n_lo + done
        cbase = (base0 + n0 * step) % C
        pos = offsets[:size] + cbase
        pos[pos >= C] -= C
        pos *= s
        ns = np.arange(n0, n0 + size, dtype=np.int64)
        w = np.abs(ns) * wscale
        idx = np.searchsorted(starts_a, pos, side="right") - 1
        decided = pos + w <= ends_a[idx]
        out[done : done + size] = np.where(decided, flags_a[idx], 0)
        if not decided.all():
            undecided.extend(ns[~decided].tolist())
        done += size

    for n in undecided:
        out[n - n_lo] = sign_at(alpha, x, int(n), U)
    return out


def _cf_loop_bigint(alpha, x, U, n_lo, n_hi, b, s, C, T, step) -> np.ndarray:
    """Arbitrary-precision fallback; same semantics as the int64 kernel."""
    xv = x.value
    count = n_hi - n_lo + 1
    starts, ends, flags = _segment_arrays(U, T)
    out = np.empty(count, dtype=np.int8)
    v = (xv.numerator * (C // b) + n_lo * step) % C
    for i in range(count):
        n = n_lo + i
        pos = v * s
        w = abs(n) * b * s
        j = bisect.bisect_right(starts, pos) - 1
        if pos + w <= ends[j]:
            out[i] = flags[j]
        else:
            out[i] = sign_at(alpha, x, n, U)
        v += step
        if v >= C:
            v -= C
    return out
