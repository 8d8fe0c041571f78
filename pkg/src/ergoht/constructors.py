"""Explicit constructions: divergent rotation numbers and convergent Liouville ones.

The divergent construction fixes a_1 = 1 (or a user prefix) and, level by
level, appends an even digit a_{n+1} large enough that the certified N*
for (L = 1/q_n, kappa = q_{n-1}, N1 = q_n^2, A = 2B+1) is cleared, which
keeps every q_n odd and forces Cauchy-gap witnesses at every scale.  The
exact mode realizes this literally (the digits grow doubly exponentially
and are astronomically large from level 3 on); the relaxed mode keeps the
same shape at desk scale for validating the proof mechanics, with a small
threshold A and bounded digit growth.  It is not theorem-grade.

The convergent construction extends any prefix by a_{k+1} = q_k^{k-1},
which makes alpha Liouville while keeping k*log(q_k)/q_{k-1} summable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .cf import CFNumber
from .circle import IntervalUnion, UnitPoint
from .eht import NStarCertificate, compute_nstar
from .errors import InfeasibleSizeError, InvariantViolationError
from .signs import sign_range

AlphaLike = Union[CFNumber, Fraction]

# exact-mode digits beyond this many decimal digits are not materialized
MAX_NSTAR_DIGITS = 3_000_000


@dataclass(frozen=True)
class DivergentBuildConfig:
    B: int
    depth: int
    mode: str  # "exact" | "relaxed"
    A_relaxed: Optional[Fraction] = None
    growth_factor: Optional[int] = None
    prefix: Optional[tuple[int, ...]] = None
    auto_fix_prefix: bool = True
    max_nstar_digits: int = MAX_NSTAR_DIGITS

    def __post_init__(self):
        if self.B < 1:
            raise ValueError("B must be >= 1")
        if self.depth < 2:
            raise ValueError("depth must be >= 2")
        if self.mode not in ("exact", "relaxed"):
            raise ValueError("mode must be 'exact' or 'relaxed'")
        if self.mode == "relaxed":
            if self.A_relaxed is None or Fraction(self.A_relaxed) <= 0:
                raise ValueError("relaxed mode needs A_relaxed > 0")
            if self.growth_factor is None or self.growth_factor < 2:
                raise ValueError("relaxed mode needs growth_factor >= 2")


@dataclass(frozen=True)
class LevelRecord:
    n: int
    kappa: int
    L: Fraction
    N1: int
    A: Fraction
    certificate: Optional[NStarCertificate]
    q_n: int
    a_next: int
    q_next: int


@dataclass
class DivergentBuild:
    cf: CFNumber
    config: DivergentBuildConfig
    prefix_used: tuple[int, ...]
    parity_fix: tuple[int, ...]
    levels: list[LevelRecord] = field(default_factory=list)

    def report(self) -> dict:
        out = {
            "mode": self.config.mode,
            "B": self.config.B,
            "prefix": [str(a) for a in self.prefix_used],
            "parity_fix": [str(a) for a in self.parity_fix],
            "digits": [str(a) for a in self.cf.digits],
            "all_q_odd": self.cf.all_q_odd(self.cf.known_digits),
            "levels": [],
        }
        for rec in self.levels:
            entry = {
                "n": rec.n,
                "kappa": str(rec.kappa),
                "L": str(rec.L),
                "N1": str(rec.N1),
                "A": str(rec.A),
                "a_next": str(rec.a_next),
                "q_next": str(rec.q_next),
            }
            if rec.certificate is not None:
                entry["Nstar"] = str(rec.certificate.Nstar)
                entry["N2"] = str(rec.certificate.N2)
                entry["digit_inequality"] = rec.certificate.verify_digit(rec.a_next, rec.q_n)
            out["levels"].append(entry)
        return out


def _parity_fix_digits(cf: CFNumber) -> list[int]:
    """Digits appended so the last two q's are both odd.

    With all later digits even, q_{n} mod 2 == q_{n-2} mod 2; so the
    all-odd tail needs both q_m and q_{m-1} odd at the resumption point.
    Consecutive q are coprime, so at most one is even, and one or two
    appended digits always repair parity.
    """
    added = []
    m = cf.known_digits
    if cf.q(m) % 2 == 0:  # (odd, even): any digit gives odd next
        cf.append_digit(2)
        added.append(2)
        m += 1
    if cf.q(m - 1) % 2 == 0:  # (even, odd): an odd digit gives odd next
        cf.append_digit(1)
        added.append(1)
        m += 1
    assert cf.q(m) % 2 == 1 and cf.q(m - 1) % 2 == 1
    return added


def _least_even_digit_above(nstar: int, q_n: int) -> int:
    """Smallest even a with a * q_n > nstar."""
    a = nstar // q_n + 1
    if a % 2:
        a += 1
    return max(a, 2)


def _estimate_nstar_digits(B: int, q_n: int, kappa: int) -> float:
    """Decimal digits of N* at one exact level, from the harmonic asymptotics."""
    N1 = q_n * q_n
    E = math.log(N1 + kappa + 1) + 0.5772 - 1 - kappa / (kappa + 1) if N1 > 10 else 1.0
    R = (2 * B + 1 + max(E, 0.0)) * 3 * q_n
    return R / math.log(10)


def build_divergent(cfg: DivergentBuildConfig) -> DivergentBuild:
    """Divergent-alpha construction, exact or relaxed mode."""
    prefix = tuple(cfg.prefix) if cfg.prefix else (1,)
    cf = CFNumber(prefix)
    if cfg.prefix and not cfg.auto_fix_prefix:
        m = cf.known_digits
        if cf.q(m) % 2 == 0 or cf.q(m - 1) % 2 == 0:
            raise ValueError(
                "prefix parity violation: construction must resume where the "
                "last two q's are odd (set auto_fix_prefix to extend automatically)"
            )
    fixes = _parity_fix_digits(cf)
    build = DivergentBuild(cf=cf, config=cfg, prefix_used=prefix, parity_fix=tuple(fixes))

    while cf.known_digits < cfg.depth:
        n = cf.known_digits
        q_n, q_nm1 = cf.q(n), cf.q(n - 1)
        kappa = q_nm1
        L = Fraction(1, q_n)
        N1 = q_n * q_n
        if cfg.mode == "exact":
            A = Fraction(2 * cfg.B + 1)
            est = _estimate_nstar_digits(cfg.B, q_n, kappa)
            if est > cfg.max_nstar_digits:
                raise InfeasibleSizeError(
                    size=f"~10^{est:.3g} (decimal digits of N*)",
                    detail=f"exact level {n} is beyond representable size; "
                    f"use relaxed mode or depth <= {cf.known_digits}",
                )
            cert = compute_nstar(L, kappa, N1, A)
            a_next = _least_even_digit_above(cert.Nstar, q_n)
        else:
            A = Fraction(cfg.A_relaxed)
            cert = None
            a_next = cfg.growth_factor + (cfg.growth_factor % 2)
        cf.append_digit(a_next)
        q_next = cf.q(n + 1)
        if q_next % 2 == 0:
            raise InvariantViolationError(f"q_{n + 1} = {q_next} is even after parity fix")
        build.levels.append(
            LevelRecord(
                n=n, kappa=kappa, L=L, N1=N1, A=A, certificate=cert,
                q_n=q_n, a_next=a_next, q_next=q_next,
            )
        )
    return build


# -- sigma blocks and change sets ----------------------------------------------


@dataclass(frozen=True)
class SigmaBlocks:
    """Block sums over the level-n decomposition of O[1, q_{n+1}].

    sigma_0 = O[1, q_{n-1}], then a_{n+1} blocks of length q_n each.
    C is the set of l in [1, a_{n+1}-1] where s(sigma_l) changes.
    """

    level: int
    s0: int
    s: tuple[int, ...]
    C: tuple[int, ...]

    @property
    def total(self) -> int:
        return self.s0 + sum(self.s)


def sigma_blocks(
    alpha: CFNumber,
    x: UnitPoint,
    U: IntervalUnion,
    n: int,
    size_limit: int = 50_000_000,
) -> SigmaBlocks:
    """Exact block sums s(sigma_l) for level n and the change set C.

    Requires a_{n+1} to be known.  Raises InfeasibleSizeError with the
    exact a_{n+1} when q_{n+1} is too large to enumerate, so callers can
    switch to relaxed mode.  Asserts Lemma-level invariants: no zero block
    sums when q_n is odd, and |C| <= 2B.
    """
    a_next = alpha.digit(n + 1)
    q_n, q_nm1, q_next = alpha.q(n), alpha.q(n - 1), alpha.q(n + 1)
    if q_next > size_limit:
        raise InfeasibleSizeError(size=a_next, detail=f"q_{n + 1} = {q_next} exceeds limit")
    signs = sign_range(alpha, x, U, 1, q_next)
    s0 = int(signs[:q_nm1].sum())
    blocks = signs[q_nm1:].astype(np.int64).reshape(a_next, q_n)
    s = blocks.sum(axis=1)
    if q_n % 2 == 1 and (s == 0).any():
        raise InvariantViolationError("odd-length block with zero sum (sign evaluation bug)")
    changes = tuple(int(l) for l in range(1, a_next) if s[l - 1] != s[l])
    if len(changes) > 2 * U.B:
        raise InvariantViolationError(
            f"change set size {len(changes)} exceeds 2B = {2 * U.B}"
        )
    return SigmaBlocks(level=n, s0=s0, s=tuple(int(v) for v in s), C=changes)


# -- convergent Liouville construction ------------------------------------------


def build_liouville_convergent(prefix: Sequence[int], depth: int) -> CFNumber:
    """Extend a prefix by a_{k+1} = q_k^{k-1} up to `depth` digits.

    The result stays lazily extensible by the same rule.
    """
    prefix = tuple(int(a) for a in prefix)
    if not prefix:
        raise ValueError("prefix must be nonempty")
    if depth < len(prefix):
        raise ValueError("depth must cover the prefix")

    def rule(cf: CFNumber, i: int) -> int:
        return cf.q(i - 1) ** (i - 2)

    cf = CFNumber(prefix, digit_rule=rule)
    cf.ensure(depth)
    return cf


@dataclass(frozen=True)
class LiouvilleWitness:
    """Certifies ||q_k alpha|| < q_k^{-v} through the convergent gap bound."""

    k: int
    q_k: int
    v: Fraction
    gap_upper: Fraction  # 1/q_{k+1}, a certified upper bound on ||q_k alpha||
    bound: Optional[Fraction]  # q_k^{-v} when v is integral


def verify_liouville(alpha: CFNumber, v, depth: int) -> list[LiouvilleWitness]:
    """All k < depth with q_{k+1} >= q_k^v, certifying ||q_k alpha|| < q_k^{-v}.

    Indices with q_k = 1 are excluded: a denominator-1 approximation is
    vacuous.  Comparison is exact for rational v via cross-powers.
    """
    v = Fraction(v)
    alpha.ensure(depth)
    out = []
    for k in range(1, depth):
        q_k, q_k1 = alpha.q(k), alpha.q(k + 1)
        if q_k < 2:
            continue
        if q_k1**v.denominator >= q_k**v.numerator:
            bound = Fraction(1, q_k**v.numerator) if v.denominator == 1 else None
            out.append(
                LiouvilleWitness(k=k, q_k=q_k, v=v, gap_upper=Fraction(1, q_k1), bound=bound)
            )
    return out


@dataclass(frozen=True)
class GrowthReport:
    ok: bool
    failures: tuple[int, ...]
    partials: tuple[float, ...]  # cumulative sum of k*log(q_k)/q_{k-1}


def verify_growth_bounds(alpha: CFNumber, depth: int) -> GrowthReport:
    """Check q_k^k <= q_{k+1} <= 2 q_k^k for 1 < k < depth.

    Also reports the running partial sums of k*log(q_k)/q_{k-1}, the
    summability diagnostic driving the convergence argument.  No claim is
    made about the infinite limit.
    """
    alpha.ensure(depth)
    failures = []
    for k in range(2, depth):
        pw = alpha.q(k) ** k
        if not (pw <= alpha.q(k + 1) <= 2 * pw):
            failures.append(k)
    partials = []
    acc = 0.0
    for k in range(1, depth + 1):
        q_k, q_km1 = alpha.q(k), alpha.q(k - 1)
        log_term = math.log(k) + math.log(math.log(q_k)) if q_k > 1 else -math.inf
        if log_term == -math.inf:
            term = 0.0
        else:
            # k*log(q_k)/q_{k-1} via logs so gigantic q_{k-1} underflow gracefully
            expo = log_term - (math.log(q_km1) if q_km1 > 1 else 0.0)
            term = math.exp(expo) if expo > -700 else 0.0
        acc += term
        partials.append(acc)
    return GrowthReport(ok=not failures, failures=tuple(failures), partials=tuple(partials))
