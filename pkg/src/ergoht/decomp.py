"""Decomposition of rotation sign sequences into near-alternating subsequences.

Level i works with windows [(j-1)Q_i + 1, j*Q_i] where Q_i is the product
of the first i convergent denominators.  Within each window, the l-th
remaining +1 and the l-th remaining -1 (remaining = not extracted by
earlier levels) are paired into subsequence l of the level.  The
Denjoy-Koksma window bound guarantees each window holds at least

    count_i = ((4B Q_{i-2} + xi_{i-1}) q_i - 4B Q_{i-1} - xi_i) / 2

such pairs, where the parity bits xi_i in {0,1} absorb the floors.
Extracting exactly count_i pairs per window leaves a residual set X_i
meeting every window in exactly 4B Q_{i-1} + xi_i indices.

The hierarchy requires q_1 > 4B.  When it fails (e.g. the golden rotation
with any B), levels are relabeled to start at the first k with q_k > 4B;
the shift is recorded in the output.

Membership of an index in any X_i depends only on signs at indices up to
it, so the extraction streams: feeding the sign sequence chunk by chunk
produces exactly the picks a full-sequence run would, which is what makes
deep-level index-bound checks possible at scales where the sequence
cannot be materialized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import CountShortfallError, DecompositionError
from .harmonic import harmonic_bounds, hsum_exact


def shift_index(q: Sequence[int], B: int) -> int:
    """1-based index of the first q_k > 4B (the level-1 anchor)."""
    for k, qk in enumerate(q, start=1):
        if qk > 4 * B:
            return k
    raise DecompositionError(
        f"no q_k > 4B = {4 * B} among the {len(q)} available denominators"
    )


@dataclass(frozen=True)
class ParitySequence:
    """Parity bits, window products and per-level pair counts.

    `q` is the (possibly relabeled) denominator ladder; `shift` records how
    many original indices were skipped (0 when q_1 > 4B already).
    """

    q: tuple[int, ...]
    B: int
    shift: int
    xi: tuple[int, ...]
    Q: tuple[int, ...]
    counts: tuple[int, ...]

    def residual_per_window(self, i: int) -> int:
        """|X_i intersect any complete length-Q_i window| = 4B Q_{i-1} + xi_i."""
        q_prev = self.Q[i - 2] if i >= 2 else 1
        return 4 * self.B * q_prev + self.xi[i - 1]


def parity_sequence(q: Sequence[int], B: int, depth: int, shift: int = 0) -> ParitySequence:
    """Exact xi_i, Q_i and pair counts for levels 1..depth.

    `q` must already be the relabeled ladder (q[0] > 4B); use
    `shifted_ladder` to produce it from raw denominators.
    """
    if B < 1:
        raise ValueError("B must be >= 1")
    if depth < 1 or len(q) < depth:
        raise ValueError("need at least `depth` denominators")
    q = tuple(int(v) for v in q[:depth])
    if q[0] <= 4 * B:
        raise DecompositionError(
            f"q_1 = {q[0]} <= 4B = {4 * B}; shift the ladder to the first "
            "q_k > 4B (see shift_index / shifted_ladder)"
        )
    xi: list[int] = []
    Q: list[int] = []
    counts: list[int] = []
    for i in range(1, depth + 1):
        if i == 1:
            t = q[0] - 4 * B
        else:
            q_im2 = Q[i - 3] if i >= 3 else 1
            t = (4 * B * q_im2 + xi[-1]) * q[i - 1] - 4 * B * Q[i - 2]
        if t < 0:
            raise DecompositionError(f"negative pair count at level {i}")
        xi.append(t % 2)
        counts.append((t - xi[-1]) // 2)
        Q.append((Q[-1] if Q else 1) * q[i - 1])
    return ParitySequence(q=q, B=B, shift=shift, xi=tuple(xi), Q=tuple(Q), counts=tuple(counts))


def shifted_ladder(q_raw: Sequence[int], B: int, depth: int) -> ParitySequence:
    """Relabel raw denominators to start at the first q_k > 4B."""
    k0 = shift_index(q_raw, B)
    if len(q_raw) < k0 + depth - 1:
        raise ValueError(
            f"need {k0 + depth - 1} raw denominators for depth {depth} after shift {k0 - 1}"
        )
    return parity_sequence(q_raw[k0 - 1 : k0 - 1 + depth], B, depth, shift=k0 - 1)


# -- extraction engine ---------------------------------------------------------


@dataclass
class _LevelCarry:
    window: int = 0  # 0-based id of the window still open at the chunk edge
    plus_seen: int = 0
    minus_seen: int = 0


@dataclass
class LevelPicks:
    """Picks of one level within one processed chunk (global 1-based indices)."""

    level: int
    plus_idx: np.ndarray
    plus_l: np.ndarray
    plus_win: np.ndarray
    minus_idx: np.ndarray
    minus_l: np.ndarray
    minus_win: np.ndarray


class DecompositionEngine:
    """Streaming greedy extraction over a fixed parity ladder.

    Feed sign chunks in order; each call returns the per-level picks made
    inside the chunk.  Whether an index joins a level depends only on signs
    up to that index, so picks are identical to a full-sequence run no
    matter how the input is chunked.  Windows that lie entirely inside one
    chunk are checked for the guaranteed pair count (a shortfall raises
    CountShortfallError); windows spanning chunk boundaries are not
    checked, only extracted.
    """

    def __init__(self, ps: ParitySequence, check_shortfall: bool = True):
        self.ps = ps
        self.levels = len(ps.q)
        self.check_shortfall = check_shortfall
        self.carries = [_LevelCarry() for _ in range(self.levels)]
        self.consumed = 0  # indices processed so far

    def feed(self, signs: np.ndarray) -> list[LevelPicks]:
        n = len(signs)
        if n == 0:
            return []
        start = self.consumed  # 0-based position of signs[0]
        idx = np.arange(start + 1, start + n + 1, dtype=np.int64)
        is_plus = np.asarray(signs) > 0
        out = []
        for lev in range(1, self.levels + 1):
            count_i = self.ps.counts[lev - 1]
            Qi = self.ps.Q[lev - 1]
            carry = self.carries[lev - 1]
            plus = idx[is_plus]
            minus = idx[~is_plus]
            if self.check_shortfall:
                self._check_complete_windows(lev, Qi, count_i, start, n, plus, minus)
            p_pick, p_l, p_w = self._pick(plus, Qi, count_i, carry, True)
            m_pick, m_l, m_w = self._pick(minus, Qi, count_i, carry, False)
            self._advance_carry(carry, Qi, start + n, plus, minus)
            picked = np.concatenate([p_pick, m_pick])
            if len(picked):
                keep = np.ones(len(idx), dtype=bool)
                keep[np.searchsorted(idx, picked)] = False
                idx = idx[keep]
                is_plus = is_plus[keep]
            out.append(
                LevelPicks(
                    level=lev,
                    plus_idx=p_pick, plus_l=p_l, plus_win=p_w,
                    minus_idx=m_pick, minus_l=m_l, minus_win=m_w,
                )
            )
        self.consumed += n
        return out

    def _pick(self, pos: np.ndarray, Qi: int, count_i: int, carry: _LevelCarry, plus: bool):
        empty = np.zeros(0, dtype=np.int64)
        if len(pos) == 0 or count_i == 0:
            return empty, empty.copy(), empty.copy()
        win = (pos - 1) // Qi
        first_of_win = np.searchsorted(win, win, side="left")
        ranks = np.arange(len(pos), dtype=np.int64) - first_of_win
        if win[0] == carry.window:
            seen = carry.plus_seen if plus else carry.minus_seen
            if seen:
                ranks[win == carry.window] += seen
        chosen = ranks < count_i
        return pos[chosen], ranks[chosen] + 1, win[chosen]

    def _advance_carry(self, carry: _LevelCarry, Qi: int, end_pos: int, plus, minus):
        # end_pos = number of consumed indices after this chunk
        last_win = (end_pos - 1) // Qi
        if end_pos % Qi == 0:
            carry.window = last_win + 1
            carry.plus_seen = 0
            carry.minus_seen = 0
            return
        if last_win != carry.window:
            carry.plus_seen = 0
            carry.minus_seen = 0
            carry.window = last_win
        carry.plus_seen += int(((plus - 1) // Qi == last_win).sum())
        carry.minus_seen += int(((minus - 1) // Qi == last_win).sum())

    def _check_complete_windows(self, lev, Qi, count_i, start, n, plus, minus):
        first_w = start // Qi + (1 if start % Qi else 0)
        last_w_excl = (start + n) // Qi
        if last_w_excl <= first_w:
            return
        for pos, label in ((plus, "+1"), (minus, "-1")):
            win = (pos - 1) // Qi
            inside = (win >= first_w) & (win < last_w_excl)
            cnt = np.bincount(win[inside] - first_w, minlength=last_w_excl - first_w)
            if (cnt < count_i).any():
                w_bad = int(np.argmin(cnt)) + first_w
                raise CountShortfallError(
                    f"level {lev}: window {w_bad} holds {int(cnt.min())} remaining "
                    f"{label}'s, fewer than the guaranteed {count_i}"
                )


# -- one-shot decomposition over a materialized range ---------------------------


@dataclass(frozen=True)
class NearAlternatingSeq:
    """One extracted subsequence: indices ascending, pairs {+1,-1} as sets."""

    level: int
    slot: int
    indices: tuple[int, ...]
    values: tuple[int, ...]

    def is_pair_permutation(self) -> bool:
        vals = self.values
        pairs = [set(vals[i : i + 2]) for i in range(0, len(vals) - 1, 2)]
        return all(p == {1, -1} for p in pairs)

    @property
    def first_index(self) -> int:
        return self.indices[0]


@dataclass
class LevelData:
    level: int
    count: int  # closed-form pairs per complete window
    Q: int
    xi: int
    plus_idx: np.ndarray
    plus_l: np.ndarray
    plus_win: np.ndarray
    minus_idx: np.ndarray
    minus_l: np.ndarray
    minus_win: np.ndarray

    def sequences(self) -> list[NearAlternatingSeq]:
        """Materialize per-slot sequences (small ranges only)."""
        out = []
        for l in range(1, self.count + 1):
            sel_p = self.plus_l == l
            sel_m = self.minus_l == l
            entries = []
            for pos, wn in zip(self.plus_idx[sel_p], self.plus_win[sel_p]):
                entries.append((int(wn), int(pos), 1))
            for pos, wn in zip(self.minus_idx[sel_m], self.minus_win[sel_m]):
                entries.append((int(wn), int(pos), -1))
            if not entries:
                continue
            entries.sort()  # by window, then index: pairs stay adjacent
            idxs = tuple(e[1] for e in entries)
            vals = tuple(e[2] for e in entries)
            out.append(NearAlternatingSeq(level=self.level, slot=l, indices=idxs, values=vals))
        return out

    def first_window_first_indices(self) -> np.ndarray:
        """ind(b_1^{(i,l)}) for every slot l with a pick in window 0.

        The first element of slot l is whichever of the two window-0 picks
        comes first; with only one pick materialized (partial data) that
        pick is already the minimum, since its partner lies beyond.
        """
        n_slots = 0
        sel_p = self.plus_win == 0
        sel_m = self.minus_win == 0
        if sel_p.any():
            n_slots = int(self.plus_l[sel_p].max())
        if sel_m.any():
            n_slots = max(n_slots, int(self.minus_l[sel_m].max()))
        first = np.full(n_slots + 1, np.iinfo(np.int64).max, dtype=np.int64)
        np.minimum.at(first, self.plus_l[sel_p], self.plus_idx[sel_p])
        np.minimum.at(first, self.minus_l[sel_m], self.minus_idx[sel_m])
        return first[1:]


@dataclass
class DecompositionResult:
    ps: ParitySequence
    N: int
    partial: bool
    levels: list[LevelData]
    residual: np.ndarray  # global indices left in X_levels

    def residual_window_counts(self, i: int) -> np.ndarray:
        """|X_i intersect window| for each complete length-Q_i window.

        X_i here means the residual after levels 1..i, restricted to [1,N].
        """
        Qi = self.ps.Q[i - 1]
        n_win = self.N // Qi
        if n_win == 0:
            return np.zeros(0, dtype=np.int64)
        mask = np.ones(self.N, dtype=bool)
        for lev in self.levels[:i]:
            mask[lev.plus_idx - 1] = False
            mask[lev.minus_idx - 1] = False
        counts = np.add.reduceat(mask[: n_win * Qi].astype(np.int64), np.arange(0, n_win * Qi, Qi))
        return counts

    def audit(self) -> dict:
        """Per-level audit record (counts, parity data, pass flags)."""
        out = {"shift": self.ps.shift, "B": self.ps.B, "N": self.N, "levels": []}
        for lev in self.levels:
            i = lev.level
            n_win = self.N // lev.Q
            expected_resid = self.ps.residual_per_window(i)
            resid = self.residual_window_counts(i) if n_win else np.zeros(0)
            seqs = lev.sequences() if self.N <= 200_000 else None
            entry = {
                "level": i,
                "Q": str(lev.Q),
                "xi": lev.xi,
                "pairs_per_window": str(lev.count),
                "complete_windows": n_win,
                "residual_expected": str(expected_resid),
                "residual_ok": bool((resid == expected_resid).all()) if n_win else None,
                "pair_permutation_ok": (
                    all(s.is_pair_permutation() for s in seqs) if seqs is not None else None
                ),
            }
            out["levels"].append(entry)
        return out


def decompose(
    signs: np.ndarray,
    q_raw: Sequence[int],
    B: int,
    levels: int,
    allow_partial: bool = False,
) -> DecompositionResult:
    """Greedy near-alternating decomposition of signs[0..N-1] (= c_1..c_N).

    `q_raw` are the untruncated convergent denominators; the ladder shift
    for q_1 <= 4B is applied internally and recorded.  N must be a multiple
    of Q_levels unless allow_partial, in which case the final window of
    each deep level may be incomplete (picks remain prefix-exact).
    """
    ps = shifted_ladder(q_raw, B, levels)
    N = len(signs)
    if not allow_partial and N % ps.Q[-1] != 0:
        raise ValueError(f"N = {N} is not a multiple of Q_{levels} = {ps.Q[-1]}")
    engine = DecompositionEngine(ps, check_shortfall=not allow_partial)
    picks = engine.feed(np.asarray(signs, dtype=np.int8))
    level_data = [
        LevelData(
            level=p.level,
            count=ps.counts[p.level - 1],
            Q=ps.Q[p.level - 1],
            xi=ps.xi[p.level - 1],
            plus_idx=p.plus_idx, plus_l=p.plus_l, plus_win=p.plus_win,
            minus_idx=p.minus_idx, minus_l=p.minus_l, minus_win=p.minus_win,
        )
        for p in picks
    ]
    mask = np.ones(N, dtype=bool)
    for lev in level_data:
        mask[lev.plus_idx - 1] = False
        mask[lev.minus_idx - 1] = False
    residual = np.flatnonzero(mask) + 1
    return DecompositionResult(ps=ps, N=N, partial=allow_partial, levels=level_data, residual=residual)


# -- Proposition-style index bounds ---------------------------------------------


def check_index_bounds(ind: int, i: int, l: int, ps: ParitySequence) -> bool:
    """Both displayed lower bounds on ind(b_1^{(i,l)}) plus the linear one.

    Valid for i > 5.  Bounds:
      ind >= floor(l / (4B Q_{i-4} + xi_{i-3})) * Q_{i-3}
      ind >= count_{i-1}
      16B * ind >= q_{i-3} * l
    """
    if i <= 5:
        raise ValueError("index bounds require level i > 5")
    B = ps.B
    denom = 4 * B * ps.Q[i - 5] + ps.xi[i - 4]
    if ind < (l // denom) * ps.Q[i - 4]:
        return False
    if ind < ps.counts[i - 2]:
        return False
    if 16 * B * ind < ps.q[i - 4] * l:
        return False
    return True


def check_index_bounds_seq(seq: NearAlternatingSeq, ps: ParitySequence) -> bool:
    return check_index_bounds(seq.first_index, seq.level, seq.slot, ps)


# -- level bounds and recombination ----------------------------------------------


def level_bound(ps: ParitySequence, i: int, count: Optional[int] = None) -> Fraction:
    """Certified window-sum bound D^(i) = 2 sum_{l<=count_i} 16B/(q_{i-3} l).

    Exact when the count is small; otherwise uses a certified upper bound
    on the harmonic number (sound: only ever rounds D up).  Valid for
    i > 5, where the linear index bound holds.
    """
    if i <= 5:
        raise ValueError("level bounds require i > 5")
    c = ps.counts[i - 1] if count is None else count
    if c == 0:
        return Fraction(0)
    if c <= 100_000:
        h = hsum_exact(1, c)
    else:
        _, h = harmonic_bounds(c, 192)
    return 2 * Fraction(16 * ps.B, ps.q[i - 4]) * h


@dataclass(frozen=True)
class RecombineReport:
    total: Fraction
    per_level: tuple[tuple[int, Fraction], ...]
    tail_terms: tuple[float, ...]  # k * log(q_k) / q_{k-3} diagnostics


def recombine_bound(ps: ParitySequence, i_from: int = 6, i_to: Optional[int] = None) -> RecombineReport:
    """Finite-depth sum of level bounds plus the summability diagnostic.

    The tail terms k*log(q_k)/q_{k-3} drive summability of sum_i D^(i)
    under the growth hypotheses; only finite partial data is reported.
    """
    if i_to is None:
        i_to = len(ps.q)
    per = []
    total = Fraction(0)
    for i in range(i_from, i_to + 1):
        d = level_bound(ps, i)
        per.append((i, d))
        total += d
    tails = []
    for k in range(4, i_to + 1):
        q_k, q_km3 = ps.q[k - 1], ps.q[k - 4]
        expo = math.log(k) + math.log(math.log(q_k)) - math.log(q_km3)
        tails.append(math.exp(expo) if expo > -700 else 0.0)
    return RecombineReport(total=total, per_level=tuple(per), tail_terms=tuple(tails))
