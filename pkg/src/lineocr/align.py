"""Unit-cost edit-distance kernels and the (S, D, I, C) alignment counts.

Strings are handed to the numba kernels as arrays of code points.  The
traceback tie-break is fixed (match > substitution > deletion > insertion,
read from the end of both strings) so that counts are reproducible when
several optimal edit scripts exist.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np

MATCH, SUB, DEL, INS = 0, 1, 2, 3
SMALL_PROBLEM = 1 << 16  # cells below which banding is not worth a distance pass


@dataclass(frozen=True)
class AlignmentCounts:
    substitutions: int = 0
    deletions: int = 0
    insertions: int = 0
    correct: int = 0

    @property
    def reference_length(self) -> int:
        """N = S + D + C."""
        return self.substitutions + self.deletions + self.correct

    @property
    def hypothesis_length(self) -> int:
        return self.substitutions + self.insertions + self.correct

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    def __add__(self, other: "AlignmentCounts") -> "AlignmentCounts":
        return AlignmentCounts(
            self.substitutions + other.substitutions,
            self.deletions + other.deletions,
            self.insertions + other.insertions,
            self.correct + other.correct,
        )

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.substitutions, self.deletions, self.insertions, self.correct)


def codes(s: str) -> np.ndarray:
    return np.frombuffer(s.encode("utf-32-le"), dtype="<u4").astype(np.int32)


def pack(strings: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    """Concatenate code points of ``strings`` with an offsets array."""
    offsets = np.zeros(len(strings) + 1, dtype=np.int64)
    for i, s in enumerate(strings):
        offsets[i + 1] = offsets[i] + len(s)
    return codes("".join(strings)), offsets


# -- kernels ---------------------------------------------------------------


@numba.njit(cache=True, nogil=True)
def _choose(a_ch, b_ch, diag, up, left, best):
    if diag == best:
        return MATCH if a_ch == b_ch else SUB
    if up == best:
        return DEL
    return INS


@numba.njit(cache=True, nogil=True)
def _global_counts(a, b):
    """Counts along the preferred optimal path, without a traceback matrix.

    Each cell keeps its cost and the substitutions on the path its stored
    choice leads back through, which is exactly the path a traceback from
    that cell would follow.  Deletions and insertions follow from the cost
    because D - I = i - j on every path into cell (i, j).
    """
    n, m = a.shape[0], b.shape[0]
    cost = np.arange(m + 1).astype(np.int32)
    subs = np.zeros(m + 1, dtype=np.int32)
    for i in range(1, n + 1):
        ai = a[i - 1]
        diag, diag_s = cost[0], subs[0]
        left, left_s = i, 0
        cost[0] = i
        for j in range(1, m + 1):
            up, up_s = cost[j], subs[j]
            if ai == b[j - 1]:
                # a match is never worse than either gap
                best, best_s = diag, diag_s
            else:
                best, best_s = diag + 1, diag_s + 1
                if up + 1 < best:
                    best, best_s = up + 1, up_s
                if left + 1 < best:
                    best, best_s = left + 1, left_s
            cost[j] = best
            subs[j] = best_s
            left, left_s = best, best_s
            diag, diag_s = up, up_s
    total, s = cost[m], subs[m]
    d = (total - s + n - m) // 2
    ins = total - s - d
    return s, d, ins, n - s - d


@numba.njit(cache=True, nogil=True)
def _semiglobal_span(inner, outer):
    n, m = inner.shape[0], outer.shape[0]
    ops = np.empty((n + 1, m + 1), dtype=np.uint8)
    prev = np.zeros(m + 1, dtype=np.int32)
    cur = np.empty(m + 1, dtype=np.int32)
    for i in range(1, n + 1):
        cur[0] = i
        ops[i, 0] = DEL
        ai = inner[i - 1]
        for j in range(1, m + 1):
            diag = prev[j - 1] + (0 if ai == outer[j - 1] else 1)
            up = prev[j] + 1
            left = cur[j - 1] + 1
            best = diag
            if up < best:
                best = up
            if left < best:
                best = left
            cur[j] = best
            ops[i, j] = _choose(ai, outer[j - 1], diag, up, left, best)
        prev, cur = cur, prev
    end = 0
    for j in range(1, m + 1):
        if prev[j] < prev[end]:
            end = j
    dist = prev[end]
    i, j = n, end
    while i > 0:
        op = ops[i, j]
        if op == MATCH or op == SUB:
            i -= 1
            j -= 1
        elif op == DEL:
            i -= 1
        else:
            j -= 1
    return dist, j, end


@numba.njit(cache=True, nogil=True)
def _banded_counts(a, b, klo, khi):
    # full recurrence and tie-break with a traceback, restricted to diagonals
    # klo <= j - i <= khi; exact whenever the band holds every optimal path
    n, m = a.shape[0], b.shape[0]
    w = khi - klo + 1
    inf = 1 << 30
    ops = np.zeros((n + 1, w), dtype=np.uint8)
    prev = np.full(w, inf, dtype=np.int32)
    cur = np.full(w, inf, dtype=np.int32)
    for off in range(w):
        j = off + klo
        if 0 <= j <= m:
            prev[off] = j
            ops[0, off] = INS
    for i in range(1, n + 1):
        ai = a[i - 1]
        for off in range(w):
            cur[off] = inf
            j = i + klo + off
            if j < 0 or j > m:
                continue
            if j == 0:
                cur[off] = i
                ops[i, off] = DEL
                continue
            diag = prev[off] + (0 if ai == b[j - 1] else 1)
            up = prev[off + 1] + 1 if off + 1 < w else inf
            left = cur[off - 1] + 1 if off >= 1 else inf
            best = diag
            if up < best:
                best = up
            if left < best:
                best = left
            cur[off] = best
            ops[i, off] = _choose(ai, b[j - 1], diag, up, left, best)
        prev, cur = cur, prev
    s = d = ins = c = 0
    i, j = n, m
    while i > 0 or j > 0:
        op = ops[i, j - i - klo]
        if op == MATCH:
            c += 1
            i -= 1
            j -= 1
        elif op == SUB:
            s += 1
            i -= 1
            j -= 1
        elif op == DEL:
            d += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return s, d, ins, c


@numba.njit(cache=True, nogil=True)
def _myers(pattern, text, sigma, semiglobal):
    """Bit-parallel edit distance (Myers, block-based after Hyyro).

    Symbols are dense ids in ``[0, sigma)``.  Global distance, or with
    ``semiglobal`` the best placement of ``pattern`` inside ``text``.
    """
    m, n = pattern.shape[0], text.shape[0]
    if m == 0:
        return 0 if semiglobal else n
    one = np.uint64(1)
    nb = (m + 63) // 64
    peq = np.zeros((sigma, nb), dtype=np.uint64)
    for i in range(m):
        peq[pattern[i], i >> 6] |= one << np.uint64(i & 63)
    pv = np.empty(nb, dtype=np.uint64)
    mv = np.zeros(nb, dtype=np.uint64)
    for k in range(nb):
        pv[k] = ~np.uint64(0)
    top = one << np.uint64(63)
    last = one << np.uint64((m - 1) & 63)
    first_hin = 0 if semiglobal else 1
    score = m
    best = m
    for j in range(n):
        c = text[j]
        hin = first_hin
        for k in range(nb):
            p = pv[k]
            q = mv[k]
            eq = peq[c, k]
            xv = eq | q
            if hin < 0:
                eq |= one
            xh = (((eq & p) + p) ^ p) | eq
            ph = q | ~(xh | p)
            mh = p & xh
            high = last if k == nb - 1 else top
            hout = 0
            if ph & high:
                hout = 1
            elif mh & high:
                hout = -1
            ph <<= one
            mh <<= one
            if hin < 0:
                mh |= one
            elif hin > 0:
                ph |= one
            pv[k] = mh | ~(xv | ph)
            mv[k] = ph & xv
            hin = hout
        score += hin
        if score < best:
            best = score
    return best if semiglobal else score


@numba.njit(cache=True, nogil=True)
def _pairwise(ids_a, offs_a, ids_b, offs_b, sigma, semiglobal):
    na, nb = offs_a.shape[0] - 1, offs_b.shape[0] - 1
    out = np.empty((na, nb), dtype=np.int32)
    for x in range(na):
        a = ids_a[offs_a[x] : offs_a[x + 1]]
        for y in range(nb):
            b = ids_b[offs_b[y] : offs_b[y + 1]]
            if not semiglobal:
                if a.shape[0] <= b.shape[0]:
                    out[x, y] = _myers(a, b, sigma, False)
                else:
                    out[x, y] = _myers(b, a, sigma, False)
            elif a.shape[0] <= b.shape[0]:
                out[x, y] = _myers(a, b, sigma, True)
            else:
                out[x, y] = _myers(b, a, sigma, True)
    return out


def _dense(*arrays: np.ndarray) -> tuple[list[np.ndarray], int]:
    """Remap code points to dense ids shared across ``arrays``."""
    joined = np.concatenate(arrays) if arrays else np.zeros(0, dtype=np.int32)
    if joined.size == 0:
        return [a.astype(np.int32) for a in arrays], 1
    alphabet, inverse = np.unique(joined, return_inverse=True)
    inverse = inverse.astype(np.int32).ravel()
    out, start = [], 0
    for a in arrays:
        out.append(inverse[start : start + a.shape[0]])
        start += a.shape[0]
    return out, len(alphabet)


# -- public API ------------------------------------------------------------


def align(reference: str, hypothesis: str) -> AlignmentCounts:
    """Counts of one optimal unit-cost edit script from reference to hypothesis.

    >>> align("abc", "abd")
    AlignmentCounts(substitutions=1, deletions=0, insertions=0, correct=2)
    """
    if reference == hypothesis:
        return AlignmentCounts(correct=len(reference))
    if not reference:
        return AlignmentCounts(insertions=len(hypothesis))
    if not hypothesis:
        return AlignmentCounts(deletions=len(reference))
    a, b = codes(reference), codes(hypothesis)
    n, m = len(a), len(b)
    if n * m <= SMALL_PROBLEM:
        s, d, i, c = _global_counts(a, b)
        return AlignmentCounts(int(s), int(d), int(i), int(c))
    (ia, ib), sigma = _dense(a, b)
    dist = int(_myers(ia, ib, sigma, False) if n <= m else _myers(ib, ia, sigma, False))
    # every optimal path keeps |j - i| + |(m - j) - (n - i)| <= dist
    slack = (dist - abs(m - n)) // 2
    klo, khi = min(0, m - n) - slack, max(0, m - n) + slack
    if (khi - klo + 1) * 3 < m + 1:
        s, d, i, c = _banded_counts(a, b, klo, khi)
    else:
        s, d, i, c = _global_counts(a, b)
    return AlignmentCounts(int(s), int(d), int(i), int(c))


def edit_distance(a: str, b: str) -> int:
    if a == b:
        return 0
    ca, cb = codes(a), codes(b)
    (ia, ib), sigma = _dense(ca, cb)
    if len(ia) > len(ib):
        ia, ib = ib, ia
    return int(_myers(ia, ib, sigma, False))


def semiglobal_span(inner: str, outer: str) -> tuple[int, int, int]:
    """Locate ``inner`` inside ``outer`` with free end gaps on ``outer``.

    Returns ``(distance, start, end)``; ``outer[start:end]`` is the matched
    span.  Among equally good end positions the leftmost one wins.
    """
    d, start, end = _semiglobal_span(codes(inner), codes(outer))
    return int(d), int(start), int(end)


def pairwise_distances(a: Sequence[str], b: Sequence[str], *, semiglobal: bool = False) -> np.ndarray:
    """Distance matrix between every string of ``a`` and every string of ``b``.

    With ``semiglobal`` the shorter string of each pair is aligned inside the
    longer one; on equal lengths the ``a`` side is the inner string.
    """
    if not a or not b:
        return np.zeros((len(a), len(b)), dtype=np.int32)
    ca, oa = pack(a)
    cb, ob = pack(b)
    (ia, ib), sigma = _dense(ca, cb)
    return _pairwise(ia, oa, ib, ob, sigma, semiglobal)
