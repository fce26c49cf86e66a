"""Independent reference implementations used to freeze expected values.

Nothing here imports the package; each oracle is deliberately naive.
"""

from __future__ import annotations


MATCH, SUB, DEL, INS = "M", "S", "D", "I"
_RANK = str.maketrans({MATCH: "0", SUB: "1", DEL: "2", INS: "3"})


def all_scripts(ref: str, hyp: str):
    """Every edit script from ref to hyp, as op strings read from the end."""
    def walk(i, j):
        if i == 0 and j == 0:
            yield ""
            return
        if i and j:
            op = MATCH if ref[i - 1] == hyp[j - 1] else SUB
            for rest in walk(i - 1, j - 1):
                yield op + rest
        if i:
            for rest in walk(i - 1, j):
                yield DEL + rest
        if j:
            for rest in walk(i, j - 1):
                yield INS + rest

    yield from walk(len(ref), len(hyp))


def _counts(script: str) -> tuple[int, int, int, int]:
    return (script.count(SUB), script.count(DEL), script.count(INS), script.count(MATCH))


def _cost(script: str) -> int:
    return len(script) - script.count(MATCH)


def enumerate_counts(ref: str, hyp: str) -> tuple[int, int, int, int]:
    """Full enumeration; feasible only for short strings (<= 6 chars each)."""
    # preferred script: minimal cost, then lexicographic in M < S < D < I read from the end
    best = min(all_scripts(ref, hyp), key=lambda s: (_cost(s), s.translate(_RANK)))
    return _counts(best)


def search_counts(ref: str, hyp: str) -> tuple[int, int, int, int]:
    """Iterative-deepening search over edit scripts.

    For budget k = 0, 1, ... explore scripts backwards from the end of both
    strings, trying ops in preference order; the first complete script
    found is the preferred minimal-cost one.  Failed (i, j, budget) states
    are memoized so lengths up to 12 stay cheap.
    """
    failed: set[tuple[int, int, int]] = set()

    def dfs(i, j, budget):
        if i == 0 and j == 0:
            return ""
        if abs(i - j) > budget or (i, j, budget) in failed:
            return None
        options = []
        if i and j:
            same = ref[i - 1] == hyp[j - 1]
            options.append((MATCH if same else SUB, i - 1, j - 1, 0 if same else 1))
        if i:
            options.append((DEL, i - 1, j, 1))
        if j:
            options.append((INS, i, j - 1, 1))
        for op, ni, nj, cost in options:
            if cost <= budget:
                rest = dfs(ni, nj, budget - cost)
                if rest is not None:
                    return op + rest
        failed.add((i, j, budget))
        return None

    for k in range(len(ref) + len(hyp) + 1):
        script = dfs(len(ref), len(hyp), k)
        if script is not None:
            return _counts(script)
    raise AssertionError("unreachable")


def wagner_fischer(a: str, b: str) -> int:
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def semiglobal_brute(inner: str, outer: str) -> int:
    """Min distance of inner to any substring of outer."""
    return min(
        wagner_fischer(inner, outer[s:e]) for s in range(len(outer) + 1) for e in range(s, len(outer) + 1)
    )
