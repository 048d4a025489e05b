"""Independent brute-force oracles used by the tests.

Nothing here calls the package's decision procedures; they count rows by hand.
"""
import itertools
from collections import Counter
from functools import lru_cache


def column_counts(rows, domain, vs):
    idx = [domain.index(v) for v in vs]
    c = Counter()
    for r, w in rows.items():
        c[tuple(r[i] for i in idx)] += w
    return c


def minc_oracle(rows, domain, xs, ys):
    cx, cy = column_counts(rows, domain, xs), column_counts(rows, domain, ys)
    return all(cy[k] >= v for k, v in cx.items())


def minc_eq_oracle(rows, domain, xs, ys):
    """Equal counts per value, the form used for equal-length tuples."""
    return column_counts(rows, domain, xs) == column_counts(rows, domain, ys)


def mindep_oracle(rows, domain, xs, ys):
    n = sum(rows.values())
    cx, cy = column_counts(rows, domain, xs), column_counts(rows, domain, ys)
    cxy = column_counts(rows, domain, tuple(xs) + tuple(ys))
    return all(cx[a] * cy[b] == n * cxy[a + b] for a in cx for b in cy)


def cycle_oracle(team_rows, domain, xs, ys, bound):
    """Some multiplicities 1..bound on the team make xs and ys count the same."""
    rows = sorted(team_rows)
    for ns in itertools.product(range(1, bound + 1), repeat=len(rows)):
        if minc_eq_oracle(dict(zip(rows, ns)), domain, xs, ys):
            return True
    return False


def decomposes_into_sets(rows, domain, xs, ys):
    """rows is a sum of multiplicity-one parts, each satisfying the inclusion."""
    items = tuple(sorted(rows.items()))

    @lru_cache(maxsize=None)
    def go(state):
        left = {r: w for r, w in state if w}
        if not left:
            return True
        first = min(left)
        others = sorted(r for r in left if r != first)
        for k in range(len(others) + 1):
            for rest in itertools.combinations(others, k):
                part = {r: 1 for r in (first,) + rest}
                if minc_eq_oracle(part, domain, xs, ys):
                    nxt = tuple(sorted((r, w - part.get(r, 0)) for r, w in left.items()))
                    if go(nxt):
                        return True
        return False

    return go(items)


def euler_oracle(n, edges):
    out_d, in_d = Counter(a for a, _ in edges), Counter(b for _, b in edges)
    return all(out_d[v] == in_d[v] for v in range(n))


def half_oracle(rows, pred):
    """Some submultiset of exactly half the size has every row satisfying pred."""
    total = sum(rows.values())
    if total % 2:
        return False
    items = sorted(rows.items())
    for counts in itertools.product(*(range(w + 1) for _, w in items)):
        if sum(counts) == total // 2:
            sub = {r: c for (r, _), c in zip(items, counts) if c}
            if pred(sub):
                return True
    return False


def all_digraphs(n):
    pairs = [(a, b) for a in range(n) for b in range(n)]
    for k in range(len(pairs) + 1):
        for es in itertools.combinations(pairs, k):
            yield set(es)
