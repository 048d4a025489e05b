from fractions import Fraction

from hypothesis import settings, strategies as st

from multiteam.core import Multiteam, WeightedMultiteam, all_rows

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def multiteams_st(domain=("x", "y"), universe=2, max_mult=3, max_rows=None):
    rows = all_rows(domain, range(universe))
    return st.dictionaries(st.sampled_from(rows), st.integers(1, max_mult),
                           max_size=max_rows or len(rows)).map(lambda d: Multiteam(domain, d))


def weighted_st(domain=("x", "y"), universe=2, den=8, min_rows=1):
    rows = all_rows(domain, range(universe))
    w = st.integers(1, 2 * den).map(lambda k: Fraction(k, den))
    return st.dictionaries(st.sampled_from(rows), w, min_size=min_rows).map(
        lambda d: WeightedMultiteam(domain, d))


ACCEPTANCE: list = []  # (criterion, passed, detail) in run order


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    grouped: dict = {}
    for n, ok, detail in ACCEPTANCE:
        grouped.setdefault(n, []).append((ok, detail))
    for n in sorted(grouped):
        parts = grouped[n]
        ok = all(p[0] for p in parts)
        terminalreporter.write_line(
            f"{'PASS' if ok else 'FAIL'} criterion {n:>2}: " + " | ".join(d for _, d in parts))
