"""Closure properties of generated formula pools, fragment by fragment.

Prints the failure count per fragment and property and the first counterexample.
"""
import argparse

from multiteam.grid import GridSpec
from multiteam.pools import formula_pool
from multiteam.rewrite import check_closure

FRAGMENTS = [
    ("dep/excl", dict(kinds=("dep", "excl")), ["downward", "union"]),
    ("minc/fork<=/fork<", dict(kinds=("minc", "fork"), fork_ops=("<=", "<")), ["union", "downward"]),
    ("fork>=/fork>", dict(kinds=("fork",), fork_ops=(">=", ">")), ["ts-downward"]),
    ("atom-free", dict(kinds=()), ["flat"]),
    ("all atoms", dict(), ["empty", "scalar"]),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", default="A=2,support=3,mult=2")
    ap.add_argument("--n", type=int, default=100)
    args = ap.parse_args()
    grid = GridSpec.parse(args.grid)
    for seed, (name, kw, props) in enumerate(FRAGMENTS, start=600):
        pool = formula_pool(seed, args.n, depth=3, **kw)
        for prop in props:
            fails = []
            for f in pool:
                r = check_closure(f, prop, grid, domain=("x", "y"))
                if not r.holds:
                    fails.append((f, r.counterexample))
            print(f"{name:20} {prop:12} {len(fails)}/{len(pool)} fail")
            if fails:
                f, cx = fails[0]
                print(f"    first: {f}")
                print(f"    {cx}")


if __name__ == "__main__":
    main()
