"""Open/closed classification of the atoms on the default probe grid, with witnesses."""
import argparse
import time

from multiteam.parser import parse_formula
from multiteam.topology import ProbeGrid, classify_atom, companion_check, validate_witness

ATOMS = ["minc(x; y)", "mindep(x; y)", "fork[<=1/2](x; y)", "fork[>=1/2](x; y)", "fork[<2/3](x; y)",
         "fork[>1/3](x; y)", "dep(x; y)", "excl(x; y)", "x = y", "x != y", "P(x)"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--denominator", type=int, default=8)
    ap.add_argument("--support", type=int, default=4)
    ap.add_argument("--companions", action="store_true", help="also run the companion checks")
    args = ap.parse_args()
    probe = ProbeGrid(max_support=args.support, denominator=args.denominator)
    for src in ATOMS:
        atom = parse_formula(src)
        t = time.monotonic()
        v = classify_atom(atom, probe)
        print(f"{src:20} {v.claimed:8} points={v.points:<6} {time.monotonic() - t:5.1f}s")
        for w in (v.not_open, v.not_closed):
            if w is not None:
                print(f"    {type(w).__name__}: {w.describe()} valid={validate_witness(atom, w)}")
    atom = parse_formula("fork[<1/2](x; y)")
    v = classify_atom(atom, ProbeGrid(universe=3, max_support=3, denominator=4))
    print(f"{'fork[<1/2](x; y)':20} {v.claimed:8} points={v.points:<6} (|A|=3)")
    if v.not_closed is not None:
        print(f"    NotClosedWitness: {v.not_closed.describe()}")
    if args.companions:
        for src in ("dep(x; y)", "excl(x; y)", "fork[<1](x; y)", "minc(x; y)", "mindep(x; y)"):
            r = companion_check(parse_formula(src))
            print(f"{src:20} invariant={r.weight_invariant} downwards={r.downwards_closed} "
                  f"companions={r.companions} consistent={r.consistent} {' '.join(r.notes)}")


if __name__ == "__main__":
    main()
