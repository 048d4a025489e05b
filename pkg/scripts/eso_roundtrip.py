"""Translate a formula pool to ESO sentences, normalize, and compare truth values.

Each sentence is checked with the SMT route; ``--enumerate`` adds the
independent enumeration route on the smaller instances.
"""
import argparse
import time

from multiteam.eso import MultiteamStructure, Checker, solve_enumerate, translate_mts_to_eso
from multiteam.eso.normal import normal_form, split_prefix, clauses_of
from multiteam.evaluator import evaluate
from multiteam.grid import multiteams, structures
from multiteam.pools import formula_pool

XY = ("x", "y")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--enumerate", action="store_true")
    args = ap.parse_args()
    pool = formula_pool(args.seed, args.n, 3, kinds=("dep", "excl", "minc", "minc_cond"))
    bad = total = 0
    t0 = time.monotonic()
    for i, phi in enumerate(pool):
        psi = translate_mts_to_eso(phi, XY)
        nf = normal_form(psi)
        _, body = split_prefix(nf.matrix)
        for st in structures({"P": 1}, (2,)):
            direct, normal = Checker(psi, st), Checker(nf, st)
            for m in multiteams(XY, 2, 2, 2):
                total += 1
                truth = evaluate(st, m, phi)
                ok = direct.holds(dict(m.rows)) == truth
                if m.size:
                    ok &= normal.holds(dict(m.rows)) == truth
                if args.enumerate and m.size <= 2 and not psi.quantifiers:
                    ok &= solve_enumerate(psi, MultiteamStructure.from_multiteam(st, m)) == truth
                if not ok:
                    bad += 1
                    print("disagreement:", phi, m)
        print(f"{i:3} functions={len(nf.quantifiers)} clauses={len(clauses_of(body))}  {phi}")
    print(f"{total} instances, {bad} disagreements, {time.monotonic() - t0:.1f}s")


if __name__ == "__main__":
    main()
