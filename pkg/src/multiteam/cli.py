"""Batch command line.

Every command prints a short human-readable summary followed by a
machine-readable block of ``key=value`` lines introduced by ``---``. Inside
the block, structures and multiteams are serialized on one line with `` / ``
as the line separator, which the parsers accept back.

Exit codes: 0 satisfied / equivalent / confirmed, 1 refuted (a witness is
printed), 2 usage, input or cap errors.

Inputs are file paths; ``-`` reads standard input and ``text:...`` passes
the content inline.
"""
from __future__ import annotations

import argparse
import contextlib
import io
import sys
from typing import Optional

from .core import Multiteam, Structure, getter, mt_sum
from .evaluator import CapExceeded, EvalOptions, OracleCaps, eval_oracle, eval_team, evaluate
from .grid import GridSpec, multiteams, structures
from .parser import (ParseError, parse_formula, parse_multiteam, parse_structure,
                     render_formula, render_multiteam, render_structure)
from .rewrite import CLOSURE_PROPERTIES, check_closure, check_equiv, team_version, witness_family
from .syntax import MultiteamAtom, free_vars, relation_signature


class UsageError(Exception):
    pass


def _read(arg: str) -> str:
    if arg.startswith("text:"):
        return arg[5:]
    if arg == "-":
        return sys.stdin.read()
    try:
        with open(arg) as fh:
            return fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {arg}: {e.strerror}") from None


def _one_line(text: str) -> str:
    return " / ".join(line for line in text.splitlines() if line.strip())


class Report:
    def __init__(self):
        self.lines: list[str] = []
        self.fields: list[tuple[str, object]] = []

    def say(self, text: str = ""):
        self.lines.append(text)

    def put(self, key: str, value):
        self.fields.append((key, value))

    def render(self) -> str:
        out = list(self.lines)
        out.append("---")
        for k, v in self.fields:
            if isinstance(v, bool):
                v = str(v).lower()
            out.append(f"{k}={v}")
        return "\n".join(out) + "\n"


def _instance(rep: Report, prefix: str, st: Optional[Structure], m):
    if st is not None:
        rep.put(f"{prefix}structure", _one_line(render_structure(st)))
    rep.put(f"{prefix}multiteam", _one_line(render_multiteam(m)))


def _options(args) -> EvalOptions:
    return EvalOptions(memo_budget=args.memo_budget, max_universe=args.max_universe,
                       time_budget=args.time_budget)


def _formula(arg: str, allow_reserved: bool = True):
    return parse_formula(_read(arg).strip(), allow_reserved=allow_reserved)


def _structure_or_default(args, phi) -> Structure:
    if args.structure:
        return parse_structure(_read(args.structure))
    sig = relation_signature(phi)
    if sig:
        raise UsageError("the formula uses relations; pass --structure")
    return Structure(args.universe)


# --- commands --------------------------------------------------------------------------

def cmd_eval(args, rep: Report) -> int:
    phi = _formula(args.formula)
    st = _structure_or_default(args, phi)
    m = parse_multiteam(_read(args.multiteam))
    if args.semantics == "multiteam":
        if args.annotate:
            res = eval_oracle(st, m, phi, OracleCaps(max_universe=args.max_universe))
            truth = res.holds
        else:
            truth = evaluate(st, m, phi, _options(args))
    else:
        truth = eval_team(st, m.support(), phi, args.semantics.split("-", 1)[1])
    rep.say(f"{render_formula(phi)} is {'true' if truth else 'false'} on the given "
            f"{'multiteam' if args.semantics == 'multiteam' else 'team'}")
    if args.semantics == "multiteam" and args.annotate and truth:
        for path, sub in sorted(res.annotation.items()):
            rep.say(f"  node {'.'.join(map(str, path)) or 'root'}: {render_multiteam(sub, ', ')}")
    rep.put("verdict", truth)
    rep.put("instances_checked", 1)
    if not truth:
        _instance(rep, "witness_", st, m)
    return 0 if truth else 1


def cmd_eval_team(args, rep: Report) -> int:
    args.semantics = f"team-{args.mode}"
    args.annotate = False
    args.multiteam = args.team
    return cmd_eval(args, rep)


def _grid(args) -> GridSpec:
    try:
        return GridSpec.parse(args.grid)
    except ValueError as e:
        raise UsageError(f"bad --grid: {e}") from None


def _fixed(args):
    return [parse_structure(_read(args.structure))] if args.structure else None


def cmd_equiv(args, rep: Report) -> int:
    phi, psi = _formula(args.left), _formula(args.right)
    grid = _grid(args)
    r = check_equiv(phi, psi, grid, _options(args), args.jobs, _fixed(args), args.time_budget)
    rep.say(f"left:  {render_formula(phi)}")
    rep.say(f"right: {render_formula(psi)}")
    rep.say(f"{'equivalent' if r.equivalent else 'not equivalent'} on {r.checked} instances")
    rep.put("verdict", "equivalent" if r.equivalent else "different")
    rep.put("instances_checked", r.checked)
    if not r.equivalent:
        st, m = r.counterexample
        rep.say(f"counterexample: {render_multiteam(m, ', ')} (left {r.truth[0]}, right {r.truth[1]})")
        _instance(rep, "witness_", st, m)
        rep.put("witness_truth", f"{str(r.truth[0]).lower()},{str(r.truth[1]).lower()}")
        return 1
    return 0


def cmd_closure(args, rep: Report) -> int:
    phi = _formula(args.formula)
    r = check_closure(phi, args.property, _grid(args), _options(args), args.jobs, _fixed(args),
                      time_budget=args.time_budget)
    rep.say(f"{args.property} closure of {render_formula(phi)}: "
            f"{'no violation' if r.holds else 'violated'} ({r.checked} checks)")
    rep.put("verdict", "holds" if r.holds else "violated")
    rep.put("instances_checked", r.checked)
    if not r.holds:
        for k, v in r.counterexample.items():
            if isinstance(v, Structure):
                rep.put(f"witness_{k}", _one_line(render_structure(v)))
            elif isinstance(v, Multiteam):
                rep.put(f"witness_{k}", _one_line(render_multiteam(v)))
            else:
                rep.put(f"witness_{k}", v)
        return 1
    return 0


def _weights(m: Multiteam, domain) -> dict:
    """Rows of ``m`` reordered to the argument order ``domain``."""
    get = getter(m.domain, domain)
    return {get(r): c for r, c in m.rows.items()}


def _sig(psi) -> dict:
    from .eso.terms import relation_uses
    return relation_uses(psi.matrix)


def _dual_check(rep: Report, psi, domain, grid: GridSpec, nonempty: bool, ref, label) -> int:
    """Compare ``ref(st, m)`` with the sentence ``psi`` (decided by z3) on a grid."""
    from .eso.solve import Checker
    n = 0
    for st in structures(_sig(psi), grid.universe_sizes):
        ch = Checker(psi, st)
        for m in multiteams(domain, st.size, grid.max_support, grid.max_mult, not nonempty):
            n += 1
            a, b = ref(st, m), ch.holds(_weights(m, domain))
            if a != b:
                rep.say(f"disagreement on {render_multiteam(m, ', ')}: {label} {a}, sentence {b}")
                rep.put("verdict", "disagree")
                rep.put("instances_checked", n)
                _instance(rep, "witness_", st, m)
                return 1
    rep.say(f"agreement on {n} instances")
    rep.put("verdict", "agree")
    rep.put("instances_checked", n)
    return 0


def _domain(args, default):
    return tuple(args.domain.split(",")) if args.domain else tuple(default)


def _grid_from(text: str) -> GridSpec:
    try:
        return GridSpec.parse(text)
    except ValueError as e:
        raise UsageError(f"bad grid: {e}") from None


def cmd_translate(args, rep: Report) -> int:
    from .eso import translate_mts_to_eso
    from .eso.text import render_eso
    phi = _formula(args.formula)
    domain = _domain(args, sorted(free_vars(phi)))
    psi = translate_mts_to_eso(phi, domain, allow_mul=args.allow_mul)
    rep.say(render_eso(psi).rstrip())
    rep.put("sentence", _one_line(render_eso(psi)))
    if args.check:
        opts = _options(args)
        return _dual_check(rep, psi, domain, _grid_from(args.check), False,
                           lambda st, m: evaluate(st, m, phi, opts), "formula")
    rep.put("verdict", "translated")
    rep.put("instances_checked", 0)
    return 0


def cmd_normal_form(args, rep: Report) -> int:
    from .eso import holds_on_empty, normal_form
    from .eso.solve import Checker
    from .eso.text import parse_eso, render_eso
    psi = parse_eso(_read(args.sentence))
    nf = normal_form(psi)
    rep.say(render_eso(nf).rstrip())
    rep.put("sentence", _one_line(render_eso(nf)))
    if args.check:
        grid = _grid_from(args.check)
        bad = holds_on_empty(psi, list(structures(_sig(psi), grid.universe_sizes)))
        if bad is not None:
            rep.say("note: the input fails for the zero weight function on "
                    f"{_one_line(render_structure(bad))}, so only non-empty multiteams count")
        domain = tuple(f"v{i}" for i in range(psi.base_arity))
        cache: dict = {}

        def ref(st, m):
            if st not in cache:
                cache[st] = Checker(psi, st)
            return cache[st].holds(_weights(m, domain))
        return _dual_check(rep, nf, domain, grid, True, ref, "input")
    rep.put("verdict", "normalized")
    rep.put("instances_checked", 0)
    return 0


def cmd_back_translate(args, rep: Report) -> int:
    from .eso import is_normal_form, normal_form, translate_eso_to_mts
    from .eso.text import parse_eso
    psi = parse_eso(_read(args.sentence))
    if args.normalize and not is_normal_form(psi):
        psi = normal_form(psi)
    domain = _domain(args, [f"x{i}" for i in range(1, psi.base_arity + 1)])
    phi = translate_eso_to_mts(psi, domain)
    rep.say(render_formula(phi))
    rep.put("formula", render_formula(phi))
    if args.check:
        opts = _options(args)
        return _dual_check(rep, psi, domain, _grid_from(args.check), True,
                           lambda st, m: evaluate(st, m, phi, opts), "formula")
    rep.put("verdict", "translated")
    rep.put("instances_checked", 0)
    return 0


def cmd_tsv(args, rep: Report) -> int:
    phi = _formula(args.formula)
    tv = team_version(phi, args.bound)
    rep.say(render_formula(tv))
    rep.put("formula", render_formula(tv))
    if args.team:
        st = _structure_or_default(args, phi)
        t = parse_multiteam(_read(args.team)).support()
        truth = eval_team(st, t, tv, "lax")
        rep.say(f"team version is {'true' if truth else 'false'} on the given team")
        rep.put("verdict", truth)
        rep.put("instances_checked", 1)
        if not truth:
            _instance(rep, "witness_", st, Multiteam(t.domain, {r: 1 for r in t.rows}))
        return 0 if truth else 1
    rep.put("verdict", "translated")
    rep.put("instances_checked", 0)
    return 0


def cmd_topology(args, rep: Report) -> int:
    from .topology import ProbeGrid, classify_atom, validate_witness
    atom = _formula(args.formula)
    probe = ProbeGrid(universe=args.universe, max_support=args.support,
                      denominator=args.denominator, seq_len=args.seq_len)
    st = parse_structure(_read(args.structure)) if args.structure else None
    v = classify_atom(atom, probe, st)
    rep.say(f"{render_formula(atom)}: {v.claimed} (grid-relative, {v.points} probe points)")
    rep.put("verdict", v.claimed)
    rep.put("instances_checked", v.points)
    if v.not_open:
        rep.say(f"not open: {v.not_open.describe()}")
        rep.put("not_open_multiteam", _one_line(render_multiteam(v.not_open.m)))
        rep.put("not_open_direction", _direction(v.not_open.direction))
        rep.put("not_open_valid", validate_witness(atom, v.not_open))
    if v.not_closed:
        rep.say(f"not closed: {v.not_closed.describe()}")
        rep.put("not_closed_limit", _one_line(render_multiteam(v.not_closed.limit)))
        rep.put("not_closed_direction", _direction(v.not_closed.direction))
        rep.put("not_closed_valid", validate_witness(atom, v.not_closed))
    if args.expect:
        ok = v.claimed == args.expect
        rep.say(f"expected {args.expect}: {'confirmed' if ok else 'refuted'}")
        return 0 if ok else 1
    return 0


def _direction(d: dict) -> str:
    return ",".join(f"{''.join(map(str, r))}:{c:+d}" for r, c in sorted(d.items()))


def cmd_witness(args, rep: Report) -> int:
    if args.family != "Mk":
        raise UsageError(f"unknown family {args.family}")
    atom = MultiteamAtom("mindep", ("x",), ("y",))
    st = Structure(2)
    m = witness_family(args.k)
    label = f"M_{args.k}"
    if args.check_sum_with is not None:
        m = mt_sum(m, witness_family(args.check_sum_with))
        label += f" + M_{args.check_sum_with}"
    truth = evaluate(st, m, atom)
    rep.say(f"{label} = {render_multiteam(m, ', ')}")
    rep.say(f"x and y are {'independent' if truth else 'not independent'} on {label}")
    rep.put("verdict", truth)
    rep.put("instances_checked", 1)
    if not truth:
        _instance(rep, "witness_", st, m)
        rep.put("witness_formula", render_formula(atom))
    return 0 if truth else 1


# --- parser ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="multiteam", description=__doc__.split("\n\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--jobs", type=int, default=1, help="worker processes for grid searches")
    common.add_argument("--time-budget", type=float, default=None, help="seconds before giving up")
    common.add_argument("--memo-budget", type=int, default=400_000)
    common.add_argument("--max-universe", type=int, default=16)
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", parents=[common], help="truth on one multiteam")
    e.add_argument("--structure")
    e.add_argument("--universe", type=int, default=2, help="universe size without --structure")
    e.add_argument("--multiteam", required=True)
    e.add_argument("--formula", required=True)
    e.add_argument("--semantics", choices=("multiteam", "team-lax", "team-strict"),
                   default="multiteam")
    e.add_argument("--annotate", action="store_true",
                   help="print a witnessing annotation (slow reference search)")
    e.set_defaults(run=cmd_eval)

    t = sub.add_parser("eval-team", parents=[common], help="truth on a team")
    t.add_argument("--structure")
    t.add_argument("--universe", type=int, default=2)
    t.add_argument("--team", required=True, help="multiteam file; multiplicities are ignored")
    t.add_argument("--formula", required=True)
    t.add_argument("--mode", choices=("lax", "strict"), default="lax")
    t.set_defaults(run=cmd_eval_team)

    q = sub.add_parser("equiv", parents=[common], help="compare two formulas on a grid")
    q.add_argument("left")
    q.add_argument("right")
    q.add_argument("--grid", default="A=2,support=2,mult=2")
    q.add_argument("--structure", help="fix one structure instead of enumerating")
    q.set_defaults(run=cmd_equiv)

    c = sub.add_parser("closure", parents=[common], help="search a closure violation")
    c.add_argument("formula")
    c.add_argument("--property", choices=CLOSURE_PROPERTIES, required=True)
    c.add_argument("--grid", default="A=2,support=2,mult=2")
    c.add_argument("--structure")
    c.set_defaults(run=cmd_closure)

    tr = sub.add_parser("translate", parents=[common], help="multiteam formula to sentence")
    tr.add_argument("formula")
    tr.add_argument("--domain", help="comma separated variables fixing the argument order")
    tr.add_argument("--allow-mul", action="store_true", help="allow the independence encoding")
    tr.add_argument("--check", metavar="GRID", help="verify on a grid by dual evaluation")
    tr.set_defaults(run=cmd_translate)

    n = sub.add_parser("normal-form", parents=[common], help="normalize a sentence")
    n.add_argument("sentence")
    n.add_argument("--check", metavar="GRID", help="compare with the input on non-empty multiteams")
    n.set_defaults(run=cmd_normal_form)

    b = sub.add_parser("back-translate", parents=[common], help="sentence in normal form to formula")
    b.add_argument("sentence")
    b.add_argument("--domain")
    b.add_argument("--normalize", action="store_true", help="normalize first when needed")
    b.add_argument("--check", metavar="GRID", help="compare on non-empty multiteams")
    b.set_defaults(run=cmd_back_translate)

    v = sub.add_parser("tsv", parents=[common], help="team version of a formula")
    v.add_argument("formula")
    v.add_argument("--bound", type=int, default=6, help="multiplicity bound of the search fallback")
    v.add_argument("--team", help="evaluate the team version on this team")
    v.add_argument("--structure")
    v.add_argument("--universe", type=int, default=2)
    v.set_defaults(run=cmd_tsv)

    tp = sub.add_parser("topology", parents=[common], help="open/closed falsification of an atom")
    tp.add_argument("formula")
    tp.add_argument("--universe", type=int, default=2)
    tp.add_argument("--support", type=int, default=4)
    tp.add_argument("--denominator", type=int, default=8)
    tp.add_argument("--seq-len", type=int, default=8)
    tp.add_argument("--structure")
    tp.add_argument("--expect", choices=("open", "closed", "clopen", "neither"))
    tp.set_defaults(run=cmd_topology)

    w = sub.add_parser("witness", parents=[common], help="independence witness families")
    w.add_argument("--family", default="Mk", choices=("Mk",))
    w.add_argument("--k", type=int, required=True)
    w.add_argument("--check-sum-with", type=int)
    w.set_defaults(run=cmd_witness)
    return p


def run(argv=None) -> tuple[int, str]:
    """Exit code and report text."""
    err = io.StringIO()
    try:
        with contextlib.redirect_stderr(err):
            args = build_parser().parse_args(argv)
    except SystemExit as e:
        return (0 if e.code == 0 else 2), err.getvalue()
    if getattr(args, "jobs", 1) < 1:
        return 2, "error: --jobs must be positive\n"
    if getattr(args, "time_budget", None) is not None and args.time_budget <= 0:
        return 2, "error: --time-budget must be positive\n"
    rep = Report()
    try:
        code = args.run(args, rep)
    except CapExceeded as e:
        rep.say(f"error: {e}; partial progress is not a verdict")
        rep.put("verdict", "cap-exceeded")
        return 2, rep.render()
    except (UsageError, ParseError, ValueError, KeyError, RuntimeError) as e:
        return 2, f"error: {e}\n"
    return code, rep.render()


def main(argv=None) -> int:
    code, text = run(argv)
    (sys.stdout if code != 2 else sys.stderr).write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
