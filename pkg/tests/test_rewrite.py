import pytest
from hypothesis import given, strategies as st

from multiteam.atoms import atom_holds
from multiteam.core import Multiteam, Structure, Team, filter_formula, mt_sum
from multiteam.evaluator import eval_team, evaluate
from multiteam.grid import GridSpec, multiteams
from multiteam.parser import parse_formula, parse_multiteam
from multiteam.pools import formula_pool
from multiteam.rewrite import (check_closure, check_equiv, half_operator, phi_sub,
                               rewrite_restricted_inclusion, team_version, tsv_atom,
                               witness_family)
from multiteam.syntax import FALSE, TRUE, MultiteamAtom, TeamAtom, expand_implication

from conftest import multiteams_st
import oracles

ST = Structure(2)
MINC = MultiteamAtom("minc", ("x",), ("y",))
SMALL = GridSpec((2,), 3, 2)


def M(text):
    return parse_multiteam(text)


def test_implication_on_euler_instances():
    zeta, chi = parse_formula("E(v, w)"), parse_formula("minc(v; w)")
    imp = expand_implication(zeta, chi)
    for edges in ({(0, 1), (1, 2), (2, 0)}, {(0, 1)}):
        g = Structure(3, {"E": edges}, {"E": 2})
        for m in multiteams(("v", "w"), 3, 3, 1):
            assert evaluate(g, m, imp) == evaluate(g, filter_formula(m, zeta, g), chi)


def test_implication_trivial_guards():
    chi = parse_formula("minc(x; y)")
    for m in multiteams(("x", "y"), 2, 3, 2):
        assert evaluate(ST, m, expand_implication(TRUE, chi)) == evaluate(ST, m, chi)
        assert evaluate(ST, m, expand_implication(FALSE, chi))


def test_implication_rejects_atoms_in_guard():
    with pytest.raises(ValueError):
        expand_implication(parse_formula("dep(x; y)"), parse_formula("x = y"))


def test_restricted_inclusion_rewrites():
    assert rewrite_restricted_inclusion(("x",), ("y",), TRUE) == MINC
    assert rewrite_restricted_inclusion(("x",), ("y",), FALSE) == TRUE
    for alpha in ("x = x", "P(x)", "!P(x)"):
        a = parse_formula(alpha)
        direct = MultiteamAtom("minc_cond", ("x",), ("y",), cond=a)
        r = check_equiv(direct, rewrite_restricted_inclusion(("x",), ("y",), a), SMALL)
        assert r.equivalent, r.counterexample


def test_phi_sub_examples():
    f = phi_sub(("x",), ("y",))
    assert evaluate(ST, M("vars x y / 0 1 : 1 / 1 0 : 1"), f)
    assert not evaluate(ST, M("vars x y / 0 1 : 1 / 1 0 : 2"), f)
    one = Structure(1)
    for m in multiteams(("x", "y"), 1, 1, 3):
        assert evaluate(one, m, f) and evaluate(one, m, MINC)


def test_phi_sub_loose_variant_is_weaker():
    loose = phi_sub(("x",), ("y",), variant="loose")
    m = M("vars x y / 0 0 : 1 / 0 1 : 1")
    assert evaluate(ST, m, loose) and not evaluate(ST, m, MINC)


def test_phi_sub_small_grid():
    r = check_equiv(MINC, phi_sub(("x",), ("y",)), GridSpec((2,), 2, 2))
    assert r.equivalent


ZERO = Structure(2, {"Z": {(0,)}})  # Z(y) stands for y = 0


@pytest.mark.parametrize("text,expect", [
    ("vars y / 0 : 2 / 1 : 2", True),
    ("vars y / 0 : 1 / 1 : 3", False),
    ("vars y / 0 : 3", False),
])
def test_half_operator_examples(text, expect):
    m = M(text)
    assert evaluate(ZERO, m, half_operator(parse_formula("Z(y)"))) == expect
    assert oracles.half_oracle(m.rows, lambda sub: all(r[0] == 0 for r in sub)) == expect


def test_tsv_closed_forms():
    assert tsv_atom(parse_formula("mindep(x; y)")) == TeamAtom("indep", ("x",), ("y",))
    assert tsv_atom(parse_formula("fork[<=1/2](x z; y)")) == TeamAtom("anon", ("x", "z"), ("y",))
    assert tsv_atom(MINC) == TeamAtom("cycle", ("x",), ("y",))
    t = Team(("x", "y"), {(0, 0), (0, 1), (1, 1)})
    assert not eval_team(ST, t, tsv_atom(MINC))


@given(multiteams_st(("x", "y", "z"), max_rows=3, max_mult=3),
       st.sampled_from(["mindep(x; y)", "fork[<=1/2](x; y)", "minc(x; y)", "fork[>1/3](x; y)",
                        "minc[x = y](x; z)", "mindep(z | x; y)"]))
def test_tsv_soundness(m, src):
    atom = parse_formula(src)
    if atom_holds(atom, m, ST):
        assert eval_team(ST, m.support(), tsv_atom(atom), "lax")


def test_tsv_non_converse_witness():
    dom = ("u", "w", "x", "y")
    # rows written as xyuw in the order of the statement
    rows = {(0, 1, 0, 1), (1, 0, 0, 1), (1, 0, 1, 0)}
    t = Team(dom, {(u, w, x, y) for x, y, u, w in rows})
    psi = parse_formula("(minc(x; y) & minc(u; w))")
    assert eval_team(ST, t, team_version(psi))
    found = False
    import itertools
    srt = sorted(t.rows)
    for ns in itertools.product(range(1, 7), repeat=len(srt)):
        if evaluate(ST, Multiteam(dom, dict(zip(srt, ns))), psi):
            found = True
            break
    assert not found


def test_check_equiv_examples():
    r = check_equiv(parse_formula("mindep(x; y)"), MINC, SMALL)
    assert not r.equivalent
    st_, m = r.counterexample
    assert evaluate(st_, m, parse_formula("mindep(x; y)")) != evaluate(st_, m, MINC)
    assert check_closure(parse_formula("(dep(x; y) | dep(x; y))"), "downward", SMALL).holds


def test_mk_separates_independence_from_inclusion():
    m = mt_sum(witness_family(1), witness_family(2))
    assert not evaluate(ST, m, parse_formula("mindep(x; y)"))


def test_witness_family():
    assert witness_family(1) == M("vars x y / 0 0 / 0 1 / 1 0 / 1 1")
    assert all(witness_family(k).size == (k + 1) ** 2 for k in range(1, 6))
    with pytest.raises(ValueError):
        witness_family(0)


def test_check_equiv_parallel_matches_serial():
    a, b = parse_formula("minc(x; y)"), parse_formula("fork[<=1/2](x; y)")
    s = check_equiv(a, b, SMALL)
    p = check_equiv(a, b, SMALL, jobs=2, fixed_structures=[ST, Structure(3)])
    s2 = check_equiv(a, b, SMALL, fixed_structures=[ST, Structure(3)])
    assert (p.equivalent, p.counterexample, p.truth) == (s2.equivalent, s2.counterexample, s2.truth)
    assert not s.equivalent


@pytest.mark.parametrize("prop", ["downward", "team-only"])
def test_closure_counterexamples_revalidate(prop):
    phi = parse_formula("minc(x; y)")
    r = check_closure(phi, prop, SMALL)
    assert not r.holds
    c = r.counterexample
    a = evaluate(c["structure"], c["multiteam"], phi)
    other = c.get("sub", c.get("other"))
    assert a and not evaluate(c["structure"], other, phi) if prop == "downward" else \
        a != evaluate(c["structure"], other, phi)


def test_support_only_iff_downward_closed():
    for f in formula_pool(13, 40, depth=2, kinds=("dep", "minc")):
        assert check_closure(f, "downward", SMALL).holds == check_closure(f, "team-only", SMALL).holds


def test_companions_for_downward_closed_pool():
    st_ = Structure(2, {"P": {(1,)}})
    for f in formula_pool(17, 25, depth=2, kinds=("dep", "excl")):
        tv = team_version(f)
        for m in multiteams(("x", "y"), 2, 3, 2):
            assert evaluate(st_, m, f) == eval_team(st_, m.support(), tv, "lax")


def test_team_compatibility_with_bounded_multiplicities():
    f = parse_formula("(dep(x; y) | excl(x; y))")
    for m in multiteams(("x", "y"), 2, 3, 1):
        t = m.support()
        some = any(evaluate(ST, Multiteam(t.domain, {r: k for r in t.rows}), f) for k in (1, 2))
        assert eval_team(ST, t, f, "lax") == some


@pytest.mark.parametrize("src", ["fork[>1/3](; x)", "fork[>=1/2](x; y)", "fork[>1/3](x; y)",
                                 "fork[>=2/3](y; x)"])
def test_fork_atoms_ts_downward_on_their_own_variables(src):
    assert check_closure(parse_formula(src), "ts-downward", SMALL).holds


def test_fork_ts_downward_fails_with_extra_variables():
    # pr(x=0) drops from 1/2 to 1/3 once the row xy=01 is removed
    f = parse_formula("fork[>1/3](; x)")
    m, sub = M("vars x y / 0 0 : 1 / 0 1 : 1 / 1 0 : 2"), M("vars x y / 0 0 : 1 / 1 0 : 2")
    assert evaluate(ST, m, f) and not evaluate(ST, sub, f)


def test_fork_ts_downward_fails_through_disjunction():
    f = parse_formula("(x != y | fork[>1/3](; y))")
    m, sub = M("vars x y / 0 0 : 2 / 0 1 : 1 / 1 1 : 1"), M("vars x y / 0 0 : 2 / 1 1 : 1")
    # the x = y rows must all go right; with 01 kept, y is balanced 2:2, without it 2:1
    assert oracles.column_counts(m.rows, ("x", "y"), ("y",)) == {(0,): 2, (1,): 2}
    assert oracles.column_counts(sub.rows, ("x", "y"), ("y",)) == {(0,): 2, (1,): 1}
    assert evaluate(ST, m, f) and not evaluate(ST, sub, f)
    r = check_closure(f, "ts-downward", SMALL)
    assert not r.holds
