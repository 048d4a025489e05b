import itertools

import pytest
from hypothesis import given, strategies as st

from multiteam.core import Multiteam, Structure, Team, restrict
from multiteam.evaluator import (CapExceeded, EvalOptions, Evaluator, OracleCaps,
                                 TimeBudgetExceeded, eval_oracle, eval_team, evaluate, is_flat,
                                 validate_annotation)
from multiteam.fo import holds
from multiteam.parser import parse_formula, parse_multiteam
from multiteam.pools import formula_pool
from multiteam.syntax import Exists, Forall, disj

from conftest import multiteams_st
import oracles

ST = Structure(2)
TOP = Multiteam((), {(): 1})
EULER = parse_formula("A v. A w. (E(v, w) -> minc(v; w))")


def M(text):
    return parse_multiteam(text)


def ev(src, m, st_=ST, **kw):
    return evaluate(st_, m, parse_formula(src), EvalOptions(**kw))


@pytest.mark.parametrize("edges,expect", [({(0, 1), (1, 2), (2, 0)}, True), ({(0, 1)}, False)])
def test_euler_example(edges, expect):
    g = Structure(3, {"E": edges}, {"E": 2})
    assert evaluate(g, TOP, EULER) == expect == oracles.euler_oracle(3, edges)


def test_euler_annotation_validates():
    g = Structure(3, {"E": {(0, 1), (1, 2), (2, 0)}})
    res = eval_oracle(g, TOP, EULER, OracleCaps(max_size=30, max_formula_size=60))
    assert res.holds
    assert validate_annotation(g, TOP, EULER, res.annotation)


def test_existential_per_occurrence():
    assert ev("E y. A z. minc(x z; x y)", Multiteam(("x",), {(0,): 2}))


def test_forall_does_not_imply_exists():
    assert ev("A x. fork[<=1/2](; x)", TOP)
    assert not ev("E x. fork[<=1/2](; x)", TOP)


def test_cover_is_not_idempotent():
    m = M("vars x y / 0 1 : 1 / 1 0 : 2")
    src = "(minc(x; y) | minc(x; y))"
    assert ev(src, m, disjunction="cover")
    assert not ev(src, m)
    assert not ev("minc(x; y)", m)


def test_empty_multiteam_satisfies_everything():
    for f in formula_pool(3, 30):
        assert evaluate(ST, Multiteam(("x", "y")), f)
        assert eval_oracle(ST, Multiteam(("x", "y")), f).holds


def test_implication_contract():
    zeta = parse_formula("x = y")
    chi = parse_formula("minc(x; y)")
    from multiteam.core import filter_formula
    from multiteam.syntax import expand_implication
    imp = expand_implication(zeta, chi)
    for m in _grid():
        assert evaluate(ST, m, imp) == evaluate(ST, filter_formula(m, zeta, ST), chi)


def _grid(n=2, support=3, mult=2):
    from multiteam.grid import multiteams
    return multiteams(("x", "y"), n, support, mult)


def test_free_variable_outside_domain():
    with pytest.raises(ValueError):
        ev("dep(x; z)", M("vars x y / 0 0 : 1"))


def test_caps():
    with pytest.raises(CapExceeded):
        Evaluator(Structure(5), parse_formula("x = x"), EvalOptions(max_universe=3))
    with pytest.raises(CapExceeded):
        eval_oracle(Structure(5), M("vars x / 0 : 1"), parse_formula("x = x"))


def test_time_budget():
    phi = parse_formula("(mindep(x; y) | mindep(x; y) | mindep(y; x))")
    big = Multiteam(("x", "y"), {(a, b): 3 + a + 2 * b for a in range(3) for b in range(3)})
    with pytest.raises(TimeBudgetExceeded):
        evaluate(Structure(3), big, phi, EvalOptions(time_budget=0.2))


# --- team semantics ---

def test_const_or_const():
    f = parse_formula("(dep(; x) | dep(; x))")
    assert eval_team(Structure(3), Team(("x",), {(0,), (1,)}), f)
    assert not eval_team(Structure(3), Team(("x",), {(0,), (1,), (2,)}), f)


def test_lax_strict_differ():
    f = parse_formula("E z. anon(x; z)")
    found = None
    for k in range(1, 4):
        for rows in itertools.combinations([(a, b) for a in range(2) for b in range(2)], k):
            t = Team(("x", "y"), set(rows))
            if eval_team(ST, t, f, "lax") != eval_team(ST, t, f, "strict"):
                found = t
                break
        if found:
            break
    assert found is not None
    assert eval_team(ST, found, f, "lax") and not eval_team(ST, found, f, "strict")


def test_team_semantics_rejects_multiteam_atoms():
    with pytest.raises(ValueError):
        eval_team(ST, Team(("x", "y"), {(0, 0)}), parse_formula("minc(x; y)"))


@given(multiteams_st(max_rows=4), st.sampled_from(["x = y", "(x != y | P(x))", "A z. (z = x | z != x)"]),
       st.sampled_from(["lax", "strict"]))
def test_flat_team_truth_is_pointwise(m, src, mode):
    st_ = Structure(2, {"P": {(1,)}})
    f = parse_formula(src)
    pointwise = all(holds(st_, s, f) for s, _ in m.assignments())
    assert eval_team(st_, m.support(), f, mode) == pointwise == evaluate(st_, m, f)


# --- flatness, oracle agreement and postulates ---

def test_is_flat():
    assert is_flat(parse_formula("(x = y & E(x, y))"))
    assert not is_flat(parse_formula("dep(x; y)"))


POOL = formula_pool(5, 40, depth=2)


@given(st.sampled_from(POOL), multiteams_st(max_rows=2, max_mult=2))
def test_oracle_agrees(f, m):
    st_ = Structure(2, {"P": {(0,)}})
    res = eval_oracle(st_, m, f)
    assert evaluate(st_, m, f) == res.holds
    if res.holds:
        assert validate_annotation(st_, m, f, res.annotation)


@given(st.sampled_from(POOL), multiteams_st(("x", "y", "u"), max_rows=3, max_mult=2))
def test_locality(f, m):
    st_ = Structure(2, {"P": {(1,)}})
    assert evaluate(st_, m, f) == evaluate(st_, restrict(m, ["x", "y"]), f)


UNION_POOL = formula_pool(8, 30, depth=2, kinds=("minc", "fork"))


@given(st.sampled_from(UNION_POOL), multiteams_st(max_rows=3, max_mult=2))
def test_union_closed_idempotent_disjunction(f, m):
    st_ = Structure(2, {"P": {(1,)}})
    if _union_closed(f):
        assert evaluate(st_, m, f) == evaluate(st_, m, disj(f, f))


def _union_closed(f):
    from multiteam.syntax import walk, MultiteamAtom
    return all(not isinstance(a, MultiteamAtom) or a.kind in ("minc", "minc_cond")
               or (a.kind == "fork" and a.cmp in ("<", "<="))
               for a in walk(f))


@given(st.sampled_from([parse_formula(s) for s in
                        ("minc(x; y)", "fork[<=1/2](x; y)", "mindep(x; y)", "dep(x; y)", "excl(x; y)")]),
       st.sampled_from([Exists, Forall]), multiteams_st(max_mult=2))
def test_dummy_quantification(atom, q, m):
    assert evaluate(ST, m, q("z", atom)) == evaluate(ST, m, atom)


def test_flat_fast_path_matches_slow_path():
    f = parse_formula("A z. (x = z | y != z | P(z))")
    st_ = Structure(2, {"P": {(1,)}})
    for m in _grid():
        a = evaluate(st_, m, f)
        b = evaluate(st_, m, f, EvalOptions(prune=False, restrict=False))
        assert a == b == eval_oracle(st_, m, f).holds
