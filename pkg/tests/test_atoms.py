from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from multiteam.atoms import (atom_holds, cycle_decomposable, exists_multiplicities,
                             team_atom_holds, value_graph)
from multiteam.core import Multiteam, Structure, Team, mt_scale, mt_sum, restrict
from multiteam.parser import parse_formula, parse_multiteam
from multiteam.rewrite import witness_family
from multiteam.syntax import MultiteamAtom

from conftest import multiteams_st
import oracles

ST = Structure(2)
XY = ("x", "y")


def M(text):
    return parse_multiteam(text)


def holds(src, m):
    return atom_holds(parse_formula(src), m, ST)


def test_team_atom_examples():
    assert not holds("dep(x; y)", Team(XY, {(0, 0), (0, 1)}))
    assert holds("incl(x; y)", Team(XY, {(0, 0), (0, 1), (1, 1)}))
    assert holds("indep(x; y)", Team(XY, {(0, 0), (0, 1), (1, 0), (1, 1)}))


def test_multiteam_atom_examples():
    assert not holds("minc(x; y)", M("vars x y / 0 1 : 1 / 1 0 : 2"))
    assert holds("minc(x; y)", M("vars x y / 0 1 : 1 / 1 0 : 1"))
    m = M("vars x / 0 : 1 / 1 : 1")
    assert holds("fork[<=1/2](; x)", m)
    assert not holds("fork[<1/2](; x)", m)


def test_independence_family():
    for k in range(1, 6):
        assert holds("mindep(x; y)", witness_family(k))
        for ell in range(1, 6):
            assert holds("mindep(x; y)", mt_sum(witness_family(k), witness_family(ell))) == (k == ell)


def test_empty_multiteam_satisfies_everything():
    e = Multiteam(XY)
    for src in ("minc(x; y)", "fork[<0](x; y)", "mindep(x; y)", "mindep(x | y; x)", "dep(x; y)"):
        assert holds(src, e)


def test_fork_extreme_thresholds():
    m = M("vars x y / 0 1 : 1 / 1 0 : 3")
    assert holds("fork[<=1](x; y)", m)
    assert not holds("fork[<0](x; y)", m)


def test_length_mismatch_rejected():
    with pytest.raises(Exception):
        atom_holds(MultiteamAtom("minc", ("x",), ("x", "y")), M("vars x y / 0 1 : 1"), ST)


def test_value_graph_examples():
    t = Team(XY, {(0, 1), (1, 0)})
    assert value_graph(t, ["x"], ["y"]) == {((0,), (1,)), ((1,), (0,))}
    assert cycle_decomposable(value_graph(t, ["x"], ["y"]))
    assert not cycle_decomposable(value_graph(Team(XY, {(0, 0), (0, 1), (1, 1)}), ["x"], ["y"]))
    assert cycle_decomposable(set())


def test_cycle_matches_multiplicity_search():
    rows = [(a, b) for a in range(2) for b in range(2)]
    import itertools
    for k in range(1, 5):
        for sub in itertools.combinations(rows, k):
            t = Team(XY, set(sub))
            expect = oracles.cycle_oracle(set(sub), XY, ("x",), ("y",), 4)
            assert team_atom_holds(parse_formula("cycle(x; y)"), t) == expect


# --- properties over generated multiteams ---

ATOMS = [parse_formula(s) for s in (
    "dep(x; y)", "excl(x; y)", "incl(x; y)", "anon(x; y)", "indep(x; y)", "cycle(x; y)",
    "minc(x; y)", "minc(x y; y x)", "minc[x = y](x; y)", "fork[<=1/2](x; y)", "fork[<2/3](; y)",
    "fork[>=1/3](x; y)", "fork[>1/2](x; y)", "fork[=1/2](; x)", "mindep(x; y)", "mindep(z | x; y)")]

XYZ = ("x", "y", "z")


@given(multiteams_st(XYZ, max_rows=4), st.sampled_from(ATOMS), st.integers(1, 4))
def test_invariance_under_multiplication(m, atom, k):
    assert atom_holds(atom, m, ST) == atom_holds(atom, mt_scale(k, m), ST)


@given(multiteams_st(XYZ, max_rows=4))
def test_minc_symmetry_and_oracle(m):
    a = holds("minc(x; y)", m)
    assert a == holds("minc(y; x)", m) == oracles.minc_eq_oracle(m.rows, m.domain, ("x",), ("y",))


@given(multiteams_st(XYZ, max_rows=4))
def test_minc_prefix_law(m):
    whole = holds("minc(z x; z y)", m)
    parts = all(holds("minc(x; y)", Multiteam(m.domain, {r: w for r, w in m.rows.items() if r[2] == c}))
                for c in (0, 1))
    assert whole == parts


@given(multiteams_st(), multiteams_st())
def test_minc_subtraction_law(m, n):
    if holds("minc(x; y)", m) and holds("minc(x; y)", mt_sum(m, n)):
        assert holds("minc(x; y)", n)


@given(multiteams_st(max_mult=2))
def test_minc_decomposition(m):
    assert holds("minc(x; y)", m) == oracles.decomposes_into_sets(m.rows, m.domain, ("x",), ("y",))


UNION_CLOSED = [parse_formula(s) for s in (
    "minc(x; y)", "minc[x = y](x; y)", "minc[x != y](x; y)", "fork[<=1/2](x; y)", "fork[<2/3](x; y)")]


@given(multiteams_st(), multiteams_st(), st.sampled_from(UNION_CLOSED))
def test_union_closure(m, n, atom):
    if atom_holds(atom, m, ST) and atom_holds(atom, n, ST):
        assert atom_holds(atom, mt_sum(m, n), ST)


@given(multiteams_st(XYZ, max_rows=4), st.sampled_from(["dep(x; y)", "excl(x; y)", "dep(x z; y)"]),
       st.randoms(use_true_random=False))
def test_downward_closure_and_support_only(m, src, rnd):
    atom = parse_formula(src)
    sub = Multiteam(m.domain, {r: rnd.randint(0, w) for r, w in m.rows.items()})
    if atom_holds(atom, m, ST):
        assert atom_holds(atom, sub, ST)
    reweighted = Multiteam(m.domain, {r: rnd.randint(1, 5) for r in m.rows})
    assert atom_holds(atom, m, ST) == atom_holds(atom, reweighted, ST)


@given(multiteams_st(XYZ, max_rows=4))
def test_mindep_oracle(m):
    assert holds("mindep(x; y z)", m) == oracles.mindep_oracle(m.rows, m.domain, ("x",), ("y", "z"))


@given(multiteams_st(XYZ, max_rows=5))
def test_mindep_cond_is_mindep_on_slices(m):
    slices = [Multiteam(m.domain, {r: w for r, w in m.rows.items() if r[2] == c}) for c in (0, 1)]
    assert holds("mindep(z | x; y)", m) == all(holds("mindep(x; y)", s) for s in slices)


@given(multiteams_st())
def test_fork_le_matches_conditional_probabilities(m):
    ok = True
    for a in (0, 1):
        tot = sum(w for r, w in m.rows.items() if r[0] == a)
        for b in (0, 1):
            hit = m.rows.get((a, b), 0)
            if tot and hit and Fraction(hit, tot) > Fraction(1, 2):
                ok = False
    assert holds("fork[<=1/2](x; y)", m) == ok


@given(multiteams_st(max_rows=3, max_mult=2))
def test_exists_multiplicities_for_minc_is_cycle(m):
    t = m.support()
    assert exists_multiplicities(parse_formula("minc(x; y)"), t, 4) == \
        team_atom_holds(parse_formula("cycle(x; y)"), t)


@given(multiteams_st(XYZ, max_rows=4))
def test_team_atoms_see_support_only(m):
    r = restrict(m, ["x", "y"])
    for src in ("incl(x; y)", "indep(x; y)", "anon(x; y)"):
        assert holds(src, m.support()) == holds(src, m)
        assert holds(src, r) == holds(src, r.support())
