from fractions import Fraction

import pytest
from hypothesis import given

from multiteam.core import Multiteam, Structure, WeightedMultiteam
from multiteam.parser import (ParseError, parse_formula, parse_multiteam, parse_structure,
                              render_formula, render_multiteam, render_structure)
from multiteam.pools import formula_pool
from multiteam.syntax import Exists, Forall, MultiteamAtom, TeamAtom

from conftest import multiteams_st, weighted_st


def test_formula_examples():
    assert parse_formula("dep(x ; y)") == TeamAtom("dep", ("x",), ("y",))
    f = parse_formula("E x. A z. minc(x z ; x y)")
    assert f == Exists("x", Forall("z", MultiteamAtom("minc", ("x", "z"), ("x", "y"))))


@pytest.mark.parametrize("text", ["!dep(x;y)", "!minc(x;y)", "!(x = y & x = y)",
                                  "fork[<3/2](x;y)", "dep(x;y", "minc(x;y z)"])
def test_formula_rejects(text):
    with pytest.raises(ParseError):
        parse_formula(text)


def test_formula_rejects_shadowing():
    with pytest.raises(ParseError):
        parse_formula("E x. (dep(x; y) & E x. x = y)")


def test_reserved_names():
    with pytest.raises(ParseError):
        parse_formula("dep($a; y)")
    assert parse_formula("dep($a; y)", allow_reserved=True) == TeamAtom("dep", ("$a",), ("y",))


def test_empty_tuples_and_thresholds():
    f = parse_formula("fork[<=1/2](;x)")
    assert f.left == () and f.threshold == Fraction(1, 2)
    assert "1/2" in render_formula(f)
    assert parse_formula("dep(;y)") == TeamAtom("dep", (), ("y",))


def test_conditional_atoms():
    f = parse_formula("mindep(z | x; y)")
    assert f.kind == "mindep_cond" and f.given == ("z",)
    g = parse_formula("minc[x = y](x; y)")
    assert g.kind == "minc_cond"
    with pytest.raises(ParseError):
        parse_formula("minc[dep(x;y)](x; y)")


def test_formula_round_trip_pool():
    pool = formula_pool(11, 100, depth=3)
    for f in pool:
        assert parse_formula(render_formula(f)) == f


def test_structure_examples():
    s = parse_structure("universe 2\nrelation E 2\n0 1\n1 0\n")
    assert s == Structure(2, {"E": {(0, 1), (1, 0)}})
    assert parse_structure(render_structure(s)) == s
    with pytest.raises(ParseError):
        parse_structure("universe 2\nrelation E 2\n0 2\n")
    with pytest.raises(ParseError):
        parse_structure("universe 2\nrelation E 2\n0\n")


def test_multiteam_examples():
    m = parse_multiteam("vars x y / 0 1 : 1 / 1 0 : 2")
    assert m == Multiteam(("x", "y"), {(0, 1): 1, (1, 0): 2})
    w = parse_multiteam("vars x / 0 : 1/2", weighted=True)
    assert w == WeightedMultiteam(("x",), {(0,): Fraction(1, 2)})
    with pytest.raises(ParseError):
        parse_multiteam("vars x / 0 : 1/2")
    for bad in ("vars x / 0 : 0", "vars x / 0 : -1", "vars x / 0 1 : 1"):
        with pytest.raises(ParseError):
            parse_multiteam(bad)


def test_empty_multiteam_renders_header_only():
    text = render_multiteam(Multiteam(("x", "y")))
    assert text.strip() == "vars x y"
    assert parse_multiteam(text) == Multiteam(("x", "y"))


@given(multiteams_st(universe=3))
def test_multiteam_round_trip(m):
    assert parse_multiteam(render_multiteam(m)) == m
    assert parse_multiteam(render_multiteam(m, " / ")) == m


@given(weighted_st())
def test_weighted_round_trip(m):
    assert parse_multiteam(render_multiteam(m), weighted=True) == m
