from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from multiteam.core import (Multiteam, Structure, Team, UndefinedProbability, WeightedMultiteam,
                            filter_eq, filter_formula, mt_diff, mt_scale, mt_sub, mt_sum, pr,
                            pr_cond, restrict, skolem_extension, universal_extension,
                            value_product, values)
from multiteam.parser import parse_formula, parse_multiteam
from multiteam.rewrite import witness_family

from conftest import multiteams_st


def M(text):
    return parse_multiteam(text)


def test_sum_examples():
    a = Multiteam(("x",), {(0,): 2})
    b = Multiteam(("x",), {(0,): 3, (1,): 1})
    assert mt_sum(a, b) == Multiteam(("x",), {(0,): 5, (1,): 1})
    assert mt_sum(a, Multiteam.empty(("x",))) == a
    assert mt_sum(witness_family(1), witness_family(2)) == M("vars x y / 0 0 : 2 / 0 1 : 3 / 1 0 : 3 / 1 1 : 5")


def test_sum_domain_mismatch():
    with pytest.raises(ValueError):
        mt_sum(Multiteam(("x",), {(0,): 1}), Multiteam(("y",), {(0,): 1}))


def test_scale_examples():
    s = Multiteam(("x",), {(0,): 1})
    assert mt_scale(2, s) == Multiteam(("x",), {(0,): 2})
    assert mt_scale(0, s).is_empty()
    m = Multiteam(("x",), {(0,): 2, (1,): 1})
    assert mt_scale(3, m) == Multiteam(("x",), {(0,): 6, (1,): 3})


def test_difference():
    s3 = Multiteam(("x",), {(0,): 3})
    assert mt_diff(s3, Multiteam(("x",), {(0,): 1})) == Multiteam(("x",), {(0,): 2})
    assert mt_diff(s3, s3).is_empty()
    with pytest.raises(ValueError):
        mt_diff(Multiteam(("x",), {(0,): 1}), Multiteam(("x",), {(1,): 1}))


def test_restrict_examples():
    m = M("vars x y / 0 1 : 1 / 0 0 : 2")
    assert restrict(m, ["x"]) == Multiteam(("x",), {(0,): 3})
    assert restrict(m, ["x", "y"]) == m
    m = M("vars u x / 0 0 : 1 / 1 0 : 1")
    assert restrict(m, ["x"]) == Multiteam(("x",), {(0,): 2})


def test_filter_examples():
    st_ = Structure(2)
    m = M("vars x y / 0 0 : 2 / 0 1 : 1")
    assert filter_formula(m, parse_formula("x = y"), st_) == M("vars x y / 0 0 : 2")
    assert filter_formula(m, parse_formula("true"), st_) == m
    assert filter_formula(m, parse_formula("false"), st_).is_empty()
    g = Structure(3, {"E": {(0, 1), (1, 2)}})
    top = Multiteam((), {(): 1})
    ext = universal_extension(universal_extension(top, "v", g.universe), "w", g.universe)
    edges = filter_formula(ext, parse_formula("E(v, w)"), g)
    assert edges == Multiteam(("v", "w"), {(0, 1): 1, (1, 2): 1})


def test_filter_rejects_atoms():
    with pytest.raises(Exception):
        filter_formula(M("vars x y / 0 0 : 1"), parse_formula("dep(x; y)"), Structure(2))


def test_probability_examples():
    m = M("vars x y / 0 1 : 1 / 1 0 : 2")
    assert pr(m, {"x": 1}) == Fraction(2, 3)
    assert pr_cond(m, {"y": 0}, {"x": 1}) == 1
    m2 = witness_family(2)
    assert pr(m2, {"x": 1}) == Fraction(2, 3) == pr_cond(m2, {"x": 1}, {"y": 1})


def test_probability_undefined():
    with pytest.raises(UndefinedProbability):
        pr(Multiteam(("x",)), {"x": 0})
    with pytest.raises(UndefinedProbability):
        pr_cond(M("vars x y / 0 0 : 1"), {"x": 0}, {"y": 1})


def test_universal_extension_examples():
    top = Multiteam((), {(): 1})
    ext = universal_extension(top, "v", range(3))
    assert len(ext) == 3 and set(ext.rows.values()) == {1}
    m = Multiteam(("x",), {(0,): 2})
    assert universal_extension(m, "y", range(2)) == M("vars x y / 0 0 : 2 / 0 1 : 2")


def test_universal_extension_replaces_binding():
    m = M("vars x y / 0 1 : 2")
    assert universal_extension(m, "y", range(2)) == M("vars x y / 0 0 : 2 / 0 1 : 2")


def test_skolem_extension_examples():
    m = Multiteam(("x",), {(0,): 2})
    assert skolem_extension(m, "y", {(0,): [0, 1]}) == M("vars x y / 0 0 : 1 / 0 1 : 1")
    const = skolem_extension(m, "y", lambda r: {1: 2})
    assert const == M("vars x y / 0 1 : 2")
    with pytest.raises(ValueError):
        skolem_extension(m, "y", {(0,): [0]})


def test_value_multisets():
    m = M("vars x y / 0 1 : 1 / 1 0 : 2")
    assert values(m, ["x"]) == Counter({(0,): 1, (1,): 2})
    assert values(m, []) == Counter({(): 3})
    m1 = witness_family(1)
    prod = value_product(values(m1, ["x"]), values(m1, ["y"]))
    assert prod == Counter({(a, b): 4 for a in (0, 1) for b in (0, 1)})


def test_weighted_rejects_bad_weights():
    with pytest.raises(ValueError):
        WeightedMultiteam(("x",), {(0,): Fraction(-1, 2)})
    with pytest.raises(ValueError):
        Multiteam(("x",), {(0,): Fraction(1, 2)})


def test_team_support():
    t = M("vars x y / 0 1 : 3 / 1 1 : 1").support()
    assert isinstance(t, Team) and t.rows == {(0, 1), (1, 1)}


# --- properties ---

@given(multiteams_st(), multiteams_st(), multiteams_st())
def test_sum_monoid(a, b, c):
    assert mt_sum(a, b) == mt_sum(b, a)
    assert mt_sum(mt_sum(a, b), c) == mt_sum(a, mt_sum(b, c))
    assert mt_sum(a, Multiteam.empty(a.domain)) == a
    assert mt_sum(a, b).size == a.size + b.size


@given(st.integers(0, 4), multiteams_st(), multiteams_st())
def test_scale_distributes(k, a, b):
    assert mt_scale(k, mt_sum(a, b)) == mt_sum(mt_scale(k, a), mt_scale(k, b))
    assert mt_scale(k, a).size == k * a.size


@given(multiteams_st(), multiteams_st(), st.sampled_from([(), ("x",), ("y",), ("x", "y")]))
def test_restrict_laws(a, b, vs):
    assert restrict(mt_sum(a, b), vs) == mt_sum(restrict(a, vs), restrict(b, vs))
    assert restrict(a, vs).size == a.size


@given(multiteams_st())
def test_value_multiset_sizes(m):
    assert sum(values(m, ["x"]).values()) == sum(values(m, ["y"]).values()) == m.size


@given(multiteams_st().filter(lambda m: m.size > 0))
def test_probabilities_sum_to_one(m):
    ps = [pr(m, {"x": a}) for a in (0, 1)]
    assert all(0 <= p <= 1 for p in ps) and sum(ps) == 1


@given(multiteams_st(domain=("x",), universe=3), st.integers(1, 3))
def test_universal_extension_restrict_back(m, n):
    ext = universal_extension(m, "y", range(n))
    assert ext.size == m.size * n
    assert restrict(ext, ["x"]) == mt_scale(n, m)


@given(multiteams_st(), st.randoms(use_true_random=False))
def test_skolem_extension_preserves_size(m, rnd):
    ext = skolem_extension(m, "z", lambda r: [rnd.randrange(3) for _ in range(m.rows[r])])
    assert ext.size == m.size
    assert restrict(ext, ["x", "y"]) == m


@given(multiteams_st(), multiteams_st())
def test_difference_inverts_sum(a, b):
    s = mt_sum(a, b)
    assert mt_sub(a, s) and mt_diff(s, a) == b


@given(multiteams_st())
def test_filter_eq_partitions(m):
    parts = [filter_eq(m, ["x"], [a]) for a in (0, 1)]
    assert mt_sum(*parts) == m
