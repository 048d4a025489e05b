from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from multiteam.core import Structure, WeightedMultiteam, mt_scale
from multiteam.parser import parse_formula
from multiteam.topology import (INF, NotFlat, ProbeGrid, classify_atom, companion_check, err,
                                eval_weighted_flat, validate_witness)

from conftest import weighted_st

ST = Structure(2)
XY = ("x", "y")


def W(rows, dom=XY):
    return WeightedMultiteam(dom, rows)


def wf(src, m, s=ST):
    return eval_weighted_flat(parse_formula(src), s, m)


def test_err_examples():
    m = W({(0,): 1}, ("x",))
    assert err(m, W({(0,): F(1, 2)}, ("x",))) == F(1, 2)
    assert err(m, W({(1,): 1}, ("x",))) == INF
    assert err(m, m) == 0
    with pytest.raises(ValueError):
        err(m, W({(0,): 1}, ("y",)))


@given(weighted_st(), weighted_st(), weighted_st())
def test_err_metric_on_equal_supports(a, b, c):
    rows = set(a.rows)
    b = W({r: b.rows.get(r, F(1, 3)) for r in rows})
    c = W({r: c.rows.get(r, F(2, 5)) for r in rows})
    assert err(a, b) == err(b, a)
    assert err(a, c) <= err(a, b) + err(b, c)
    assert (err(a, b) == 0) == (a == b)


@given(weighted_st(), weighted_st())
def test_err_infinite_exactly_when_support_leaves(a, b):
    assert (err(a, b) == INF) == (not set(b.rows) <= set(a.rows))


ATOMS = ["minc(x; y)", "mindep(x; y)", "fork[<=1/2](x; y)", "fork[>1/3](x; y)", "dep(x; y)",
         "excl(x; y)", "x = y", "minc[x = y](x; y)"]


@given(weighted_st(), st.sampled_from(ATOMS), st.fractions(F(1, 10), 10))
def test_scale_invariance(m, src, k):
    assert wf(src, m) == wf(src, mt_scale(k, m))


def test_weighted_examples():
    assert wf("minc(x; y)", W({(0, 1): F(1, 2), (1, 0): F(1, 2)}))
    p, q = F(1, 3), F(3, 7)
    prod = W({(a, b): (p if a == 0 else 1 - p) * (q if b == 0 else 1 - q) for a in (0, 1) for b in (0, 1)})
    assert wf("mindep(x; y)", prod)
    assert not wf("mindep(x; y)", W({**prod.rows, (0, 0): p * q + F(1, 100)}))
    assert wf("dep(x; y)", W({(0, 1): F(1, 7), (1, 1): 5})) == wf("dep(x; y)", W({(0, 1): 1, (1, 1): 1}))
    with pytest.raises(NotFlat):
        wf("(dep(x; y) | dep(x; y))", prod)
    with pytest.raises(NotFlat):
        wf("E z. dep(x; z)", prod)


def test_minc_not_open_by_hand():
    m = W({(0, 1): 1, (1, 0): 1})
    assert wf("minc(x; y)", m)
    for k in range(1, 7):
        eps = F(1, 2 ** k)
        n = W({(0, 1): 1, (1, 0): 1 + eps / 2})
        assert err(m, n) < eps and not wf("minc(x; y)", n)


def test_fork_lt_half_not_closed_by_hand():
    s3 = Structure(3)
    limit = W({(0, 0): F(1, 2), (0, 1): F(1, 4), (0, 2): F(1, 4)})
    assert not wf("fork[<1/2](x; y)", limit, s3)
    seq = [W({(0, 0): F(1, 2) - F(1, n), (0, 1): F(1, 4) + F(1, 2 * n), (0, 2): F(1, 4) + F(1, 2 * n)})
           for n in range(5, 13)]
    assert all(wf("fork[<1/2](x; y)", m, s3) for m in seq)
    dists = [err(limit, m) for m in seq]
    assert all(b < a for a, b in zip(dists, dists[1:]))


@pytest.mark.parametrize("src,expect", [
    ("minc(x; y)", "closed"), ("dep(x; y)", "clopen"), ("fork[<2/3](x; y)", "open")])
def test_classify_examples(src, expect):
    atom = parse_formula(src)
    v = classify_atom(atom)
    assert v.claimed == expect
    for w in (v.not_open, v.not_closed):
        if w is not None:
            assert validate_witness(atom, w)


def test_classify_fork_lt_half_on_three_elements():
    atom = parse_formula("fork[<1/2](x; y)")
    v = classify_atom(atom, ProbeGrid(universe=3, max_support=3, denominator=4))
    assert v.claimed == "open" and validate_witness(atom, v.not_closed)


def test_composed_conjunctions_keep_their_class():
    v = classify_atom(parse_formula("(minc(x; y) & dep(x; y))"))
    assert v.not_closed is None
    v = classify_atom(parse_formula("(fork[<2/3](x; y) & fork[>1/3](x; y))"))
    assert v.not_open is None


def test_companion_examples():
    dep = companion_check(parse_formula("dep(x; y)"))
    assert dep.weight_invariant and dep.downwards_closed and dep.companions and dep.consistent
    anon = companion_check(parse_formula("fork[<1](x; y)"))
    assert anon.weight_invariant and not anon.downwards_closed and anon.notes
    minc = companion_check(parse_formula("minc(x; y)"))
    assert not minc.weight_invariant
    st_, m1, m2 = minc.invariance_witness
    assert set(m1.rows) == set(m2.rows)
    assert wf("minc(x; y)", m1, st_) != wf("minc(x; y)", m2, st_)


@pytest.mark.parametrize("src,clopen", [
    ("dep(x; y)", True), ("excl(x; y)", True), ("minc(x; y)", False), ("mindep(x; y)", False),
    ("fork[<=1/2](x; y)", False), ("fork[>=1/2](x; y)", False), ("fork[<2/3](x; y)", False)])
def test_clopen_iff_downwards_closed(src, clopen):
    assert companion_check(parse_formula(src)).downwards_closed == clopen
