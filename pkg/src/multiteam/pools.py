"""Seeded random formula pools for exhaustive comparisons."""
from __future__ import annotations

import random
from fractions import Fraction
from typing import Sequence

from .syntax import (TEAM_KINDS, EqLit, Exists, Forall, Formula, MultiteamAtom,
                     RelLit, TeamAtom, conj, disj)

ALL_KINDS = TEAM_KINDS + ("minc", "minc_cond", "fork", "mindep", "mindep_cond")
THRESHOLDS = (Fraction(0), Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(1))
FORK_OPS = ("<", "<=", "=", ">=", ">")


def _tuple(rng: random.Random, vs: Sequence[str], lo: int = 1, hi: int = 2) -> tuple[str, ...]:
    return tuple(rng.choice(vs) for _ in range(rng.randint(lo, hi)))


def random_literal(rng: random.Random, vs: Sequence[str], relations: dict[str, int]) -> Formula:
    if relations and rng.random() < 0.5:
        name = rng.choice(sorted(relations))
        return RelLit(name, tuple(rng.choice(vs) for _ in range(relations[name])), rng.random() < 0.4)
    return EqLit(rng.choice(vs), rng.choice(vs), rng.random() < 0.5)


def random_atom(rng: random.Random, kind: str, vs: Sequence[str],
                relations: dict[str, int], fork_ops: Sequence[str] = FORK_OPS) -> Formula:
    if kind in ("dep", "anon"):
        return TeamAtom(kind, _tuple(rng, vs, 0, 2), (rng.choice(vs),))
    if kind == "indep":
        return TeamAtom(kind, _tuple(rng, vs), _tuple(rng, vs))
    if kind in ("excl", "incl", "equi", "cycle"):
        n = rng.randint(1, 2)
        return TeamAtom(kind, _tuple(rng, vs, n, n), _tuple(rng, vs, n, n))
    if kind in ("minc", "minc_cond"):
        n = rng.randint(1, 2)
        left, right = _tuple(rng, vs, n, n), _tuple(rng, vs, n, n)
        if kind == "minc":
            return MultiteamAtom("minc", left, right)
        cond = random_literal(rng, left, {k: a for k, a in relations.items() if a <= len(left)})
        return MultiteamAtom("minc_cond", left, right, cond=cond)
    if kind == "fork":
        return MultiteamAtom("fork", _tuple(rng, vs, 0, 1), _tuple(rng, vs, 1, 1),
                             cmp=rng.choice(tuple(fork_ops)),
                             threshold=rng.choice(THRESHOLDS))
    if kind == "mindep":
        return MultiteamAtom("mindep", _tuple(rng, vs, 1, 1), _tuple(rng, vs, 1, 2))
    if kind == "mindep_cond":
        return MultiteamAtom("mindep_cond", _tuple(rng, vs, 1, 1), _tuple(rng, vs, 1, 1),
                             given=_tuple(rng, vs, 1, 1))
    raise ValueError(kind)


def random_formula(rng: random.Random, depth: int, free: Sequence[str] = ("x", "y"),
                   kinds: Sequence[str] = ALL_KINDS, relations: dict[str, int] | None = None,
                   qvars: Sequence[str] = ("z", "w"), p_leaf: float = 0.3,
                   fork_ops: Sequence[str] = FORK_OPS) -> Formula:
    """Random formula of depth at most ``depth`` with free variables among ``free``.

    Quantifiers draw from ``qvars`` and never rebind a variable in scope.
    """
    relations = {"P": 1} if relations is None else relations

    def gen(d: int, scope: tuple[str, ...]) -> Formula:
        if d == 0 or rng.random() < p_leaf:
            if kinds and rng.random() < 0.6:
                return random_atom(rng, rng.choice(list(kinds)), scope, relations, fork_ops)
            return random_literal(rng, scope, relations)
        avail = [v for v in qvars if v not in scope]
        ops = ["and", "or"] + (["ex", "all"] if avail else [])
        op = rng.choice(ops)
        if op in ("and", "or"):
            parts = [gen(d - 1, scope) for _ in range(2)]
            return conj(*parts) if op == "and" else disj(*parts)
        v = rng.choice(avail)
        body = gen(d - 1, scope + (v,))
        return Exists(v, body) if op == "ex" else Forall(v, body)

    return gen(depth, tuple(free))


def formula_pool(seed: int, n: int, depth: int = 3, **kw) -> list[Formula]:
    """``n`` distinct formulas from a seeded generator."""
    rng = random.Random(seed)
    out, seen = [], set()
    tries = 0
    while len(out) < n:
        tries += 1
        if tries > 50 * n:
            raise RuntimeError("could not generate enough distinct formulas")
        f = random_formula(rng, depth, **kw)
        if f not in seen:
            seen.add(f)
            out.append(f)
    return out
