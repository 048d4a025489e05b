"""Encoding multiteam formulas as sentences over multiteam structures.

The multiteam under evaluation is represented by a weight function whose
argument positions follow a tuple of variable names. Connectives and
quantifiers introduce new weight functions related to the current one by
term equations; atoms become first-order conditions on the weights.
"""
from __future__ import annotations

from typing import Optional, Sequence

from ..syntax import (And, EqLit, Exists, Forall, FreshNames, MultiteamAtom, Or,
                      TeamAtom, TsvAtom, conj, eq_tuple, free_vars, is_literal,
                      neq_tuple, rename_free)
from .terms import (ZERO, Apply, EsoError, EsoSentence, Mul, SOQuant, Sum, TermEq, add_all,
                    mand, mforall, mor)


class UnencodableAtom(EsoError):
    """An atom without an encoding in the addition-only fragment."""


def _pos(vars: Sequence[str], names: Sequence[str]) -> list[int]:
    try:
        return [list(vars).index(v) for v in names]
    except ValueError:
        raise EsoError(f"atom variables {tuple(names)} not among {tuple(vars)}") from None


def _count(fn: str, vars: Sequence[str], names: Sequence[str], values: Sequence[str],
           fresh: FreshNames, extra=None) -> Sum:
    """Total weight of the rows where ``names`` take ``values`` (and ``extra`` holds)."""
    ds = fresh.many(len(vars), "d")
    sub = dict(zip(vars, ds))
    guard = eq_tuple([sub[v] for v in names], values)
    if extra is not None:
        guard = conj(guard, rename_free(extra, sub))
    return Sum(ds, Apply(fn, ds), guard)


def encode_atom(atom, fn: str, vars: Sequence[str], fresh: Optional[FreshNames] = None,
                allow_mul: bool = False, ell: int = 0):
    """Matrix stating that the multiteam held in ``fn`` (positions ``vars``) satisfies ``atom``.

    Returns ``(matrix, quantifiers)``; ``minc_cond`` needs one slack function.
    """
    fresh = fresh or FreshNames()
    vars = tuple(vars)
    if isinstance(atom, MultiteamAtom) and atom.kind == "minc":
        _pos(vars, atom.left + atom.right)
        zs = fresh.many(len(atom.left), "z")
        return mforall(zs, TermEq(_count(fn, vars, atom.left, zs, fresh),
                                  _count(fn, vars, atom.right, zs, fresh))), []
    if isinstance(atom, MultiteamAtom) and atom.kind == "minc_cond":
        _pos(vars, atom.left + atom.right)
        if not free_vars(atom.cond) <= set(vars):
            raise EsoError("restriction mentions variables outside the multiteam")
        from .terms import _quantifier_free
        if not _quantifier_free(atom.cond):
            raise UnencodableAtom("the restriction of minc_cond must be quantifier-free")
        zs = fresh.many(len(atom.left), "z")
        slack = fresh("k")
        lhs = _count(fn, vars, atom.left, zs, fresh, atom.cond) + Apply(slack, zs)
        return (mforall(zs, TermEq(lhs, _count(fn, vars, atom.right, zs, fresh))),
                [SOQuant(slack, len(zs), ell)])
    if isinstance(atom, TeamAtom) and atom.kind == "excl":
        ds, es = fresh.many(len(vars), "d"), fresh.many(len(vars), "e")
        pd, pe = dict(zip(vars, ds)), dict(zip(vars, es))
        _pos(vars, atom.left + atom.right)
        body = mor(neq_tuple([pd[v] for v in atom.left], [pe[v] for v in atom.right]),
                   TermEq(Apply(fn, ds), ZERO), TermEq(Apply(fn, es), ZERO))
        return mforall(ds + es, body), []
    if isinstance(atom, TeamAtom) and atom.kind == "dep":
        ds, es = fresh.many(len(vars), "d"), fresh.many(len(vars), "e")
        pd, pe = dict(zip(vars, ds)), dict(zip(vars, es))
        _pos(vars, atom.left + atom.right)
        y = atom.right[0]
        body = mor(neq_tuple([pd[v] for v in atom.left], [pe[v] for v in atom.left]),
                   EqLit(pd[y], pe[y]),
                   TermEq(Apply(fn, ds), ZERO), TermEq(Apply(fn, es), ZERO))
        return mforall(ds + es, body), []
    if isinstance(atom, MultiteamAtom) and atom.kind == "mindep":
        if not allow_mul:
            raise UnencodableAtom("the independence atom requires multiplication")
        _pos(vars, atom.left + atom.right)
        ys, zs = fresh.many(len(atom.left), "y"), fresh.many(len(atom.right), "z")
        ds = fresh.many(len(vars), "d")
        total = Sum(ds, Apply(fn, ds))
        lhs = Mul(_count(fn, vars, atom.left, ys, fresh), _count(fn, vars, atom.right, zs, fresh))
        rhs = Mul(total, _count(fn, vars, atom.left + atom.right, ys + zs, fresh))
        return mforall(ys + zs, TermEq(lhs, rhs)), []
    raise UnencodableAtom(f"no encoding for {atom}")


def translate_mts_to_eso(phi, domain: Optional[Sequence[str]] = None, base: str = "f",
                         fresh: Optional[FreshNames] = None, allow_mul: bool = False) -> EsoSentence:
    """Sentence true on the weight function of M exactly when ``phi`` holds on M.

    Positions of the weight function follow ``domain`` (default: the sorted
    free variables of ``phi``), matching the row layout of ``Multiteam``.
    """
    domain = tuple(sorted(free_vars(phi))) if domain is None else tuple(domain)
    if not free_vars(phi) <= set(domain):
        raise EsoError("domain misses free variables of the formula")
    fresh = fresh or FreshNames()
    quants: list[SOQuant] = []

    def new_fn(arity: int, ell: int) -> str:
        name = fresh("g")
        quants.append(SOQuant(name, arity, ell))
        return name

    def tr(f, fn: str, vars: tuple[str, ...], ell: int):
        if is_literal(f):
            ds = fresh.many(len(vars), "d")
            return mforall(ds, mor(TermEq(Apply(fn, ds), ZERO),
                                   rename_free(f, dict(zip(vars, ds)))))
        if isinstance(f, (TeamAtom, MultiteamAtom, TsvAtom)):
            matrix, extra = encode_atom(f, fn, vars, fresh, allow_mul, ell)
            quants.extend(extra)
            return matrix
        if isinstance(f, And):
            return mand(*(tr(p, fn, vars, ell) for p in f.parts))
        if isinstance(f, Or):
            parts = [new_fn(len(vars), ell) for _ in f.parts]
            ds = fresh.many(len(vars), "d")
            split = mforall(ds, TermEq(Apply(fn, ds), add_all([Apply(p, ds) for p in parts])))
            return mand(split, *(tr(p, g, vars, ell) for p, g in zip(f.parts, parts)))
        if isinstance(f, Forall):
            if f.var in vars:
                p = vars.index(f.var)
                g = new_fn(len(vars), ell + 1)
                ds = fresh.many(len(vars), "d")
                old = fresh("o")
                prev = ds[:p] + (old,) + ds[p + 1:]
                link = mforall(ds, TermEq(Apply(g, ds), Sum((old,), Apply(fn, prev))))
                return mand(link, tr(f.body, g, vars, ell + 1))
            g = new_fn(len(vars) + 1, ell + 1)
            ds, e = fresh.many(len(vars), "d"), fresh("d")
            link = mforall(ds + (e,), TermEq(Apply(g, ds + (e,)), Apply(fn, ds)))
            return mand(link, tr(f.body, g, vars + (f.var,), ell + 1))
        if isinstance(f, Exists):
            if f.var in vars:
                # h(new row, old value) routes each occurrence of the old row
                p = vars.index(f.var)
                h = new_fn(len(vars) + 1, ell)
                g = new_fn(len(vars), ell)
                ds, a, o = fresh.many(len(vars), "d"), fresh("n"), fresh("o")
                moved = ds[:p] + (a,) + ds[p + 1:]
                out = mforall(ds, TermEq(Apply(fn, ds), Sum((a,), Apply(h, moved + (ds[p],)))))
                into = mforall(ds, TermEq(Apply(g, ds), Sum((o,), Apply(h, ds + (o,)))))
                return mand(out, into, tr(f.body, g, vars, ell))
            g = new_fn(len(vars) + 1, ell)
            ds, e = fresh.many(len(vars), "d"), fresh("d")
            link = mforall(ds, TermEq(Apply(fn, ds), Sum((e,), Apply(g, ds + (e,)))))
            return mand(link, tr(f.body, g, vars + (f.var,), ell))
        raise TypeError(f)

    matrix = tr(phi, base, domain, 0)
    return EsoSentence(base, len(domain), tuple(quants), matrix)
