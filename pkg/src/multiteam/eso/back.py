"""From sentences in normal form back to multiteam formulas.

The witness functions are stored inside the multiteam itself. After
``A z1..zl`` every row comes in ``|A|^l`` copies; a Boolean flag ``mu_i``
and a value tuple ``y_i`` per function say which copies carry a unit of
``g_i`` and where. Two designated elements ``c0 != c1`` (constant over the
multiteam) play false and true, and ``c0`` doubles as the zero of the
``z`` padding.

Differences from the textbook layout:

* ``mu_0`` is tied to ``z = c0..c0`` in both directions so that it encodes
  exactly the input weights;
* for ``i >= 1`` the flag only forces the padding, without a dependence
  atom, since a dependence on the padding would make every ``|g_i|`` a
  multiple of ``|M|``;
* unflagged rows put ``y_i = c0..c0`` to cut down the search.
"""
from __future__ import annotations

from typing import Optional, Sequence

from ..syntax import (FALSE, TRUE, EqLit, FreshNames, MultiteamAtom, TeamAtom, conj, disj,
                      eq_tuple, exists, expand_implication, forall, negate, neq_tuple,
                      rename_free)
from .normal import clauses_of, is_normal_form, rename_term, side_parts, split_prefix
from .terms import Apply, EsoError, EsoSentence, TermEq, Zero


def _iff(flag: str, c1: str, cond):
    """``flag = c1`` exactly when ``cond`` (first-order) holds."""
    return disj(conj(EqLit(flag, c1), cond), conj(EqLit(flag, c1, True), negate(cond)))


class _Back:
    def __init__(self, psi: EsoSentence, domain: tuple[str, ...], fresh: FreshNames):
        self.psi = psi
        self.fresh = fresh
        self.c0, self.c1 = fresh("c"), fresh("c")
        ell = max((q.ell for q in psi.quantifiers), default=0)
        self.zs = fresh.many(ell, "z")
        self.mu = {psi.base: fresh("mu")}
        self.ys = {psi.base: domain}
        for q in psi.quantifiers:
            self.mu[q.name] = fresh("mu")
            self.ys[q.name] = fresh.many(q.arity, "y")

    def true(self, fn: str):
        return EqLit(self.mu[fn], self.c1)

    def theta(self):
        zero = eq_tuple(self.zs, [self.c0] * len(self.zs))
        parts = [_iff(self.mu[self.psi.base], self.c1, zero)]
        for q in self.psi.quantifiers:
            pad = self.zs[q.ell:]
            parts.append(expand_implication(self.true(q.name), eq_tuple(pad, [self.c0] * len(pad))))
            ys = self.ys[q.name]
            parts.append(expand_implication(negate(self.true(q.name)),
                                            eq_tuple(ys, [self.c0] * len(ys))))
        return conj(*parts)

    def match(self, side):
        """First-order condition on a row for carrying one unit of ``side``."""
        if isinstance(side, Zero):
            return FALSE
        fn, args, summed = side_parts(side)
        ys = self.ys[fn]
        conds = [self.true(fn)]
        first: dict[str, int] = {}
        for p, a in enumerate(args):
            if a not in summed:
                conds.append(EqLit(ys[p], a))
            elif a in first:
                conds.append(EqLit(ys[p], ys[first[a]]))
            else:
                first[a] = p
        return conj(*conds)

    def equation(self, e: TermEq, xs: Sequence[str]):
        left, right = e.left, e.right
        if isinstance(left, Zero):
            left, right = right, left
        if isinstance(left, Zero):
            return TRUE
        if isinstance(right, Zero) and isinstance(left, Apply):
            return disj(negate(self.true(left.fn)), neq_tuple(left.args, self.ys[left.fn]))
        nu, la = self.fresh("nu"), self.fresh("la")
        body = conj(_iff(nu, self.c1, self.match(left)), _iff(la, self.c1, self.match(right)),
                    MultiteamAtom("minc", tuple(xs) + (nu,), tuple(xs) + (la,)))
        return exists((nu, la), body)

    def clause(self, items, xs):
        return conj(*(self.equation(x, xs) if isinstance(x, TermEq) else x for x in items))

    def body(self, clauses, xs):
        if not clauses:
            return FALSE
        if len(clauses) == 1:
            return self.clause(clauses[0], xs)
        chis = self.fresh.many(len(clauses), "chi")
        parts = [TeamAtom("dep", tuple(xs), (chi,)) for chi in chis]
        parts.append(disj(*(EqLit(chi, self.c1) for chi in chis)))
        for chi, c in zip(chis, clauses):
            parts.append(expand_implication(EqLit(chi, self.c1), self.clause(c, xs)))
        return exists(chis, conj(*parts))


def translate_eso_to_mts(psi: EsoSentence, domain: Optional[Sequence[str]] = None,
                         fresh: Optional[FreshNames] = None):
    """Multiteam formula over ``domain`` agreeing with ``psi`` on non-empty multiteams.

    ``psi`` must be in normal form and true for the zero weight function.
    Positions of the weight function follow ``domain`` (default ``x1..xk``).
    Structures need at least two elements.
    """
    if not is_normal_form(psi):
        raise EsoError("the sentence is not in normal form")
    domain = tuple(domain) if domain is not None else tuple(
        f"x{i}" for i in range(1, psi.base_arity + 1))
    if len(domain) != psi.base_arity or len(set(domain)) != len(domain):
        raise EsoError("the domain must list distinct variables, one per position")
    fresh = fresh or FreshNames()
    b = _Back(psi, domain, fresh)
    vs, matrix = split_prefix(psi.matrix)
    xs = fresh.many(len(vs), "x")
    ren = dict(zip(vs, xs))
    clauses = [] if matrix == FALSE else [
        [_rename_item(item, ren) for item in c] for c in clauses_of(matrix)]
    inner = forall(xs, conj(b.theta(), b.body(clauses, xs)))
    for q in reversed(psi.quantifiers):
        inner = exists((b.mu[q.name],) + b.ys[q.name], inner)
    inner = forall(b.zs, exists((b.mu[psi.base],), inner))
    consts = conj(TeamAtom("dep", (), (b.c0,)), TeamAtom("dep", (), (b.c1,)),
                  EqLit(b.c0, b.c1, True), inner)
    return exists((b.c0, b.c1), consts)


def _rename_item(item, ren):
    if isinstance(item, TermEq):
        return TermEq(rename_term(item.left, ren), rename_term(item.right, ren))
    return rename_free(item, ren)
