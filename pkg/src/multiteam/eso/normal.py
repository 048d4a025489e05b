"""Normal form for addition-only sentences.

Target shape: second-order quantifiers in front, then a block of universal
first-order quantifiers over a disjunction of conjunctions of literals and
simple equations. A simple equation is ``g(u) = 0`` or ``S = S'`` where each
side is ``g(u)`` or ``sum v {g(u)}`` with every summed variable among ``u``.

Passes, each logged at debug level:

1. rename bound variables apart;
2. Skolemize first-order existentials: ``E x. p`` under universals ``U``
   becomes ``|f| = sum x {s(U, x)}  &  A x. (s(U, x) = 0 | p)`` for a fresh
   ``s`` bounded by ``|f| * |A|^|U|``; every slice of ``s`` carries weight
   exactly ``|f|`` where it matters, so the lifted bound is exact;
3. flatten terms: nested terms move into fresh functions defined in place,
   equality guards of sums are substituted away, other guards go through
   ``(~a | h = g) & (a | h = 0)``, and ``t + t'`` becomes a sum over a
   two-valued selector ``c`` using two distinct elements ``e0, e1`` that are
   existentially quantified (and Skolemized) at the top;
4. pull universals to the front, sharing variables across conjunctions;
5. disjunctive normal form, dropping contradictory clauses; conjunctions of
   several multi-clause parts are joined through selector variables rather
   than multiplied out (see ``_prenex_dnf``).

Bounds of fresh functions are computed as ``|f| * |A|^l`` upper bounds of the
defining terms, so they never exclude a witness. The construction assumes a
non-empty weight function.
"""
from __future__ import annotations

import logging
from typing import Optional, Sequence

from ..core import Structure
from ..syntax import (FALSE, TRUE, And, EqLit, FreshNames, Or, RelLit, conj,
                      is_literal, negate, rename_free)
from .terms import (ZERO, Add, Apply, EsoError, EsoSentence, MAnd, MExists, MForall, MOr, Mul,
                    MultiteamStructure, NotPresburger, SOQuant, Sum, TermEq, Zero, eval_matrix,
                    mand, matrix_terms, mforall, mor, term_vars)

log = logging.getLogger(__name__)


# --- renaming ---------------------------------------------------------------------------

def rename_term(t, m: dict):
    if isinstance(t, Zero):
        return t
    if isinstance(t, Apply):
        return Apply(t.fn, tuple(m.get(a, a) for a in t.args))
    if isinstance(t, Add):
        return Add(rename_term(t.left, m), rename_term(t.right, m))
    if isinstance(t, Mul):
        return Mul(rename_term(t.left, m), rename_term(t.right, m))
    if isinstance(t, Sum):
        inner = {k: v for k, v in m.items() if k not in t.vars}
        return Sum(t.vars, rename_term(t.body, inner), rename_free(t.guard, inner))
    raise TypeError(t)


def rename_matrix(phi, m: dict):
    if is_literal(phi):
        return rename_free(phi, m)
    if isinstance(phi, TermEq):
        return TermEq(rename_term(phi.left, m), rename_term(phi.right, m))
    if isinstance(phi, MAnd):
        return mand(*(rename_matrix(p, m) for p in phi.parts))
    if isinstance(phi, MOr):
        return mor(*(rename_matrix(p, m) for p in phi.parts))
    if isinstance(phi, (MForall, MExists)):
        inner = {k: v for k, v in m.items() if k != phi.var}
        return type(phi)(phi.var, rename_matrix(phi.body, inner))
    raise TypeError(phi)


def _apart_term(t, fresh: FreshNames):
    if isinstance(t, (Zero, Apply)):
        return t
    if isinstance(t, (Add, Mul)):
        return type(t)(_apart_term(t.left, fresh), _apart_term(t.right, fresh))
    if isinstance(t, Sum):
        new = fresh.many(len(t.vars), "b")
        m = dict(zip(t.vars, new))
        return Sum(new, _apart_term(rename_term(t.body, m), fresh), rename_free(t.guard, m))
    raise TypeError(t)


def rename_apart(phi, fresh: FreshNames):
    """Give every bound variable, of quantifiers and of sums, a fresh name."""
    if is_literal(phi):
        return phi
    if isinstance(phi, TermEq):
        return TermEq(_apart_term(phi.left, fresh), _apart_term(phi.right, fresh))
    if isinstance(phi, (MAnd, MOr)):
        return type(phi)(tuple(rename_apart(p, fresh) for p in phi.parts))
    if isinstance(phi, (MForall, MExists)):
        v = fresh("q")
        return type(phi)(v, rename_apart(rename_matrix(phi.body, {phi.var: v}), fresh))
    raise TypeError(phi)


def fo_to_matrix(phi):
    """Quantifier-free first-order formula with matrix connectives."""
    if is_literal(phi):
        return phi
    if isinstance(phi, (And, Or)):
        return mand(phi) if isinstance(phi, And) else mor(phi)
    raise EsoError(f"not quantifier-free: {phi}")


# --- simple equations ---------------------------------------------------------------------

def is_simple_side(t) -> bool:
    if isinstance(t, Apply):
        return True
    return (isinstance(t, Sum) and t.guard == TRUE and isinstance(t.body, Apply)
            and set(t.vars) <= set(t.body.args))


def is_simple_equation(e) -> bool:
    if not isinstance(e, TermEq):
        return False
    a, b = e.left, e.right
    if isinstance(b, Zero):
        a, b = b, a
    if isinstance(a, Zero):
        return isinstance(b, Apply)
    return is_simple_side(a) and is_simple_side(b)


def side_parts(t) -> tuple[str, tuple[str, ...], frozenset[str]]:
    """``(function, arguments, summed variables)`` of a simple side."""
    if isinstance(t, Apply):
        return t.fn, t.args, frozenset()
    return t.body.fn, t.body.args, frozenset(t.vars)


def split_prefix(phi) -> tuple[tuple[str, ...], object]:
    vs = []
    while isinstance(phi, MForall):
        vs.append(phi.var)
        phi = phi.body
    return tuple(vs), phi


def clauses_of(body) -> list[list]:
    """Disjuncts of a quantifier-free matrix in normal form, as lists of conjuncts."""
    disjuncts = body.parts if isinstance(body, MOr) else (body,)
    out = []
    for d in disjuncts:
        out.append(list(d.parts) if isinstance(d, MAnd) else [d])
    return out


def is_normal_form(psi: EsoSentence) -> bool:
    _, body = split_prefix(psi.matrix)
    if body == FALSE:
        return True
    for clause in clauses_of(body):
        for item in clause:
            if not (is_literal(item) or is_simple_equation(item)):
                return False
    return True


# --- the pipeline ----------------------------------------------------------------------------

class _Pipeline:
    def __init__(self, psi: EsoSentence, fresh: FreshNames):
        self.psi = psi
        self.fresh = fresh
        self.quants: list[SOQuant] = list(psi.quantifiers)
        self.ell = {psi.base: 0}
        self.ell.update({q.name: q.ell for q in psi.quantifiers})
        self.consts: Optional[tuple[str, str]] = None

    def new_fn(self, arity: int, ell: int, hint: str) -> str:
        name = self.fresh(hint)
        self.quants.append(SOQuant(name, arity, max(ell, 0)))
        self.ell[name] = max(ell, 0)
        return name

    # bounds
    def bnd(self, t, scope: frozenset) -> int:
        """``l`` with ``sum over scope of t <= |f| * |A|^l``."""
        if isinstance(t, Zero):
            return 0
        if isinstance(t, Apply):
            return self.ell[t.fn] + len(scope - set(t.args))
        if isinstance(t, Sum):
            return self.bnd(t.body, scope | set(t.vars))
        if isinstance(t, Add):
            return max(self.bnd(t.left, scope), self.bnd(t.right, scope)) + 1
        raise NotPresburger("multiplication is outside the addition-only fragment")

    # pass 2
    def skolemize(self, phi, scope: tuple[str, ...]):
        if is_literal(phi) or isinstance(phi, TermEq):
            return phi
        if isinstance(phi, MAnd):
            return mand(*(self.skolemize(p, scope) for p in phi.parts))
        if isinstance(phi, MOr):
            return mor(*(self.skolemize(p, scope) for p in phi.parts))
        if isinstance(phi, MForall):
            return MForall(phi.var, self.skolemize(phi.body, scope + (phi.var,)))
        if isinstance(phi, MExists):
            s = self.new_fn(len(scope) + 1, len(scope), "s")
            ws = self.fresh.many(self.psi.base_arity, "w")
            v2 = self.fresh("b")
            guard = TermEq(Sum(ws, Apply(self.psi.base, ws)),
                           Sum((v2,), Apply(s, scope + (v2,))))
            x = phi.var
            body = self.skolemize(phi.body, scope + (x,))
            return mand(guard, MForall(x, mor(TermEq(Apply(s, scope + (x,)), ZERO), body)))
        raise TypeError(phi)

    # pass 3
    def flatten(self, phi, scope: tuple[str, ...]):
        if is_literal(phi):
            return phi
        if isinstance(phi, TermEq):
            s1, d1 = self.side(phi.left, scope)
            s2, d2 = self.side(phi.right, scope)
            if isinstance(s1, Zero) and isinstance(s2, Zero):
                return mand(*d1, *d2)
            if isinstance(s1, Zero) or isinstance(s2, Zero):
                other = s2 if isinstance(s1, Zero) else s1
                if not isinstance(other, Apply):
                    other, d3 = self.to_fn(other, scope)
                    d1 = d1 + d3
                return mand(TermEq(other, ZERO), *d1, *d2)
            return mand(TermEq(s1, s2), *d1, *d2)
        if isinstance(phi, MAnd):
            return mand(*(self.flatten(p, scope) for p in phi.parts))
        if isinstance(phi, MOr):
            return mor(*(self.flatten(p, scope) for p in phi.parts))
        if isinstance(phi, MForall):
            return MForall(phi.var, self.flatten(phi.body, scope + (phi.var,)))
        raise TypeError(phi)

    def to_fn(self, t, scope: tuple[str, ...]):
        """An application equal to ``t``, with definitions over ``scope``."""
        if isinstance(t, Apply):
            return t, []
        side, defs = self.side(t, scope)
        free = term_vars(t)
        args = tuple(v for v in scope if v in free)
        k = self.new_fn(len(args), self.bnd(t, frozenset(args)), "t")
        app = Apply(k, args)
        if isinstance(side, Zero):
            return app, defs + [TermEq(app, ZERO)]
        return app, defs + [TermEq(app, side)]

    def side(self, t, scope: tuple[str, ...]):
        """A simple side equal to ``t`` (or zero), with definitions over ``scope``."""
        if isinstance(t, (Zero, Apply)):
            return t, []
        if isinstance(t, Mul):
            raise NotPresburger("multiplication is outside the addition-only fragment")
        if isinstance(t, Sum):
            xs, body, guard = _eliminate_equalities(t.vars, t.body, t.guard)
            if guard == FALSE:
                return ZERO, []
            if not xs and guard == TRUE:
                return self.side(body, scope)
            if guard == TRUE and isinstance(body, Apply) and set(xs) <= set(body.args):
                return Sum(xs, body), []
            # work on primed copies so that definitions do not reuse sum variables
            xp = self.fresh.many(len(xs), "b")
            ren = dict(zip(xs, xp))
            body_p = rename_term(body, ren)
            guard_p = rename_free(guard, ren)
            inner = scope + xp
            b, defs = self.to_fn(body_p, inner)
            used = set(b.args) | set(_fo_free(guard_p)) | set(xp)
            args = tuple(v for v in inner if v in used)
            h = self.new_fn(len(args), self.bnd(b, frozenset(args)), "h")
            happ = Apply(h, args)
            if guard == TRUE:
                local = TermEq(happ, b)
            else:
                g = fo_to_matrix(guard_p)
                ng = fo_to_matrix(negate(guard_p))
                local = mand(mor(ng, TermEq(happ, b)), mor(g, TermEq(happ, ZERO)))
            definition = mforall(xp, mand(*defs, local))
            back = {v: k for k, v in ren.items()}
            return Sum(xs, Apply(h, tuple(back.get(a, a) for a in args))), [definition]
        if isinstance(t, Add):
            if self.consts is None:
                raise EsoError("internal: selector constants missing")
            e0, e1 = self.consts
            a1, d1 = self.to_fn(t.left, scope)
            a2, d2 = self.to_fn(t.right, scope)
            used = set(a1.args) | set(a2.args)
            args = tuple(v for v in scope if v in used)
            ell = max(self.bnd(a1, frozenset(args)), self.bnd(a2, frozenset(args))) + 1
            h = self.new_fn(len(args) + 1, ell, "a")
            c = self.fresh("c")
            hc = Apply(h, args + (c,))
            local = MForall(c, mand(mor(EqLit(c, e0, True), TermEq(hc, a1)),
                                    mor(EqLit(c, e1, True), TermEq(hc, a2)),
                                    mor(EqLit(c, e0), EqLit(c, e1), TermEq(hc, ZERO))))
            c2 = self.fresh("c")
            return Sum((c2,), Apply(h, args + (c2,))), d1 + d2 + [local]
        raise TypeError(t)


def _fo_free(phi):
    from ..syntax import free_vars
    return free_vars(phi)


def _conjuncts(guard) -> list:
    if isinstance(guard, And):
        return list(guard.parts)
    return [guard]


def _eliminate_equalities(xs, body, guard):
    """Substitute away guard equations ``x = v`` with ``x`` summed."""
    xs = list(xs)
    parts = _conjuncts(guard)
    changed = True
    while changed:
        changed = False
        for i, lit in enumerate(parts):
            if isinstance(lit, EqLit) and lit.left == lit.right:
                if lit.negated:
                    return tuple(xs), body, FALSE
                parts.pop(i)
                changed = True
                break
            if isinstance(lit, EqLit) and not lit.negated:
                if lit.left in xs:
                    x, v = lit.left, lit.right
                elif lit.right in xs:
                    x, v = lit.right, lit.left
                else:
                    continue
                parts.pop(i)
                xs.remove(x)
                m = {x: v}
                body = rename_term(body, m)
                parts = [rename_free(p, m) for p in parts]
                changed = True
                break
    parts = [p for p in parts if p != TRUE]
    if any(p == FALSE for p in parts):
        return tuple(xs), body, FALSE
    return tuple(xs), body, conj(*parts)


# passes 4 and 5
def _clause(items) -> Optional[tuple]:
    out = []
    for x in items:
        if x == TRUE or (isinstance(x, EqLit) and x.left == x.right and not x.negated):
            continue
        x = _orient(x)
        if x not in out:
            out.append(x)
    return tuple(out) if _clause_ok(out) else None


def _prenex_dnf(phi, fresh: FreshNames) -> tuple[list[str], list[tuple]]:
    """Universal prefix and clauses of an existential-free matrix.

    Conjunctions share their universal variables. When two or more conjuncts
    need several clauses each, they are laid side by side behind selector
    guards instead of being multiplied out: for fresh ``w, r``
    ``A & B`` is equivalent to ``A w r. (w = r & A) | (w != r & B)`` on
    universes with at least two elements, so the clause count stays additive.
    """
    if phi == FALSE:
        return [], []
    if is_literal(phi) or isinstance(phi, TermEq):
        c = _clause((phi,))
        return [], [] if c is None else [c]
    if isinstance(phi, MForall):
        vs, cl = _prenex_dnf(phi.body, fresh)
        return [phi.var] + vs, cl
    if isinstance(phi, MOr):
        vs_all, out = [], []
        for p in phi.parts:
            vs, cl = _prenex_dnf(p, fresh)
            vs_all.extend(vs)
            out.extend(cl)
        return vs_all, out
    if isinstance(phi, MAnd):
        shared: list[str] = []
        parts = []
        for p in phi.parts:
            vs, cl = _prenex_dnf(p, fresh)
            if not cl:
                return [], []
            while len(shared) < len(vs):
                shared.append(vs[len(shared)])
            m = {v: shared[i] for i, v in enumerate(vs) if v != shared[i]}
            if m:
                cl = [tuple(rename_matrix(x, m) for x in c) for c in cl]
            parts.append(cl)
        base = tuple(x for cl in parts if len(cl) == 1 for x in cl[0])
        multi = [cl for cl in parts if len(cl) > 1]
        if len(multi) <= 1:
            out = [_clause(base + c) for c in (multi[0] if multi else [()])]
            return shared, [c for c in out if c is not None]
        r = fresh("r")
        ws = fresh.many(len(multi) - 1, "w")
        out = []
        for j, cl in enumerate(multi):
            guard = tuple(EqLit(ws[i], r, True) for i in range(j))
            if j < len(ws):
                guard += (EqLit(ws[j], r),)
            out.extend(_clause(base + guard + c) for c in cl)
        return shared + [r, *ws], [c for c in out if c is not None]
    raise TypeError(phi)


def _lit_key(item):
    if isinstance(item, EqLit):
        a, b = sorted((item.left, item.right))
        return ("eq", a, b), item.negated
    if isinstance(item, RelLit):
        return ("rel", item.name, item.args), item.negated
    return None, None


def _clause_ok(clause) -> bool:
    seen = {}
    for item in clause:
        if item == FALSE:
            return False
        if isinstance(item, EqLit) and item.left == item.right and item.negated:
            return False
        k, neg = _lit_key(item)
        if k is not None:
            if seen.setdefault(k, neg) != neg:
                return False
    return True


def _orient(item):
    if isinstance(item, TermEq) and isinstance(item.left, Zero):
        return TermEq(item.right, item.left)
    return item


def _absorb(clauses: list[tuple]) -> list[tuple]:
    """Drop duplicate clauses and clauses that strictly contain another clause."""
    keep, sets = [], []
    for c in clauses:
        s = frozenset(c)
        if s not in sets:
            keep.append(c)
            sets.append(s)
    return [c for c, s in zip(keep, sets) if not any(t < s for t in sets)]


def normal_form(psi: EsoSentence, fresh: Optional[FreshNames] = None) -> EsoSentence:
    """An equivalent sentence in normal form (on non-empty weight functions)."""
    fresh = fresh or FreshNames()
    if not psi.presburger:
        raise NotPresburger("multiplication is outside the addition-only fragment")
    p = _Pipeline(psi, fresh)
    phi = rename_apart(psi.matrix, fresh)
    log.debug("renamed apart: %s", phi)
    if any(isinstance(t, Add) for t in matrix_terms(phi)):
        e0, e1 = fresh("e"), fresh("e")
        p.consts = (e0, e1)
        phi = MExists(e0, MExists(e1, mand(EqLit(e0, e1, True), phi)))
    phi = p.skolemize(phi, ())
    log.debug("skolemized: %s", phi)
    phi = p.flatten(phi, ())
    log.debug("flattened: %s", phi)
    vs, clauses = _prenex_dnf(phi, fresh)
    clauses = _absorb(clauses)
    log.debug("prenex over %d variables, %d clauses", len(vs), len(clauses))
    matrix = mforall(vs, mor(*(mand(*c) for c in clauses)))
    out = EsoSentence(psi.base, psi.base_arity, tuple(p.quants), matrix)
    return out


def holds_on_empty(psi: EsoSentence, structures: Sequence[Structure]) -> Optional[Structure]:
    """First structure on which ``psi`` fails for the zero weight function, or None.

    With ``f = 0`` every bound is 0, so all quantified functions vanish.
    """
    for st in structures:
        d = MultiteamStructure(st, psi.base_arity, {})
        if not eval_matrix(psi.matrix, d, {}, {q.name: {} for q in psi.quantifiers}, psi.base):
            return st
    return None
