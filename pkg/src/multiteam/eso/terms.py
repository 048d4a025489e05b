"""Numeric terms, matrix formulas and sentences over multiteam structures.

A multiteam structure pairs a finite structure with a weight function ``f``
from element tuples to naturals. Matrix formulas are first-order over the
elements and may compare numeric terms, positively only. A sentence
existentially quantifies weight functions ``g`` with ``|g| <= |f| * |A|^l``
in front of a matrix.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from ..core import Multiteam, Structure
from ..fo import literal_holds
from ..syntax import FALSE, TRUE, is_literal


class EsoError(ValueError):
    """Malformed sentence, or a sentence outside the supported fragment."""


class NotPresburger(EsoError):
    """A multiplication where only addition is allowed."""


# --- terms ------------------------------------------------------------------------

class Term:
    __slots__ = ()

    def __add__(self, other):
        return Add(self, other)

    def __str__(self):
        from .text import render_term
        return render_term(self)


@dataclass(frozen=True)
class Zero(Term):
    pass


@dataclass(frozen=True)
class Apply(Term):
    fn: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class Add(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Mul(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Sum(Term):
    """Sum of ``body`` over all values of ``vars`` satisfying ``guard``.

    The guard is a quantifier-free first-order formula.
    """
    vars: tuple[str, ...]
    body: Term
    guard: object = TRUE

    def __post_init__(self):
        if len(set(self.vars)) != len(self.vars):
            raise EsoError("repeated summation variable")
        if not _quantifier_free(self.guard):
            raise EsoError("summation guards must be quantifier-free first-order formulas")


ZERO = Zero()


def add_all(terms: Sequence[Term]) -> Term:
    if not terms:
        return ZERO
    out = terms[0]
    for t in terms[1:]:
        out = Add(out, t)
    return out


# --- matrix formulas ----------------------------------------------------------------

class EsoFormula:
    __slots__ = ()

    def __str__(self):
        from .text import render_matrix
        return render_matrix(self)


@dataclass(frozen=True)
class TermEq(EsoFormula):
    left: Term
    right: Term


@dataclass(frozen=True)
class MAnd(EsoFormula):
    parts: tuple


@dataclass(frozen=True)
class MOr(EsoFormula):
    parts: tuple


@dataclass(frozen=True)
class MForall(EsoFormula):
    var: str
    body: object


@dataclass(frozen=True)
class MExists(EsoFormula):
    var: str
    body: object


def _flat(cls, parts):
    from ..syntax import And, Or
    out = []
    for p in parts:
        if isinstance(p, And):
            p = mand(*p.parts)
        elif isinstance(p, Or):
            p = mor(*p.parts)
        if isinstance(p, cls):
            out.extend(p.parts)
        else:
            out.append(p)
    return out


def mand(*parts):
    parts = [p for p in _flat(MAnd, parts) if p != TRUE]
    if any(p == FALSE for p in parts):
        return FALSE
    if not parts:
        return TRUE
    return parts[0] if len(parts) == 1 else MAnd(tuple(parts))


def mor(*parts):
    parts = [p for p in _flat(MOr, parts) if p != FALSE]
    if any(p == TRUE for p in parts):
        return TRUE
    if not parts:
        return FALSE
    return parts[0] if len(parts) == 1 else MOr(tuple(parts))


def mforall(vars: Iterable[str], body):
    for v in reversed(tuple(vars)):
        body = MForall(v, body)
    return body


def mexists(vars: Iterable[str], body):
    for v in reversed(tuple(vars)):
        body = MExists(v, body)
    return body


def _quantifier_free(phi) -> bool:
    from ..syntax import And, Or
    if is_literal(phi):
        return True
    if isinstance(phi, (And, Or)):
        return all(_quantifier_free(p) for p in phi.parts)
    return False


# --- traversal ------------------------------------------------------------------------

def _fo_vars(phi) -> frozenset[str]:
    from ..syntax import free_vars
    return free_vars(phi)


def term_vars(t: Term) -> frozenset[str]:
    if isinstance(t, Zero):
        return frozenset()
    if isinstance(t, Apply):
        return frozenset(t.args)
    if isinstance(t, (Add, Mul)):
        return term_vars(t.left) | term_vars(t.right)
    if isinstance(t, Sum):
        return (term_vars(t.body) | _fo_vars(t.guard)) - set(t.vars)
    raise TypeError(t)


def matrix_vars(phi) -> frozenset[str]:
    if is_literal(phi):
        return _fo_vars(phi)
    if isinstance(phi, TermEq):
        return term_vars(phi.left) | term_vars(phi.right)
    if isinstance(phi, (MAnd, MOr)):
        return frozenset().union(*(matrix_vars(p) for p in phi.parts))
    if isinstance(phi, (MForall, MExists)):
        return matrix_vars(phi.body) - {phi.var}
    raise TypeError(phi)


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, (Add, Mul)):
        yield from subterms(t.left)
        yield from subterms(t.right)
    elif isinstance(t, Sum):
        yield from subterms(t.body)


def matrix_nodes(phi) -> Iterator:
    yield phi
    if isinstance(phi, (MAnd, MOr)):
        for p in phi.parts:
            yield from matrix_nodes(p)
    elif isinstance(phi, (MForall, MExists)):
        yield from matrix_nodes(phi.body)


def matrix_terms(phi) -> Iterator[Term]:
    for node in matrix_nodes(phi):
        if isinstance(node, TermEq):
            yield from subterms(node.left)
            yield from subterms(node.right)


def function_uses(phi) -> dict[str, int]:
    """Function names applied in the matrix with their arities."""
    out: dict[str, int] = {}
    for t in matrix_terms(phi):
        if isinstance(t, Apply):
            if out.setdefault(t.fn, len(t.args)) != len(t.args):
                raise EsoError(f"function {t.fn} applied with two arities")
    return out


def relation_uses(phi) -> dict[str, int]:
    from ..syntax import relation_signature
    out: dict[str, int] = {}

    def note(lit):
        for k, v in relation_signature(lit).items():
            if out.setdefault(k, v) != v:
                raise EsoError(f"relation {k} used with two arities")

    for node in matrix_nodes(phi):
        if is_literal(node):
            note(node)
    for t in matrix_terms(phi):
        if isinstance(t, Sum):
            note(t.guard)
    return out


def is_presburger_matrix(phi) -> bool:
    return not any(isinstance(t, Mul) for t in matrix_terms(phi))


# --- sentences ----------------------------------------------------------------------------

@dataclass(frozen=True)
class SOQuant:
    """``exists name/arity`` with total weight at most ``|f| * |A|^ell``."""
    name: str
    arity: int
    ell: int


@dataclass(frozen=True)
class EsoSentence:
    base: str
    base_arity: int
    quantifiers: tuple[SOQuant, ...]
    matrix: object

    def __post_init__(self):
        object.__setattr__(self, "quantifiers", tuple(self.quantifiers))
        names = [self.base] + [q.name for q in self.quantifiers]
        if len(set(names)) != len(names):
            raise EsoError("function names must be distinct")
        if any(q.ell < 0 or q.arity < 0 for q in self.quantifiers):
            raise EsoError("negative arity or bound exponent")
        arities = {self.base: self.base_arity}
        arities.update({q.name: q.arity for q in self.quantifiers})
        for fn, n in function_uses(self.matrix).items():
            if fn not in arities:
                raise EsoError(f"undeclared function {fn}")
            if arities[fn] != n:
                raise EsoError(f"function {fn} has arity {arities[fn]}, applied to {n} arguments")
        free = matrix_vars(self.matrix)
        if free:
            raise EsoError(f"free element variables {sorted(free)}")

    @property
    def arities(self) -> dict[str, int]:
        out = {self.base: self.base_arity}
        out.update({q.name: q.arity for q in self.quantifiers})
        return out

    @property
    def presburger(self) -> bool:
        return is_presburger_matrix(self.matrix)

    def __str__(self):
        from .text import render_eso
        return render_eso(self)


# --- multiteam structures -------------------------------------------------------------------

@dataclass(frozen=True)
class MultiteamStructure:
    """A structure with a weight function ``f: A^k -> N`` (missing tuples weigh 0)."""
    base: Structure
    arity: int
    weights: Mapping[tuple[int, ...], int] = field(default_factory=dict)

    def __post_init__(self):
        w = {tuple(k): int(v) for k, v in self.weights.items() if v}
        for k, v in w.items():
            if len(k) != self.arity or any(not 0 <= a < self.base.size for a in k):
                raise ValueError(f"bad weight key {k}")
            if v < 0:
                raise ValueError("weights are natural numbers")
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_multiteam(cls, structure: Structure, m: Multiteam) -> "MultiteamStructure":
        """Weights indexed by the multiteam's (sorted) domain order."""
        return cls(structure, len(m.domain), dict(m.rows))

    def to_multiteam(self, domain: Sequence[str]) -> Multiteam:
        if len(domain) != self.arity:
            raise ValueError("domain length differs from the arity")
        dom = tuple(domain)
        if list(dom) != sorted(dom):
            raise ValueError("domain must be sorted")
        return Multiteam(dom, dict(self.weights))

    @property
    def total(self) -> int:
        return sum(self.weights.values())

    @property
    def size(self) -> int:
        return self.base.size


# --- evaluation with fixed functions --------------------------------------------------------

Tables = Mapping[str, Mapping[tuple[int, ...], int]]


def _guard_holds(structure: Structure, env: Mapping[str, int], guard) -> bool:
    from ..fo import holds
    return holds(structure, env, guard)


def eval_term(t: Term, d: MultiteamStructure, env: Mapping[str, int],
              tables: Optional[Tables] = None, base: str = "f") -> int:
    """Value of ``t``; ``tables`` interprets quantified functions, ``base`` names ``f``."""
    tables = tables or {}
    if isinstance(t, Zero):
        return 0
    if isinstance(t, Apply):
        try:
            key = tuple(env[a] for a in t.args)
        except KeyError as e:
            raise EsoError(f"unbound variable {e.args[0]}") from None
        if t.fn == base:
            if len(key) != d.arity:
                raise EsoError(f"{base} has arity {d.arity}")
            return d.weights.get(key, 0)
        if t.fn not in tables:
            raise EsoError(f"unknown function {t.fn}")
        return tables[t.fn].get(key, 0)
    if isinstance(t, Add):
        return eval_term(t.left, d, env, tables, base) + eval_term(t.right, d, env, tables, base)
    if isinstance(t, Mul):
        return eval_term(t.left, d, env, tables, base) * eval_term(t.right, d, env, tables, base)
    if isinstance(t, Sum):
        total = 0
        e = dict(env)
        for vals in itertools.product(range(d.size), repeat=len(t.vars)):
            e.update(zip(t.vars, vals))
            if _guard_holds(d.base, e, t.guard):
                total += eval_term(t.body, d, e, tables, base)
        return total
    raise TypeError(t)


def eval_matrix(phi, d: MultiteamStructure, env: Mapping[str, int],
                tables: Optional[Tables] = None, base: str = "f") -> bool:
    """Tarski semantics of a matrix formula with all functions fixed."""
    if is_literal(phi):
        return literal_holds(d.base, env, phi)
    if isinstance(phi, TermEq):
        return eval_term(phi.left, d, env, tables, base) == eval_term(phi.right, d, env, tables, base)
    if isinstance(phi, MAnd):
        return all(eval_matrix(p, d, env, tables, base) for p in phi.parts)
    if isinstance(phi, MOr):
        return any(eval_matrix(p, d, env, tables, base) for p in phi.parts)
    if isinstance(phi, (MForall, MExists)):
        e = dict(env)
        test = all if isinstance(phi, MForall) else any

        def gen():
            for a in range(d.size):
                e[phi.var] = a
                yield eval_matrix(phi.body, d, e, tables, base)
        return test(gen())
    raise TypeError(phi)


# --- well-known terms ----------------------------------------------------------------------------

def size_term(base: str, arity: int, fresh) -> Term:
    """``|M|`` as the total weight of ``base``."""
    xs = fresh.many(arity, "s")
    return Sum(xs, Apply(base, xs))


def count_term(base: str, arity: int, positions: Sequence[int], values: Sequence[str], fresh,
               extra=TRUE) -> Term:
    """Total weight of the tuples whose ``positions`` carry ``values``."""
    from ..syntax import conj, eq_tuple
    xs = fresh.many(arity, "s")
    guard = conj(eq_tuple(tuple(xs[p] for p in positions), values), extra)
    return Sum(xs, Apply(base, xs), guard)
