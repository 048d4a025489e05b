"""Formula syntax for first-order logic with team and multiteam atoms.

Formulas are immutable trees in negation normal form. Conjunctions and
disjunctions are n-ary and flattened on construction, so ``And(a, And(b, c))``
and ``And(a, b, c)`` are the same value.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional

TEAM_KINDS = ("dep", "excl", "incl", "equi", "anon", "indep", "cycle")
MULTITEAM_KINDS = ("minc", "minc_cond", "fork", "mindep", "mindep_cond")
COMPARATORS = ("<", "<=", "=", ">=", ">")

# names starting with this prefix are reserved for generated variables
RESERVED_PREFIX = "$"


class Formula:
    __slots__ = ()

    def __and__(self, other: "Formula") -> "Formula":
        return conj(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return disj(self, other)

    def __str__(self) -> str:
        from .parser import render_formula
        return render_formula(self)


@dataclass(frozen=True)
class BoolLit(Formula):
    value: bool


@dataclass(frozen=True)
class RelLit(Formula):
    name: str
    args: tuple[str, ...]
    negated: bool = False


@dataclass(frozen=True)
class EqLit(Formula):
    left: str
    right: str
    negated: bool = False


@dataclass(frozen=True)
class TeamAtom(Formula):
    """A team atom, evaluated on the support of a multiteam.

    ``dep`` and ``anon`` take a single variable on the right.
    """
    kind: str
    left: tuple[str, ...]
    right: tuple[str, ...]

    def __post_init__(self):
        if self.kind not in TEAM_KINDS:
            raise ValueError(f"unknown team atom {self.kind!r}")
        if self.kind in ("dep", "anon") and len(self.right) != 1:
            raise ValueError(f"{self.kind} takes exactly one right-hand variable")
        if self.kind in ("excl", "incl", "equi", "cycle") and len(self.left) != len(self.right):
            raise ValueError(f"{self.kind} needs tuples of equal length")


@dataclass(frozen=True)
class MultiteamAtom(Formula):
    """A multiteam atom.

    ``cond`` is the first-order restriction of ``minc_cond``, ``given`` the
    conditioning tuple of ``mindep_cond`` and ``cmp``/``threshold`` belong
    to ``fork``.
    """
    kind: str
    left: tuple[str, ...]
    right: tuple[str, ...]
    given: tuple[str, ...] = ()
    cmp: Optional[str] = None
    threshold: Optional[Fraction] = None
    cond: Optional[Formula] = None

    def __post_init__(self):
        if self.kind not in MULTITEAM_KINDS:
            raise ValueError(f"unknown multiteam atom {self.kind!r}")
        if self.kind in ("minc", "minc_cond") and len(self.left) != len(self.right):
            raise ValueError(f"{self.kind} needs tuples of equal length")
        if self.kind == "minc_cond":
            if self.cond is None or not is_first_order(self.cond):
                raise ValueError("minc_cond needs a first-order restriction")
        if self.kind == "fork":
            if self.cmp not in COMPARATORS:
                raise ValueError(f"bad comparator {self.cmp!r}")
            t = Fraction(self.threshold)
            if not 0 <= t <= 1:
                raise ValueError("fork threshold must lie in [0, 1]")
            object.__setattr__(self, "threshold", t)


@dataclass(frozen=True)
class TsvAtom(Formula):
    """Team version of a multiteam atom, decided by a bounded multiplicity search."""
    atom: MultiteamAtom
    bound: int


@dataclass(frozen=True)
class And(Formula):
    parts: tuple[Formula, ...]

    def __init__(self, *parts: Formula):
        object.__setattr__(self, "parts", _flatten(And, parts))
        if len(self.parts) < 2:
            raise ValueError("And needs at least two conjuncts; use conj()")


@dataclass(frozen=True)
class Or(Formula):
    parts: tuple[Formula, ...]

    def __init__(self, *parts: Formula):
        object.__setattr__(self, "parts", _flatten(Or, parts))
        if len(self.parts) < 2:
            raise ValueError("Or needs at least two disjuncts; use disj()")


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


def _flatten(cls, parts) -> tuple:
    if len(parts) == 1 and isinstance(parts[0], (list, tuple)):
        parts = tuple(parts[0])
    out = []
    for p in parts:
        if not isinstance(p, Formula):
            raise TypeError(f"not a formula: {p!r}")
        if isinstance(p, cls):
            out.extend(p.parts)
        else:
            out.append(p)
    return tuple(out)


TRUE = BoolLit(True)
FALSE = BoolLit(False)


def conj(*parts: Formula) -> Formula:
    parts = _flatten(And, parts)
    if not parts:
        return TRUE
    if len(parts) == 1:
        return parts[0]
    return And(*parts)


def disj(*parts: Formula) -> Formula:
    parts = _flatten(Or, parts)
    if not parts:
        return FALSE
    if len(parts) == 1:
        return parts[0]
    return Or(*parts)


def exists(vars: Iterable[str], body: Formula) -> Formula:
    for v in reversed(tuple(vars)):
        body = Exists(v, body)
    return body


def forall(vars: Iterable[str], body: Formula) -> Formula:
    for v in reversed(tuple(vars)):
        body = Forall(v, body)
    return body


def eq_tuple(xs: Iterable[str], ys: Iterable[str]) -> Formula:
    """Componentwise equality of two variable tuples."""
    return conj(*(EqLit(a, b) for a, b in zip(xs, ys, strict=True)))


def neq_tuple(xs: Iterable[str], ys: Iterable[str]) -> Formula:
    """Tuples differ in some component."""
    return disj(*(EqLit(a, b, True) for a, b in zip(xs, ys, strict=True)))


def is_literal(phi: Formula) -> bool:
    return isinstance(phi, (BoolLit, RelLit, EqLit))


def is_atom(phi: Formula) -> bool:
    return isinstance(phi, (TeamAtom, MultiteamAtom, TsvAtom))


def children(phi: Formula) -> tuple[Formula, ...]:
    if isinstance(phi, (And, Or)):
        return phi.parts
    if isinstance(phi, (Exists, Forall)):
        return (phi.body,)
    return ()


def walk(phi: Formula) -> Iterator[Formula]:
    stack = [phi]
    while stack:
        f = stack.pop()
        yield f
        stack.extend(reversed(children(f)))


def atoms(phi: Formula) -> list[Formula]:
    return [f for f in walk(phi) if is_atom(f)]


def is_first_order(phi: Formula) -> bool:
    return not any(is_atom(f) for f in walk(phi))


def atom_vars(a: Formula) -> tuple[str, ...]:
    if isinstance(a, TsvAtom):
        return atom_vars(a.atom)
    if isinstance(a, TeamAtom):
        return a.left + a.right
    if isinstance(a, MultiteamAtom):
        extra = tuple(sorted(free_vars(a.cond))) if a.cond is not None else ()
        return a.given + a.left + a.right + extra
    raise TypeError(a)


def free_vars(phi: Formula) -> frozenset[str]:
    if isinstance(phi, BoolLit):
        return frozenset()
    if isinstance(phi, RelLit):
        return frozenset(phi.args)
    if isinstance(phi, EqLit):
        return frozenset((phi.left, phi.right))
    if is_atom(phi):
        return frozenset(atom_vars(phi))
    if isinstance(phi, (And, Or)):
        return frozenset().union(*(free_vars(p) for p in phi.parts))
    if isinstance(phi, (Exists, Forall)):
        return free_vars(phi.body) - {phi.var}
    raise TypeError(phi)


def bound_vars(phi: Formula) -> frozenset[str]:
    return frozenset(f.var for f in walk(phi) if isinstance(f, (Exists, Forall)))


def all_vars(phi: Formula) -> frozenset[str]:
    return free_vars(phi) | bound_vars(phi)


def size(phi: Formula) -> int:
    return sum(1 for _ in walk(phi))


def depth(phi: Formula) -> int:
    cs = children(phi)
    return 0 if not cs else 1 + max(depth(c) for c in cs)


def relation_signature(phi: Formula) -> dict[str, int]:
    sig: dict[str, int] = {}
    for f in walk(phi):
        lits = [f]
        if isinstance(f, MultiteamAtom) and f.cond is not None:
            lits = list(walk(f.cond))
        for g in lits:
            if isinstance(g, RelLit):
                if sig.setdefault(g.name, len(g.args)) != len(g.args):
                    raise ValueError(f"relation {g.name} used with two arities")
    return sig


def negate(phi: Formula) -> Formula:
    """Negation of a first-order formula, pushed to the literals."""
    if isinstance(phi, BoolLit):
        return BoolLit(not phi.value)
    if isinstance(phi, RelLit):
        return RelLit(phi.name, phi.args, not phi.negated)
    if isinstance(phi, EqLit):
        return EqLit(phi.left, phi.right, not phi.negated)
    if isinstance(phi, And):
        return disj(*(negate(p) for p in phi.parts))
    if isinstance(phi, Or):
        return conj(*(negate(p) for p in phi.parts))
    if isinstance(phi, Exists):
        return Forall(phi.var, negate(phi.body))
    if isinstance(phi, Forall):
        return Exists(phi.var, negate(phi.body))
    raise ValueError("only first-order formulas can be negated")


def rename_free(phi: Formula, mapping: dict[str, str]) -> Formula:
    """Substitute variables for free variables.

    Capture is not checked; callers pass fresh names.
    """
    def r(v: str) -> str:
        return mapping.get(v, v)

    def rt(vs: tuple[str, ...]) -> tuple[str, ...]:
        return tuple(r(v) for v in vs)

    if isinstance(phi, BoolLit):
        return phi
    if isinstance(phi, RelLit):
        return RelLit(phi.name, rt(phi.args), phi.negated)
    if isinstance(phi, EqLit):
        return EqLit(r(phi.left), r(phi.right), phi.negated)
    if isinstance(phi, TeamAtom):
        return TeamAtom(phi.kind, rt(phi.left), rt(phi.right))
    if isinstance(phi, MultiteamAtom):
        cond = rename_free(phi.cond, mapping) if phi.cond is not None else None
        return MultiteamAtom(phi.kind, rt(phi.left), rt(phi.right), rt(phi.given),
                             phi.cmp, phi.threshold, cond)
    if isinstance(phi, TsvAtom):
        return TsvAtom(rename_free(phi.atom, mapping), phi.bound)
    if isinstance(phi, And):
        return conj(*(rename_free(p, mapping) for p in phi.parts))
    if isinstance(phi, Or):
        return disj(*(rename_free(p, mapping) for p in phi.parts))
    if isinstance(phi, (Exists, Forall)):
        inner = {k: v for k, v in mapping.items() if k != phi.var}
        return type(phi)(phi.var, rename_free(phi.body, inner))
    raise TypeError(phi)


@dataclass
class FreshNames:
    """Generator of reserved variable names ``$<hint><k>``."""
    counter: itertools.count = field(default_factory=itertools.count)

    def __call__(self, hint: str = "v") -> str:
        return f"{RESERVED_PREFIX}{hint}{next(self.counter)}"

    def many(self, n: int, hint: str = "v") -> tuple[str, ...]:
        return tuple(self(hint) for _ in range(n))


def expand_implication(zeta: Formula, chi: Formula) -> Formula:
    """``zeta -> chi`` as ``nnf(not zeta) or (zeta and chi)``.

    On a multiteam this holds iff ``chi`` holds on the rows satisfying ``zeta``.
    """
    if not is_first_order(zeta):
        raise ValueError("the antecedent of an implication must be first-order")
    return disj(negate(zeta), conj(zeta, chi))
