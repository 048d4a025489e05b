"""Formula rewrites and exhaustive grid checks.

Includes the definition of multiteam inclusion from independence, the
rewrite of restricted inclusion, the halving operator, team versions of
multiteam atoms, and grid searches for equivalence and closure properties.
"""
from __future__ import annotations

import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .core import Multiteam, Structure, mt_scale, mt_sum, submultiteams
from .evaluator import EvalOptions, Evaluator, TimeBudgetExceeded
from .grid import GridSpec, multiteams, structures
from .syntax import (FALSE, TRUE, EqLit, Exists, Formula, FreshNames,
                     MultiteamAtom, TeamAtom, TsvAtom, conj, disj, eq_tuple,
                     exists, expand_implication, forall, free_vars, is_atom,
                     is_first_order, neq_tuple, relation_signature, rename_free)

__all__ = [
    "expand_implication", "phi_sub", "rewrite_restricted_inclusion", "half_operator",
    "tsv_atom", "team_version", "check_equiv", "check_closure", "witness_family",
    "EquivReport", "ClosureReport", "GridSpec", "CLOSURE_PROPERTIES",
]


def phi_sub(xs: Sequence[str], ys: Sequence[str], fresh: FreshNames | None = None,
            variant: str = "partition") -> Formula:
    """Multiteam inclusion of ``xs`` in ``ys`` defined with independence atoms.

    Shape ``A zs A a A b (p1 | p2 | p3 | p4)`` where p4 carries ``mindep(zs; a, b)``.
    In the default ``partition`` variant the first-order guards of the four
    disjuncts are pairwise exclusive and cover everything, so the part routed to
    p4 is forced: rows with ``zs = ys, a != b`` and rows with ``zs = xs, a = b``.
    For a value u its weight is then ``|M_{ys=u}|`` under every pair ``a != b``
    and ``|M_{xs=u}|`` under every pair ``a = b``, and independence holds exactly
    when both value multisets agree.

    The ``loose`` variant uses the overlapping guards
    ``p1 = zs != xs & zs != ys``, ``p2 = zs != ys & a != b``, ``p3 = zs = ys & a = b``,
    ``p4 = (zs = ys | a = b) & mindep``. Optional rows then rebalance the
    counts and it is strictly weaker: it holds on ``{xy: 00, 01}``.
    """
    xs, ys = tuple(xs), tuple(ys)
    if len(xs) != len(ys):
        raise ValueError("tuples of different length")
    if variant not in ("partition", "loose"):
        raise ValueError(f"unknown variant {variant!r}")
    fresh = fresh or FreshNames()
    zs = fresh.many(len(xs), "z")
    a, b = fresh("a"), fresh("b")
    p1 = conj(neq_tuple(zs, xs), neq_tuple(zs, ys))
    p2 = conj(neq_tuple(zs, ys), EqLit(a, b, True))
    if variant == "loose":
        p3 = conj(eq_tuple(zs, ys), EqLit(a, b))
        guard = disj(eq_tuple(zs, ys), EqLit(a, b))
    else:
        p3 = conj(eq_tuple(zs, ys), neq_tuple(zs, xs), EqLit(a, b))
        guard = disj(conj(eq_tuple(zs, ys), EqLit(a, b, True)),
                     conj(eq_tuple(zs, xs), EqLit(a, b)))
    p4 = conj(guard, MultiteamAtom("mindep", zs, (a, b)))
    return forall(zs + (a, b), disj(p1, p2, p3, p4))


def rewrite_restricted_inclusion(xs: Sequence[str], ys: Sequence[str], alpha: Formula,
                                 fresh: FreshNames | None = None) -> Formula:
    """Restricted inclusion through plain inclusion and an implication.

    ``alpha`` may only mention variables of ``xs``.
    """
    xs, ys = tuple(xs), tuple(ys)
    if not is_first_order(alpha):
        raise ValueError("the restriction must be first-order")
    if not free_vars(alpha) <= set(xs):
        raise ValueError("the restriction may only mention the restricted tuple")
    if alpha == TRUE:
        return MultiteamAtom("minc", xs, ys)
    if alpha == FALSE:
        return TRUE
    fresh = fresh or FreshNames()
    xp = fresh.many(len(xs), "x")
    moved = rename_free(alpha, dict(zip(xs, xp)))
    body = conj(MultiteamAtom("minc", xp, xs), expand_implication(moved, eq_tuple(xp, ys)))
    return exists(xp, body)


def half_operator(psi: Formula, fresh: FreshNames | None = None) -> Formula:
    """Formula true on M iff ``psi`` holds on some half of M."""
    fresh = fresh or FreshNames()
    z = fresh("h")
    if z in free_vars(psi):
        raise ValueError("fresh variable clashes with the argument")
    const = TeamAtom("dep", (), (z,))
    fork = MultiteamAtom("fork", (), (z,), cmp="=", threshold=Fraction(1, 2))
    return Exists(z, conj(fork, disj(conj(const, psi), const)))


def witness_family(k: int) -> Multiteam:
    """Independent multiteam ``{00: 1, 01: k, 10: k, 11: k^2}`` over ``x, y``."""
    if k < 1:
        raise ValueError("k must be positive")
    return Multiteam(("x", "y"), {(0, 0): 1, (0, 1): k, (1, 0): k, (1, 1): k * k})


# --- team versions ---------------------------------------------------------------

def tsv_atom(atom: Formula, bound: int = 6) -> Formula:
    """Team version of an atom: a closed form when known, else a bounded search node."""
    if isinstance(atom, (TeamAtom, TsvAtom)):
        return atom
    if not isinstance(atom, MultiteamAtom):
        raise TypeError(atom)
    if atom.kind == "mindep":
        return TeamAtom("indep", atom.left, atom.right)
    if atom.kind == "minc":
        return TeamAtom("cycle", atom.left, atom.right)
    if (atom.kind == "fork" and atom.cmp == "<=" and atom.threshold == Fraction(1, 2)
            and len(atom.right) == 1):
        return TeamAtom("anon", atom.left, atom.right)
    return TsvAtom(atom, bound)


def team_version(phi: Formula, bound: int = 6) -> Formula:
    """Replace every multiteam atom by its team version."""
    from .syntax import And, Forall, Or
    if is_atom(phi):
        return tsv_atom(phi, bound)
    if isinstance(phi, And):
        return conj(*(team_version(p, bound) for p in phi.parts))
    if isinstance(phi, Or):
        return disj(*(team_version(p, bound) for p in phi.parts))
    if isinstance(phi, (Exists, Forall)):
        return type(phi)(phi.var, team_version(phi.body, bound))
    return phi


# --- grid checks -------------------------------------------------------------------

@dataclass
class EquivReport:
    equivalent: bool
    checked: int
    counterexample: Optional[tuple[Structure, Multiteam]] = None
    truth: Optional[tuple[bool, bool]] = None  # (phi, psi) on the counterexample


def _signature(*phis: Formula) -> dict[str, int]:
    sig: dict[str, int] = {}
    for f in phis:
        for k, v in relation_signature(f).items():
            if sig.setdefault(k, v) != v:
                raise ValueError(f"relation {k} used with two arities")
    return sig


def _equiv_one(args):
    st, phi, psi, grid, domain, options, deadline = args
    a, b = Evaluator(st, phi, options), Evaluator(st, psi, options)
    n = 0
    for m in multiteams(domain, st.size, grid.max_support, grid.max_mult, grid.include_empty):
        if deadline is not None and time.monotonic() > deadline:
            raise TimeBudgetExceeded("time budget exhausted")
        n += 1
        ta, tb = a(m), b(m)
        if ta != tb:
            return n, (st, m, ta, tb)
    return n, None


def check_equiv(phi: Formula, psi: Formula, grid: GridSpec,
                options: EvalOptions | None = None, jobs: int = 1,
                fixed_structures: Sequence[Structure] | None = None,
                time_budget: float | None = None) -> EquivReport:
    """Compare two formulas on every structure and multiteam of the grid.

    The counterexample reported is the first one in grid order.
    """
    domain = tuple(sorted(free_vars(phi) | free_vars(psi)))
    sts = list(fixed_structures) if fixed_structures is not None else \
        list(structures(_signature(phi, psi), grid.universe_sizes))
    deadline = time.monotonic() + time_budget if time_budget else None
    work = [(st, phi, psi, grid, domain, options, deadline) for st in sts]
    total = 0
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_equiv_one, work))
    else:
        results = []
        for w in work:
            results.append(_equiv_one(w))
            if results[-1][1] is not None:
                break
    for n, cex in results:
        total += n
        if cex is not None:
            st, m, ta, tb = cex
            return EquivReport(False, total, (st, m), (ta, tb))
    return EquivReport(True, total)


CLOSURE_PROPERTIES = ("downward", "ts-downward", "union", "scalar", "empty", "flat", "team-only")


@dataclass
class ClosureReport:
    prop: str
    holds: bool
    checked: int
    counterexample: Optional[dict] = None


def _closure_one(args):
    st, phi, prop, grid, domain, options, deadline = args
    ev = Evaluator(st, phi, options)
    ms = list(multiteams(domain, st.size, grid.max_support, grid.max_mult, True))
    n = 0

    def tick():
        nonlocal n
        n += 1
        if deadline is not None and n % 64 == 0 and time.monotonic() > deadline:
            raise TimeBudgetExceeded("time budget exhausted")

    if prop == "empty":
        tick()
        empty = Multiteam._make(domain, {})
        return n, None if ev(empty) else {"structure": st, "multiteam": empty}
    truth = {}
    for m in ms:
        tick()
        truth[m] = ev(m)
    if prop == "team-only":
        seen: dict = {}
        for m in ms:
            key = frozenset(m.rows)
            if key in seen and truth[seen[key]] != truth[m]:
                return n, {"structure": st, "multiteam": seen[key], "other": m}
            seen.setdefault(key, m)
        return n, None
    if prop == "flat":
        for m in ms:
            singles = all(ev(Multiteam._make(domain, {r: 1})) for r in m.rows)
            tick()
            if truth[m] != singles:
                return n, {"structure": st, "multiteam": m}
        return n, None
    good = [m for m in ms if truth[m]]
    if prop == "downward":
        for m in good:
            for sub in submultiteams(m):
                tick()
                if not ev(sub):
                    return n, {"structure": st, "multiteam": m, "sub": sub}
        return n, None
    if prop == "ts-downward":
        for m in good:
            rows = sorted(m.rows)
            for k in range(len(rows)):
                for keep in itertools.combinations(rows, k):
                    tick()
                    sub = Multiteam._make(domain, {r: m.rows[r] for r in keep})
                    if not ev(sub):
                        return n, {"structure": st, "multiteam": m, "sub": sub}
        return n, None
    if prop == "union":
        for i, m in enumerate(good):
            for other in good[i:]:
                tick()
                u = mt_sum(m, other)
                if not ev(u):
                    return n, {"structure": st, "multiteam": m, "other": other}
        return n, None
    if prop == "scalar":
        for m in good:
            for k in (0, 2, 3):
                tick()
                if not ev(mt_scale(k, m)):
                    return n, {"structure": st, "multiteam": m, "k": k}
        return n, None
    raise ValueError(f"unknown closure property {prop!r}")


def check_closure(phi: Formula, prop: str, grid: GridSpec,
                  options: EvalOptions | None = None, jobs: int = 1,
                  fixed_structures: Sequence[Structure] | None = None,
                  domain: Sequence[str] | None = None,
                  time_budget: float | None = None) -> ClosureReport:
    """Search the grid for a violation of a closure property of ``phi``.

    ``downward``: true on M implies true on every submultiset.
    ``ts-downward``: true on M implies true on every subset of its support,
    multiplicities kept. ``union``: true on M and N implies true on their
    additive union. ``scalar``: true on M implies true on kM for k in 0, 2, 3.
    ``empty``: true on the empty multiteam. ``flat``: true on M iff true on
    each single row. ``team-only``: truth depends only on the support.
    """
    if prop not in CLOSURE_PROPERTIES:
        raise ValueError(f"unknown closure property {prop!r}")
    dom = tuple(sorted(domain if domain is not None else free_vars(phi)))
    sts = list(fixed_structures) if fixed_structures is not None else \
        list(structures(_signature(phi), grid.universe_sizes))
    deadline = time.monotonic() + time_budget if time_budget else None
    work = [(st, phi, prop, grid, dom, options, deadline) for st in sts]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_closure_one, work))
    else:
        results = []
        for w in work:
            results.append(_closure_one(w))
            if results[-1][1] is not None:
                break
    total = 0
    for n, cex in results:
        total += n
        if cex is not None:
            return ClosureReport(prop, False, total, cex)
    return ClosureReport(prop, True, total)
