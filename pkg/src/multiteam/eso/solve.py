"""Deciding sentences on a multiteam structure.

Two routes. ``smt`` grounds the matrix over the finite universe, turning
every cell ``g(a)`` of a quantified function into an integer unknown, and
hands the resulting arithmetic problem to z3. ``enumerate`` walks through
all tables within the bounds and evaluates the matrix directly; it is only
usable for very small instances and serves as the reference route.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import z3

from ..core import compositions
from ..fo import holds, literal_holds
from ..syntax import is_literal
from .terms import (Add, Apply, EsoError, EsoSentence, MAnd, MExists, MForall, MOr, Mul,
                    MultiteamStructure, Sum, TermEq, Zero, eval_matrix, matrix_vars, term_vars)


class SolveCapExceeded(RuntimeError):
    """The enumeration route would visit too many candidate tables."""


@dataclass(frozen=True)
class SolveCaps:
    max_universe: int = 6
    max_cells: int = 4096          # grounded unknowns for the smt route
    max_candidates: int = 200000   # table combinations for the enumerate route


def bound_of(d: MultiteamStructure, ell: int) -> int:
    return d.total * d.size ** ell


# --- grounding ---------------------------------------------------------------------
#
# The ground problem is written as SMT-LIB text: building it through the
# z3 Python API costs far more than solving it. Terms ground to ints or
# strings, formulas to True, False or strings.

def _sx(op: str, args) -> str:
    return f"({op} {' '.join(map(str, args))})"


def _and(parts):
    if any(p is False for p in parts):
        return False
    rest = list(dict.fromkeys(p for p in parts if p is not True))
    return True if not rest else (rest[0] if len(rest) == 1 else _sx("and", rest))


def _or(parts):
    if any(p is True for p in parts):
        return True
    rest = list(dict.fromkeys(p for p in parts if p is not False))
    return False if not rest else (rest[0] if len(rest) == 1 else _sx("or", rest))


class _Grounder:
    def __init__(self, psi: EsoSentence, d: MultiteamStructure, symbolic_base: bool = False):
        self.psi = psi
        self.d = d
        self.symbolic_base = symbolic_base
        self.cells: dict[tuple[str, tuple[int, ...]], str] = {}
        self._memo: dict = {}
        self._vars: dict = {}

    def _free(self, x) -> tuple[str, ...]:
        hit = self._vars.get(id(x))
        if hit is None:
            vs = term_vars(x) if isinstance(x, (Zero, Apply, Add, Mul, Sum)) else matrix_vars(x)
            hit = self._vars[id(x)] = (x, tuple(sorted(vs)))
        return hit[1]

    def _key(self, x, env):
        return id(x), tuple(env.get(v) for v in self._free(x))

    def cell(self, fn: str, key: tuple[int, ...]):
        if fn == self.psi.base and not self.symbolic_base:
            return self.d.weights.get(key, 0)
        c = self.cells.get((fn, key))
        if c is None:
            c = self.cells[(fn, key)] = f"|{fn}[{','.join(map(str, key))}]|"
        return c

    def term(self, t, env):
        if isinstance(t, Zero):
            return 0
        if isinstance(t, Apply):
            return self.cell(t.fn, tuple(env[a] for a in t.args))
        if isinstance(t, (Add, Mul)):
            l, r = self.term(t.left, env), self.term(t.right, env)
            if isinstance(l, int) and isinstance(r, int):
                return l + r if isinstance(t, Add) else l * r
            if isinstance(t, Add):
                return r if l == 0 else l if r == 0 else _sx("+", (l, r))
            return 0 if 0 in (l, r) else r if l == 1 else l if r == 1 else _sx("*", (l, r))
        if isinstance(t, Sum):
            key = self._key(t, env)
            hit = self._memo.get(key)
            if hit is None:
                hit = self._memo[key] = self._sum(t, env)
            return hit
        raise TypeError(t)

    def _sum(self, t, env):
        e = dict(env)
        const, rest = 0, []
        for vals in itertools.product(range(self.d.size), repeat=len(t.vars)):
            e.update(zip(t.vars, vals))
            if holds(self.d.base, e, t.guard):
                v = self.term(t.body, e)
                if isinstance(v, int):
                    const += v
                else:
                    rest.append(v)
        if not rest:
            return const
        if const:
            rest.append(const)
        return rest[0] if len(rest) == 1 else _sx("+", rest)

    def formula(self, phi, env):
        if is_literal(phi):
            return literal_holds(self.d.base, env, phi)
        if isinstance(phi, TermEq):
            key = self._key(phi, env)
            hit = self._memo.get(key)
            if hit is None:
                l, r = self.term(phi.left, env), self.term(phi.right, env)
                if isinstance(l, int) and isinstance(r, int):
                    hit = l == r
                else:
                    hit = "true" if l == r else _sx("=", (l, r))
                self._memo[key] = hit
            return hit
        if isinstance(phi, MForall):
            vs, clauses = _prefix_clauses(phi)
            if clauses is not None:
                # variables closing the most literals are bound first
                lits = [x for c in clauses for x in c if is_literal(x)]
                vs.sort(key=lambda v: -sum(v in self._free(x) for x in lits))
                tagged = [(c, frozenset().union(*(self._free(x) for x in c))) for c in clauses]
                out: dict[str, None] = {}
                if not self._clauses(vs, tagged, env, out):
                    return False
                return _and(list(out))
        if isinstance(phi, MAnd):
            return self._lazy(phi.parts, env, False)
        if isinstance(phi, MOr):
            return self._lazy(phi.parts, env, True)
        if isinstance(phi, (MForall, MExists)):
            envs = []
            for a in range(self.d.size):
                e = dict(env)
                e[phi.var] = a
                envs.append(e)
            return self._lazy([phi.body] * len(envs), envs, isinstance(phi, MExists))
        raise TypeError(phi)

    def _lazy(self, parts, env, disjunctive: bool):
        stop = disjunctive
        out = []
        for i, p in enumerate(parts):
            g = self.formula(p, env[i] if isinstance(env, list) else env)
            if g is stop:
                return stop
            if g is not (not stop):
                out.append(g)
        return _or(out) if disjunctive else _and(out)

    def _clauses(self, vs, clauses, env, out) -> bool:
        """Collect into ``out`` the conditions for ``A vs. clause | clause | ...``.

        Only variables still mentioned by undecided clauses are enumerated, so
        selector guards prune whole branches before their variables are bound.
        Returns False when the block is already refuted.
        """
        live = []
        for c, cvs in clauses:
            rest = []
            for item in c:
                if is_literal(item) and all(v in env for v in self._free(item)):
                    if not literal_holds(self.d.base, env, item):
                        break
                else:
                    rest.append(item)
            else:
                if not rest:
                    return True
                live.append((rest, cvs))
        if not live:
            return False
        used = frozenset().union(*(cvs for _, cvs in live))
        pending = [v for v in vs if v in used and v not in env]
        if not pending:
            g = _or([_and([self.formula(x, env) for x in c]) for c, _ in live])
            if g is False:
                return False
            if g is not True:
                out[g] = None
            return True
        v, rest_vs = pending[0], pending[1:]
        for a in range(self.d.size):
            e = dict(env)
            e[v] = a
            if not self._clauses(rest_vs, live, e, out):
                return False
        return True


def _prefix_clauses(phi):
    """Split ``A x̄. DNF`` into variables and clauses, or return (vs, None)."""
    vs = []
    while isinstance(phi, MForall):
        vs.append(phi.var)
        phi = phi.body
    parts = phi.parts if isinstance(phi, MOr) else (phi,)
    clauses = []
    for p in parts:
        items = p.parts if isinstance(p, MAnd) else (p,)
        if not all(is_literal(x) or isinstance(x, TermEq) for x in items):
            return vs, None
        clauses.append(tuple(items))
    return vs, clauses


def solve_smt(psi: EsoSentence, d: MultiteamStructure, caps: SolveCaps = SolveCaps()
              ) -> Optional[dict[str, dict[tuple[int, ...], int]]]:
    """Witness tables for the quantified functions, or None."""
    _check(psi, d, caps)
    g = _Grounder(psi, d)
    body = g.formula(psi.matrix, {})
    if body is False:
        return None
    lines = []
    for q in psi.quantifiers:
        cells = [g.cell(q.name, key) for key in itertools.product(range(d.size), repeat=q.arity)]
        if len(g.cells) > caps.max_cells:
            raise SolveCapExceeded(f"more than {caps.max_cells} unknowns")
        lines.extend(f"(declare-const {c} Int)\n(assert (>= {c} 0))" for c in cells)
        total = cells[0] if len(cells) == 1 else _sx("+", cells)
        lines.append(f"(assert (<= {total} {bound_of(d, q.ell)}))")
    if body is not True:
        lines.append(f"(assert {body})")
    s = z3.Solver()
    s.from_string("\n".join(lines))
    if s.check() != z3.sat:
        return None
    model = s.model()
    out: dict[str, dict[tuple[int, ...], int]] = {q.name: {} for q in psi.quantifiers}
    for (fn, key), c in g.cells.items():
        v = model.eval(z3.Int(c[1:-1]), model_completion=True).as_long()
        if v:
            out[fn][key] = v
    return out


class Checker:
    """Decide one sentence on many weight functions over a fixed structure.

    The matrix is grounded once with the weight cells left symbolic; each
    query pins the weights and asks the same incremental solver again.
    """

    def __init__(self, psi: EsoSentence, base, caps: SolveCaps = SolveCaps()):
        d = MultiteamStructure(base, psi.base_arity, {})
        _check(psi, d, caps)
        self.psi, self.d = psi, d
        g = _Grounder(psi, d, symbolic_base=True)
        body = g.formula(psi.matrix, {})
        keys = list(itertools.product(range(d.size), repeat=psi.base_arity))
        fcells = [g.cell(psi.base, k) for k in keys]
        total = fcells[0] if len(fcells) == 1 else _sx("+", fcells)
        lines = []
        for q in psi.quantifiers:
            cells = [g.cell(q.name, k) for k in itertools.product(range(d.size), repeat=q.arity)]
            lines.extend(f"(assert (>= {c} 0))" for c in cells)
            qt = cells[0] if len(cells) == 1 else _sx("+", cells)
            lines.append(f"(assert (<= {qt} (* {d.size ** q.ell} {total})))")
        if len(g.cells) > caps.max_cells:
            raise SolveCapExceeded(f"more than {caps.max_cells} unknowns")
        if body is not True:
            lines.append(f"(assert {body})")
        decls = [f"(declare-const {c} Int)" for c in g.cells.values()]
        self.solver = z3.Solver()
        self.solver.from_string("\n".join(decls + lines))
        self.refuted = body is False
        self.fcells = {k: z3.Int(g.cell(psi.base, k)[1:-1]) for k in keys}

    def holds(self, weights) -> bool:
        if self.refuted:
            return False
        s = self.solver
        s.push()
        for k, c in self.fcells.items():
            s.add(c == weights.get(k, 0))
        ok = s.check() == z3.sat
        s.pop()
        return ok


def _check(psi: EsoSentence, d: MultiteamStructure, caps: SolveCaps):
    if d.arity != psi.base_arity:
        raise EsoError(f"the weight function has arity {d.arity}, the sentence expects {psi.base_arity}")
    if d.size > caps.max_universe:
        raise SolveCapExceeded(f"universe larger than {caps.max_universe}")


# --- enumeration ------------------------------------------------------------------------

def _tables(arity: int, size: int, bound: int):
    keys = list(itertools.product(range(size), repeat=arity))
    for total in range(bound + 1):
        for c in compositions(total, len(keys)):
            yield {k: v for k, v in zip(keys, c) if v}


def solve_enumerate(psi: EsoSentence, d: MultiteamStructure, caps: SolveCaps = SolveCaps()
                    ) -> Optional[dict[str, dict[tuple[int, ...], int]]]:
    _check(psi, d, caps)
    from math import comb
    count = 1
    for q in psi.quantifiers:
        cells = d.size ** q.arity
        count *= comb(bound_of(d, q.ell) + cells, cells)
        if count > caps.max_candidates:
            raise SolveCapExceeded(f"more than {caps.max_candidates} candidate tables")
    spaces = [list(_tables(q.arity, d.size, bound_of(d, q.ell))) for q in psi.quantifiers]
    for combo in itertools.product(*spaces):
        tables = {q.name: t for q, t in zip(psi.quantifiers, combo)}
        if eval_matrix(psi.matrix, d, {}, tables, psi.base):
            return tables
    return None


def eval_eso(psi: EsoSentence, d: MultiteamStructure, method: str = "smt",
             caps: SolveCaps = SolveCaps()) -> bool:
    """Truth of ``psi`` on ``d``."""
    if method == "smt":
        return solve_smt(psi, d, caps) is not None
    if method == "enumerate":
        return solve_enumerate(psi, d, caps) is not None
    raise ValueError(f"unknown method {method!r}")
