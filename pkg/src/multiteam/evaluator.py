"""Model checking under multiteam semantics and the two team semantics.

The multiteam search works per distinct row. Several exact reductions keep
it small; each can be switched off through ``EvalOptions`` for testing:

* locality: every node sees the multiteam restricted to its free variables,
* row compatibility: a row whose values falsify the first-order skeleton of a
  subformula (atoms read as unknown) cannot be routed into it,
* slicing: a subformula whose atoms all split along a variable is checked on
  each slice of that variable separately,
* dependence hints: an existential variable determined by ``dep(u; x)`` is
  chosen as a function of ``u`` instead of per occurrence,
* interchangeable rows: disjunction splits only distinguish rows by their
  projection onto the non-flat disjuncts; flat disjuncts share one sink.

``eval_oracle`` uses none of these and searches annotations directly.
"""
from __future__ import annotations

import itertools
import time
from collections import OrderedDict, defaultdict
from dataclasses import dataclass
from typing import Iterator, Optional

from .atoms import atom_holds, team_atom_holds
from .core import (Multiteam, Row, Structure, Team, _Bag, compositions, getter,
                   restrict, universal_extension)
from .fo import holds, holds3
from .syntax import (And, Exists, Forall, Formula, MultiteamAtom, Or, TeamAtom,
                     TsvAtom, free_vars, is_atom, is_first_order,
                     is_literal, size as formula_size)


class CapExceeded(RuntimeError):
    """An input exceeds a configured size cap."""


class TimeBudgetExceeded(CapExceeded):
    pass


@dataclass(frozen=True)
class EvalOptions:
    disjunction: str = "split"          # "split" or "cover"
    memo_budget: int = 400_000
    max_universe: int = 16
    max_size: Optional[int] = None      # cap on the multiteam size
    time_budget: Optional[float] = None  # seconds, per Evaluator
    restrict: bool = True
    prune: bool = True
    parallel: bool = False              # accepted; search runs in one thread

    def __post_init__(self):
        if self.disjunction not in ("split", "cover"):
            raise ValueError("disjunction must be 'split' or 'cover'")


class _Node:
    __slots__ = ("id", "f", "kind", "kids", "var", "free", "flat", "slice",
                 "hints", "cost")

    def __repr__(self):
        return f"<{self.kind} #{self.id}>"


def _slice_vars(f: Formula) -> Optional[frozenset]:
    """Variables along which truth decomposes into slices; ``None`` means all."""
    if is_literal(f):
        return None
    if isinstance(f, TeamAtom):
        if f.kind in ("dep", "anon"):
            return frozenset(f.left)
        if f.kind in ("excl", "incl", "equi", "cycle"):
            return frozenset(a for a, b in zip(f.left, f.right) if a == b)
        return frozenset()
    if isinstance(f, MultiteamAtom):
        if f.kind in ("minc", "minc_cond"):
            return frozenset(a for a, b in zip(f.left, f.right) if a == b)
        if f.kind == "fork":
            return frozenset(f.left)
        if f.kind == "mindep_cond":
            return frozenset(f.given)
        return frozenset()
    if isinstance(f, TsvAtom):
        return frozenset()
    raise TypeError(f)


def _meet(a: Optional[frozenset], b: Optional[frozenset]) -> Optional[frozenset]:
    if a is None:
        return b
    if b is None:
        return a
    return a & b


def _dep_hints(body: Formula, x: str) -> list[tuple[str, ...]]:
    """Tuples ``u`` with ``dep(u; x)`` a conjunct of ``body`` reached through
    conjunctions and quantifiers over other variables."""
    out = []

    def go(f, bound):
        if isinstance(f, And):
            for p in f.parts:
                go(p, bound)
        elif isinstance(f, (Exists, Forall)):
            if f.var != x:
                go(f.body, bound | {f.var})
        elif isinstance(f, TeamAtom) and f.kind == "dep" and f.right == (x,):
            if x not in f.left and not (set(f.left) & bound):
                out.append(tuple(f.left))
    go(body, frozenset())
    return sorted(out, key=len)


class _Compiler:
    def __init__(self):
        self.nodes: list[_Node] = []

    def __call__(self, f: Formula) -> _Node:
        n = _Node()
        n.id = len(self.nodes)
        self.nodes.append(n)
        n.f = f
        n.var = None
        n.free = tuple(sorted(free_vars(f)))
        n.flat = is_first_order(f)
        n.hints = []
        if isinstance(f, (And, Or)):
            n.kind = "and" if isinstance(f, And) else "or"
            n.kids = [self(p) for p in f.parts]
            n.slice = None
            for k in n.kids:
                n.slice = _meet(n.slice, k.slice)
            n.cost = sum(k.cost for k in n.kids) + 1
            if n.kind == "and":
                n.kids.sort(key=lambda k: (not k.flat, k.kind != "atom", k.cost))
        elif isinstance(f, (Exists, Forall)):
            n.kind = "ex" if isinstance(f, Exists) else "all"
            n.var = f.var
            n.kids = [self(f.body)]
            body = n.kids[0]
            n.slice = None if body.slice is None else body.slice - {f.var}
            n.cost = body.cost * 4 + 1
            if n.kind == "ex":
                n.hints = _dep_hints(f.body, f.var)
        elif is_atom(f):
            n.kind = "atom"
            n.kids = []
            n.slice = _slice_vars(f)
            n.cost = 1
        elif is_literal(f):
            n.kind = "lit"
            n.kids = []
            n.slice = None
            n.cost = 0
        else:
            raise TypeError(f)
        if n.flat:
            n.slice = None
        return n


class Evaluator:
    """Multiteam model checker for one structure and one formula.

    The memo table is kept between calls, so checking many multiteams
    against the same formula reuses work.
    """

    def __init__(self, structure: Structure, phi: Formula, options: EvalOptions | None = None):
        self.structure = structure
        self.phi = phi
        self.opts = options or EvalOptions()
        if structure.size > self.opts.max_universe:
            raise CapExceeded(f"universe of size {structure.size} exceeds cap {self.opts.max_universe}")
        self.root = _Compiler()(phi)
        self.universe = tuple(structure.universe)
        self.memo: OrderedDict = OrderedDict()
        self.compat_memo: dict = {}
        self.calls = 0
        self.deadline = None

    def __call__(self, m: Multiteam) -> bool:
        if not isinstance(m, Multiteam):
            raise TypeError("multiteam semantics needs natural multiplicities")
        missing = set(self.root.free) - set(m.domain)
        if missing:
            raise ValueError(f"free variables {sorted(missing)} are not in the domain")
        if self.opts.max_size is not None and m.size > self.opts.max_size:
            raise CapExceeded(f"multiteam size {m.size} exceeds cap {self.opts.max_size}")
        if self.opts.time_budget is not None:
            self.deadline = time.monotonic() + self.opts.time_budget
        return self._eval(self.root, m)

    # -- helpers --

    def _tick(self):
        self.calls += 1
        if self.deadline is not None and self.calls % 256 == 0 and time.monotonic() > self.deadline:
            raise TimeBudgetExceeded("time budget exhausted")

    def _compat(self, node: _Node, dom: tuple, row: Row) -> bool:
        """False when no occurrence of ``row`` can be routed into ``node``."""
        if node.kind == "atom":
            return True
        key = (node.id, getter(dom, node.free)(row))
        hit = self.compat_memo.get(key)
        if hit is None:
            env = dict(zip(dom, row))
            hit = holds3(self.structure, env, node.f) is not False
            self.compat_memo[key] = hit
        return hit

    def _flat(self, node: _Node, m: _Bag) -> bool:
        dom = m.domain
        for r in m.rows:
            if not holds(self.structure, dict(zip(dom, r)), node.f):
                return False
        return True

    # -- main recursion --

    def _eval(self, node: _Node, m: _Bag) -> bool:
        if not m.rows:
            return True
        if self.opts.restrict and m.domain != node.free:
            m = restrict(m, node.free)
        key = (node.id, m.key())
        memo = self.memo
        hit = memo.get(key)
        if hit is not None:
            memo.move_to_end(key)
            return hit
        self._tick()
        res = self._dispatch(node, m)
        memo[key] = res
        if len(memo) > self.opts.memo_budget:
            memo.popitem(last=False)
        return res

    def _dispatch(self, node: _Node, m: _Bag) -> bool:
        if node.flat:
            return self._flat(node, m)
        if node.kind == "atom":
            return atom_holds(node.f, m, self.structure)
        if self.opts.prune:
            dom = m.domain
            for r in m.rows:
                if not self._compat(node, dom, r):
                    return False
            if node.slice:
                sv = [v for v in m.domain if v in node.slice]
                if sv:
                    get = getter(m.domain, sv)
                    parts: dict = defaultdict(dict)
                    for r, w in m.rows.items():
                        parts[get(r)][r] = w
                    if len(parts) > 1:
                        return all(self._eval(node, type(m)._make(m.domain, p))
                                   for _, p in sorted(parts.items()))
        if node.kind == "and":
            return all(self._eval(k, m) for k in node.kids)
        if node.kind == "or":
            if self.opts.disjunction == "cover":
                return self._or_cover(node, m)
            return self._or_split(node, m)
        if node.kind == "all":
            return self._eval(node.kids[0], universal_extension(m, node.var, self.universe))
        return self._exists(node, m)

    def _or_split(self, node: _Node, m: _Bag) -> bool:
        prune = self.opts.prune
        kids = node.kids
        flat = [k for k in kids if k.flat] if prune else []
        hard = [k for k in kids if not k.flat] if prune else list(kids)
        dom = m.domain
        if prune:
            cols = sorted(set().union(*(k.free for k in hard)))
        else:
            cols = list(dom)
        proj = getter(dom, cols)
        groups: dict = defaultdict(int)
        for r, w in m.rows.items():
            env = None
            targets = []
            sink = False
            if flat:
                env = dict(zip(dom, r))
                sink = any(holds(self.structure, env, k.f) for k in flat)
            if sink:
                targets.append(-1)
            for j, k in enumerate(hard):
                if not prune or self._compat(k, dom, r):
                    targets.append(j)
            if not targets:
                return False
            groups[proj(r), tuple(targets)] += w
        cols = tuple(cols)
        glist = sorted(groups.items())
        options = [list(compositions(w, len(t))) for (_, t), w in glist]
        for combo in itertools.product(*options):
            parts = [defaultdict(int) for _ in hard]
            for ((p, targets), _), counts in zip(glist, combo):
                for t, c in zip(targets, counts):
                    if c and t >= 0:
                        parts[t][p] += c
            if all(self._eval(k, Multiteam._make(cols, dict(part)))
                   for k, part in sorted(zip(hard, parts), key=lambda kp: kp[0].cost)):
                return True
        return False

    def _or_cover(self, node: _Node, m: _Bag) -> bool:
        kids = node.kids
        rows = sorted(m.rows.items())
        per_row = []
        for r, w in rows:
            opts = [c for c in itertools.product(range(w + 1), repeat=len(kids)) if sum(c) >= w]
            per_row.append(opts)
        for combo in itertools.product(*per_row):
            parts = [{} for _ in kids]
            for (r, _), counts in zip(rows, combo):
                for j, c in enumerate(counts):
                    if c:
                        parts[j][r] = c
            if all(self._eval(k, Multiteam._make(m.domain, p)) for k, p in zip(kids, parts)):
                return True
        return False

    def _exists(self, node: _Node, m: _Bag) -> bool:
        x = node.var
        body = node.kids[0]
        dom = m.domain
        keep = tuple(v for v in dom if v != x)
        old = getter(dom, keep)
        newdom = tuple(sorted(keep + (x,)))
        pos = newdom.index(x)
        rows = sorted(m.rows.items())
        cands = []
        for r, w in rows:
            base = old(r)
            cs = []
            for a in self.universe:
                nr = base[:pos] + (a,) + base[pos:]
                if not self.opts.prune or self._compat(body, newdom, nr):
                    cs.append(a)
            if not cs:
                return False
            cands.append((base, w, cs))
        hint = None
        if self.opts.prune:
            for u in node.hints:
                if set(u) <= set(keep):
                    hint = u
                    break
        if hint is not None:
            gu = getter(keep, hint)
            allowed: dict = {}
            for base, _, cs in cands:
                k = gu(base)
                allowed[k] = [a for a in allowed.get(k, cs) if a in cs]
                if not allowed[k]:
                    return False
            keys = sorted(allowed)
            for choice in itertools.product(*(allowed[k] for k in keys)):
                f = dict(zip(keys, choice))
                acc: dict = {}
                for base, w, _ in cands:
                    nr = base[:pos] + (f[gu(base)],) + base[pos:]
                    acc[nr] = acc.get(nr, 0) + w
                if self._eval(body, Multiteam._make(newdom, acc)):
                    return True
            return False
        options = [list(compositions(w, len(cs))) for _, w, cs in cands]
        for combo in itertools.product(*options):
            acc = {}
            for (base, _, cs), counts in zip(cands, combo):
                for a, c in zip(cs, counts):
                    if c:
                        nr = base[:pos] + (a,) + base[pos:]
                        acc[nr] = acc.get(nr, 0) + c
            if self._eval(body, Multiteam._make(newdom, acc)):
                return True
        return False


def evaluate(structure: Structure, m: Multiteam, phi: Formula,
             options: EvalOptions | None = None) -> bool:
    """Truth of ``phi`` on the multiteam ``m`` under multiteam semantics."""
    return Evaluator(structure, phi, options)(m)


# --- team semantics -----------------------------------------------------------

class TeamEvaluator:
    """Lax or strict team semantics; multiteam atoms are rejected."""

    def __init__(self, structure: Structure, phi: Formula, mode: str = "lax"):
        if mode not in ("lax", "strict"):
            raise ValueError("mode must be 'lax' or 'strict'")
        for f in _walk_atoms(phi):
            if isinstance(f, MultiteamAtom):
                raise ValueError("multiteam atoms have no team semantics; use tsv first")
        self.structure = structure
        self.mode = mode
        self.root = _Compiler()(phi)
        self.universe = tuple(structure.universe)
        self.memo: dict = {}

    def __call__(self, t: Team) -> bool:
        missing = set(self.root.free) - set(t.domain)
        if missing:
            raise ValueError(f"free variables {sorted(missing)} are not in the domain")
        return self._eval(self.root, t.domain, t.rows)

    def _eval(self, node: _Node, dom: tuple, rows: frozenset) -> bool:
        if not rows:
            return True
        if self.mode == "lax" and dom != node.free:
            get = getter(dom, node.free)
            rows = frozenset(get(r) for r in rows)
            dom = node.free
        key = (node.id, dom, rows)
        hit = self.memo.get(key)
        if hit is None:
            hit = self._dispatch(node, dom, rows)
            self.memo[key] = hit
        return hit

    def _dispatch(self, node, dom, rows) -> bool:
        st = self.structure
        if node.flat:
            return all(holds(st, dict(zip(dom, r)), node.f) for r in rows)
        if node.kind == "atom":
            t = _team(dom, rows)
            if isinstance(node.f, TsvAtom):
                return atom_holds(node.f, t, st)
            return team_atom_holds(node.f, t)
        if node.kind == "and":
            return all(self._eval(k, dom, rows) for k in node.kids)
        if node.kind == "all":
            keep = tuple(v for v in dom if v != node.var)
            old = getter(dom, keep)
            nd = tuple(sorted(keep + (node.var,)))
            pos = nd.index(node.var)
            new = frozenset(old(r)[:pos] + (a,) + old(r)[pos:] for r in rows for a in self.universe)
            return self._eval(node.kids[0], nd, new)
        rows_l = sorted(rows)
        if node.kind == "or":
            k = len(node.kids)
            if self.mode == "lax":
                choices = [c for c in itertools.product((0, 1), repeat=k) if any(c)]
            else:
                choices = [tuple(int(i == j) for i in range(k)) for j in range(k)]
            per_row = []
            for r in rows_l:
                ok = [c for c in choices
                      if all(not c[j] or self._compat(node.kids[j], dom, r) for j in range(k))]
                if not ok:
                    return False
                per_row.append(ok)
            for combo in itertools.product(*per_row):
                parts = [frozenset(r for r, c in zip(rows_l, combo) if c[j]) for j in range(k)]
                if all(self._eval(node.kids[j], dom, parts[j]) for j in range(k)):
                    return True
            return False
        # existential
        x = node.var
        keep = tuple(v for v in dom if v != x)
        old = getter(dom, keep)
        nd = tuple(sorted(keep + (x,)))
        pos = nd.index(x)
        per_row = []
        for r in rows_l:
            base = old(r)
            cs = [a for a in self.universe
                  if self._compat(node.kids[0], nd, base[:pos] + (a,) + base[pos:])]
            if not cs:
                return False
            if self.mode == "lax":
                per_row.append([s for n in range(1, len(cs) + 1)
                                for s in itertools.combinations(cs, n)])
            else:
                per_row.append([(a,) for a in cs])
            per_row[-1] = [(base, s) for s in per_row[-1]]
        for combo in itertools.product(*per_row):
            new = frozenset(b[:pos] + (a,) + b[pos:] for b, s in combo for a in s)
            if self._eval(node.kids[0], nd, new):
                return True
        return False

    def _compat(self, node, dom, row) -> bool:
        if node.kind == "atom":
            return True
        return holds3(self.structure, dict(zip(dom, row)), node.f) is not False


def _team(dom, rows) -> Team:
    t = Team.__new__(Team)
    t.domain = dom
    t.rows = rows
    return t


def is_flat(phi: Formula) -> bool:
    """No dependency atom anywhere, so truth is checked row by row."""
    return is_first_order(phi)


def _walk_atoms(phi):
    from .syntax import walk
    return (f for f in walk(phi) if is_atom(f))


def eval_team(structure: Structure, team: Team, phi: Formula, mode: str = "lax") -> bool:
    """Truth of ``phi`` on a team under lax or strict team semantics."""
    return TeamEvaluator(structure, phi, mode)(team)


# --- annotation oracle ---------------------------------------------------------

@dataclass(frozen=True)
class OracleCaps:
    max_universe: int = 3
    max_size: int = 12
    max_formula_size: int = 40


@dataclass
class OracleResult:
    holds: bool
    annotation: Optional[dict]  # path (tuple of child indices) -> Multiteam


def eval_oracle(structure: Structure, m: Multiteam, phi: Formula,
                caps: OracleCaps | None = None) -> OracleResult:
    """Decide truth by searching annotations of the syntax tree directly.

    Disjunction nodes try every split of the multiteam, existential nodes
    every per-occurrence choice (as counts per distinct row). No pruning,
    restriction or memoisation is used.
    """
    caps = caps or OracleCaps()
    if structure.size > caps.max_universe:
        raise CapExceeded("universe too large for the oracle")
    if m.size > caps.max_size:
        raise CapExceeded("multiteam too large for the oracle")
    if formula_size(phi) > caps.max_formula_size:
        raise CapExceeded("formula too large for the oracle")
    if not free_vars(phi) <= set(m.domain):
        raise ValueError("free variables of the formula are not in the domain")
    ann = _witness(structure, m, phi, ())
    return OracleResult(ann is not None, ann)


def _splits(m: Multiteam, k: int) -> Iterator[list[Multiteam]]:
    rows = m.items()
    for combo in itertools.product(*(list(compositions(w, k)) for _, w in rows)):
        parts = [{} for _ in range(k)]
        for (r, _), counts in zip(rows, combo):
            for j, c in enumerate(counts):
                if c:
                    parts[j][r] = c
        yield [Multiteam(m.domain, p) for p in parts]


def _choices(m: Multiteam, x: str, universe) -> Iterator[Multiteam]:
    rows = m.items()
    keep = [v for v in m.domain if v != x]
    old = getter(m.domain, keep)
    dom = tuple(keep) + (x,)
    for combo in itertools.product(*(list(compositions(w, len(universe))) for _, w in rows)):
        acc: list = []
        for (r, _), counts in zip(rows, combo):
            for a, c in zip(universe, counts):
                if c:
                    acc.append((old(r) + (a,), c))
        yield Multiteam(dom, acc)


def _witness(st: Structure, m: Multiteam, f: Formula, path: tuple) -> Optional[dict]:
    if is_literal(f):
        ok = all(holds(st, s, f) for s, _ in m.assignments())
        return {path: m} if ok else None
    if is_atom(f):
        return {path: m} if atom_holds(f, m, st) else None
    if isinstance(f, And):
        out = {path: m}
        for i, p in enumerate(f.parts):
            sub = _witness(st, m, p, path + (i,))
            if sub is None:
                return None
            out.update(sub)
        return out
    if isinstance(f, Or):
        for parts in _splits(m, len(f.parts)):
            out = {path: m}
            for i, (p, sub_m) in enumerate(zip(f.parts, parts)):
                sub = _witness(st, sub_m, p, path + (i,))
                if sub is None:
                    break
                out.update(sub)
            else:
                return out
        return None
    if isinstance(f, Forall):
        sub = _witness(st, universal_extension(m, f.var, st.universe), f.body, path + (0,))
        return None if sub is None else {path: m, **sub}
    if isinstance(f, Exists):
        for ext in _choices(m, f.var, tuple(st.universe)):
            sub = _witness(st, ext, f.body, path + (0,))
            if sub is not None:
                return {path: m, **sub}
        return None
    raise TypeError(f)


def validate_annotation(st: Structure, m: Multiteam, phi: Formula, ann: dict,
                        disjunction: str = "split") -> bool:
    """Check that ``ann`` is a structurally valid annotation with true leaves."""
    from .core import mt_sub, mt_sum

    def ok(f, path, cur) -> bool:
        if ann.get(path) != cur:
            return False
        if is_literal(f):
            return all(holds(st, s, f) for s, _ in cur.assignments())
        if is_atom(f):
            return atom_holds(f, cur, st)
        kids = [ann.get(path + (i,)) for i in range(len(_kids(f)))]
        if any(k is None for k in kids):
            return False
        if isinstance(f, And):
            return all(k == cur for k in kids) and all(
                ok(p, path + (i,), cur) for i, p in enumerate(f.parts))
        if isinstance(f, Or):
            if any(k.domain != cur.domain for k in kids):
                return False
            if disjunction == "split":
                good = mt_sum(*kids) == cur
            else:
                good = all(mt_sub(k, cur) for k in kids) and mt_sub(cur, mt_sum(*kids))
            return good and all(ok(p, path + (i,), k) for i, (p, k) in enumerate(zip(f.parts, kids)))
        child = kids[0]
        if isinstance(f, Forall):
            return ok(f.body, path + (0,), universal_extension(cur, f.var, st.universe)) \
                if child == universal_extension(cur, f.var, st.universe) else False
        keep = [v for v in cur.domain if v != f.var]
        if set(child.domain) != set(keep) | {f.var}:
            return False
        if restrict(child, keep) != restrict(cur, keep):
            return False
        return ok(f.body, path + (0,), child)

    return ok(phi, (), m)


def _kids(f):
    from .syntax import children
    return children(f)
