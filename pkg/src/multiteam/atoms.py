"""Team and multiteam dependency atoms.

Team atoms look only at the set of rows. Multiteam atoms count rows with
their multiplicities; the same code serves natural and rational weights.
All atoms hold on the empty (multi)team.
"""
from __future__ import annotations

import itertools
from collections import Counter, defaultdict
from fractions import Fraction
from typing import Iterable, Sequence

from .core import Multiteam, Row, Structure, Team, _Bag, getter
from .syntax import MultiteamAtom, TeamAtom, TsvAtom


# --- team atoms --------------------------------------------------------------

def _rows(t) -> Iterable[Row]:
    return t.rows if isinstance(t, Team) else t.rows.keys()


def dep_holds(t, xs: Sequence[str], y: str) -> bool:
    gx, gy = getter(t.domain, xs), getter(t.domain, (y,))
    seen: dict[Row, Row] = {}
    for r in _rows(t):
        if seen.setdefault(gx(r), gy(r)) != gy(r):
            return False
    return True


def excl_holds(t, xs: Sequence[str], ys: Sequence[str]) -> bool:
    rows = list(_rows(t))
    if not rows:
        return True
    gx, gy = getter(t.domain, xs), getter(t.domain, ys)
    return not ({gx(r) for r in rows} & {gy(r) for r in rows})


def incl_holds(t, xs: Sequence[str], ys: Sequence[str]) -> bool:
    gx, gy = getter(t.domain, xs), getter(t.domain, ys)
    rows = list(_rows(t))
    return {gx(r) for r in rows} <= {gy(r) for r in rows}


def equi_holds(t, xs: Sequence[str], ys: Sequence[str]) -> bool:
    return incl_holds(t, xs, ys) and incl_holds(t, ys, xs)


def anon_holds(t, xs: Sequence[str], y: str) -> bool:
    """Every row has a partner agreeing on ``xs`` and differing on ``y``."""
    gx, gy = getter(t.domain, xs), getter(t.domain, (y,))
    ys: dict[Row, set] = defaultdict(set)
    for r in _rows(t):
        ys[gx(r)].add(gy(r))
    return all(len(v) >= 2 for v in ys.values())


def indep_holds(t, xs: Sequence[str], ys: Sequence[str]) -> bool:
    gx, gy = getter(t.domain, xs), getter(t.domain, ys)
    rows = list(_rows(t))
    pairs = {(gx(r), gy(r)) for r in rows}
    xv = {p[0] for p in pairs}
    yv = {p[1] for p in pairs}
    return len(pairs) == len(xv) * len(yv)


def value_graph(t, xs: Sequence[str], ys: Sequence[str]) -> set[tuple[Row, Row]]:
    """Directed edges ``s(xs) -> s(ys)`` for the rows ``s`` of ``t``."""
    gx, gy = getter(t.domain, xs), getter(t.domain, ys)
    return {(gx(r), gy(r)) for r in _rows(t)}


def cycle_decomposable(edges: Iterable[tuple]) -> bool:
    """Whether a finite digraph is a union of directed cycles.

    This holds exactly when every edge lies on a cycle, i.e. when the head of
    each edge reaches its tail.
    """
    succ: dict = defaultdict(set)
    edges = list(edges)
    for a, b in edges:
        succ[a].add(b)
    reach_cache: dict = {}

    def reach(start):
        if start not in reach_cache:
            seen, stack = {start}, [start]
            while stack:
                for n in succ[stack.pop()]:
                    if n not in seen:
                        seen.add(n)
                        stack.append(n)
            reach_cache[start] = seen
        return reach_cache[start]

    return all(a in reach(b) for a, b in edges)


def cycle_holds(t, xs: Sequence[str], ys: Sequence[str]) -> bool:
    return cycle_decomposable(value_graph(t, xs, ys))


_TEAM = {
    "dep": lambda t, a: dep_holds(t, a.left, a.right[0]),
    "excl": lambda t, a: excl_holds(t, a.left, a.right),
    "incl": lambda t, a: incl_holds(t, a.left, a.right),
    "equi": lambda t, a: equi_holds(t, a.left, a.right),
    "anon": lambda t, a: anon_holds(t, a.left, a.right[0]),
    "indep": lambda t, a: indep_holds(t, a.left, a.right),
    "cycle": lambda t, a: cycle_holds(t, a.left, a.right),
}


def team_atom_holds(atom: TeamAtom, t) -> bool:
    """Team atom on a team, or on the support of a multiteam."""
    return _TEAM[atom.kind](t, atom)


# --- multiteam atoms ---------------------------------------------------------

def _counts(m: _Bag, xs: Sequence[str]) -> Counter:
    g = getter(m.domain, xs)
    c: Counter = Counter()
    for r, w in m.rows.items():
        c[g(r)] += w
    return c


def minc_holds(m: _Bag, xs: Sequence[str], ys: Sequence[str]) -> bool:
    """Value multiset of ``xs`` is contained in that of ``ys``."""
    cy = _counts(m, ys)
    return all(w <= cy.get(k, 0) for k, w in _counts(m, xs).items())


def minc_cond_holds(m: _Bag, xs, ys, cond, structure: Structure) -> bool:
    from .fo import holds
    cx: Counter = Counter()
    gx = getter(m.domain, xs)
    for r, w in m.rows.items():
        if holds(structure, dict(zip(m.domain, r)), cond):
            cx[gx(r)] += w
    cy = _counts(m, ys)
    return all(w <= cy.get(k, 0) for k, w in cx.items())


def _cmp(a, op: str, b) -> bool:
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == "=":
        return a == b
    if op == ">=":
        return a >= b
    return a > b


def fork_holds(m: _Bag, xs, ys, op: str, p) -> bool:
    """Every positive conditional probability of ``ys`` given ``xs`` compares with ``p``."""
    p = Fraction(p)
    gx, gy = getter(m.domain, xs), getter(m.domain, ys)
    cx: Counter = Counter()
    cxy: Counter = Counter()
    for r, w in m.rows.items():
        a = gx(r)
        cx[a] += w
        cxy[a, gy(r)] += w
    return all(_cmp(Fraction(w) / cx[a], op, p) for (a, _), w in cxy.items() if w)


def mindep_holds(m: _Bag, xs, ys) -> bool:
    """Probabilistic independence of ``xs`` and ``ys``, cross-multiplied."""
    total = m.size
    gx, gy = getter(m.domain, xs), getter(m.domain, ys)
    cx: Counter = Counter()
    cy: Counter = Counter()
    cxy: Counter = Counter()
    for r, w in m.rows.items():
        a, b = gx(r), gy(r)
        cx[a] += w
        cy[b] += w
        cxy[a, b] += w
    return all(cx[a] * cy[b] == total * cxy.get((a, b), 0) for a in cx for b in cy)


def mindep_cond_holds(m: _Bag, given, xs, ys) -> bool:
    gz = getter(m.domain, given)
    groups: dict[Row, dict] = defaultdict(dict)
    for r, w in m.rows.items():
        groups[gz(r)][r] = w
    return all(mindep_holds(type(m)._make(m.domain, g), xs, ys) for g in groups.values())


def multiteam_atom_holds(atom: MultiteamAtom, m: _Bag, structure: Structure | None = None) -> bool:
    k = atom.kind
    if k == "minc":
        return minc_holds(m, atom.left, atom.right)
    if k == "minc_cond":
        if structure is None:
            raise ValueError("minc_cond needs a structure")
        return minc_cond_holds(m, atom.left, atom.right, atom.cond, structure)
    if k == "fork":
        return fork_holds(m, atom.left, atom.right, atom.cmp, atom.threshold)
    if k == "mindep":
        return mindep_holds(m, atom.left, atom.right)
    if k == "mindep_cond":
        return mindep_cond_holds(m, atom.given, atom.left, atom.right)
    raise ValueError(k)


def exists_multiplicities(atom: MultiteamAtom, team: Team, bound: int,
                          structure: Structure | None = None) -> bool:
    """Search ``n: team -> {1..bound}`` making the multiteam atom true."""
    rows = sorted(team.rows)
    if not rows:
        return True
    for ns in itertools.product(range(1, bound + 1), repeat=len(rows)):
        m = Multiteam._make(team.domain, dict(zip(rows, ns)))
        if multiteam_atom_holds(atom, m, structure):
            return True
    return False


def atom_holds(atom, m, structure: Structure | None = None) -> bool:
    """Dispatch on the atom class; team atoms on multiteams use the support."""
    if isinstance(atom, TeamAtom):
        return team_atom_holds(atom, m)
    if isinstance(atom, MultiteamAtom):
        if isinstance(m, Team):
            raise ValueError("multiteam atom evaluated on a team")
        return multiteam_atom_holds(atom, m, structure)
    if isinstance(atom, TsvAtom):
        t = m if isinstance(m, Team) else m.support()
        t = t.restrict(set(_tsv_vars(atom)) & set(t.domain))
        return exists_multiplicities(atom.atom, t, atom.bound, structure)
    raise TypeError(atom)


def _tsv_vars(atom: TsvAtom):
    from .syntax import atom_vars
    return atom_vars(atom)
