"""Rational weights: approximation error, open/closed falsification, companions.

Openness and closedness quantify over uncountably many multiteams, so every
verdict here is relative to a finite probe grid. The falsifier looks for

* a not-open witness: ``M`` satisfying the atom and a perturbation direction
  along which every probe ``N`` with ``err_M(N) < eps`` fails, for every
  ``eps`` of the schedule (plus one much smaller limit probe);
* a not-closed witness: a limit ``L`` failing the atom approached by a
  sequence ``L + delta_n * d`` of satisfying multiteams.

The class reported is the strongest one neither witness rules out.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from .atoms import atom_holds, exists_multiplicities
from .core import Multiteam, Structure, WeightedMultiteam, all_rows, submultiteams
from .fo import holds
from .grid import GridSpec, multiteams, structures
from .syntax import (And, Formula, MultiteamAtom, TeamAtom, TsvAtom, free_vars, is_literal,
                     relation_signature)

INF = math.inf


class NotFlat(ValueError):
    """Weighted evaluation only covers literals, atoms and their conjunctions."""


class ProbeCapExceeded(RuntimeError):
    pass


def err(m: WeightedMultiteam, n: WeightedMultiteam):
    """L1 distance of the weights, or infinity when ``supp(n)`` leaves ``supp(m)``."""
    if m.domain != n.domain:
        raise ValueError(f"domains differ: {m.domain} vs {n.domain}")
    if not set(n.rows) <= set(m.rows):
        return INF
    return sum((abs(Fraction(w) - n.rows.get(r, 0)) for r, w in m.rows.items()), Fraction(0))


def eval_weighted_flat(phi: Formula, structure: Structure, m) -> bool:
    """Exact truth of a literal, an atom, or a conjunction of those on weights."""
    if isinstance(phi, And):
        return all(eval_weighted_flat(p, structure, m) for p in phi.parts)
    if is_literal(phi):
        return all(holds(structure, s, phi) for s, _ in m.assignments())
    if isinstance(phi, (TeamAtom, MultiteamAtom, TsvAtom)):
        return atom_holds(phi, m, structure)
    raise NotFlat(f"not a conjunction of atoms and literals: {phi}")


# --- probe grid ------------------------------------------------------------------------

@dataclass(frozen=True)
class ProbeGrid:
    """Where the falsifier looks.

    Weights are ``k / denominator`` for ``k = 1..denominator`` on supports of
    at most ``max_support`` rows. With ``scale_invariant`` only weight vectors
    whose numerators are coprime are visited; every atom shipped here is
    invariant under positive scaling, so the others add nothing.
    """
    universe: int = 2
    max_support: int = 4
    denominator: int = 8
    eps: tuple = tuple(Fraction(1, 2 ** k) for k in range(1, 7))
    limit_eps: Fraction = Fraction(1, 2 ** 20)
    seq_len: int = 8
    scale_invariant: bool = True
    max_points: int = 200000


def probe_points(domain: Sequence[str], probe: ProbeGrid) -> Iterator[WeightedMultiteam]:
    dom = tuple(sorted(domain))
    rows = all_rows(dom, range(probe.universe))
    count = 0
    for k in range(1, min(probe.max_support, len(rows)) + 1):
        for support in itertools.combinations(rows, k):
            for ns in itertools.product(range(1, probe.denominator + 1), repeat=k):
                if probe.scale_invariant and math.gcd(*ns) != 1:
                    continue
                count += 1
                if count > probe.max_points:
                    raise ProbeCapExceeded(f"more than {probe.max_points} probe points")
                yield WeightedMultiteam._make(
                    dom, {r: Fraction(n, probe.denominator) for r, n in zip(support, ns)})


def _shift(m: WeightedMultiteam, d: dict, step: Fraction) -> WeightedMultiteam:
    rows = dict(m.rows)
    for r, c in d.items():
        rows[r] = rows.get(r, Fraction(0)) + step * c
    return WeightedMultiteam._make(m.domain, {r: w for r, w in rows.items() if w})


def _directions(m: WeightedMultiteam) -> list[dict]:
    """Unit moves on one row and transfers between two rows of the support."""
    rows = sorted(m.rows)
    out = []
    for r in rows:
        out.append({r: 1})
        out.append({r: -1})
    for r, s in itertools.permutations(rows, 2):
        out.append({r: 1, s: -1})
    return out


# --- witnesses -------------------------------------------------------------------------

@dataclass
class NotOpenWitness:
    structure: Structure
    m: WeightedMultiteam
    direction: dict
    probes: list  # (eps, N) with err_M(N) < eps and N failing

    def describe(self) -> str:
        return f"M={self.m} direction={self.direction} fails at eps={[str(e) for e, _ in self.probes]}"


@dataclass
class NotClosedWitness:
    structure: Structure
    limit: WeightedMultiteam
    direction: dict
    sequence: list  # satisfying multiteams converging to the limit

    def describe(self) -> str:
        return f"limit={self.limit} approached along {self.direction} by {len(self.sequence)} terms"


@dataclass
class Verdict:
    atom: Formula
    claimed: str
    not_open: Optional[NotOpenWitness] = None
    not_closed: Optional[NotClosedWitness] = None
    points: int = 0

    @property
    def is_open(self) -> bool:
        return self.not_open is None

    @property
    def is_closed(self) -> bool:
        return self.not_closed is None


def _class(not_open, not_closed) -> str:
    if not_open is None and not_closed is None:
        return "clopen"
    if not_open is None:
        return "open"
    if not_closed is None:
        return "closed"
    return "neither"


def _not_open(atom, st, m, probe: ProbeGrid) -> Optional[NotOpenWitness]:
    wmin = min(m.rows.values())
    for d in _directions(m):
        norm = sum(abs(c) for c in d.values())
        probes = []
        for eps in probe.eps + (probe.limit_eps,):
            n = _shift(m, d, eps * wmin / (2 * norm))
            if eval_weighted_flat(atom, st, n):
                break
            probes.append((eps, n))
        else:
            return NotOpenWitness(st, m, d, probes)
    return None


def _not_closed(atom, st, limit, probe: ProbeGrid) -> Optional[NotClosedWitness]:
    rows = all_rows(limit.domain, range(probe.universe))
    outside = [r for r in rows if r not in limit.rows]
    room = probe.max_support - len(limit.rows)
    wmin = min(limit.rows.values())
    inside = sorted(limit.rows)
    for k in range(0, min(room, len(outside)) + 1):
        for grow in itertools.combinations(outside, k):
            base = {r: 1 for r in grow}
            moves = [{}] + [{r: c} for r in inside for c in (1, -1)]
            for mv in moves:
                d = {**base, **mv}
                if not d:
                    continue
                seq = []
                for n in range(1, probe.seq_len + 1):
                    mn = _shift(limit, d, wmin / 2 ** (n + 1))
                    if not eval_weighted_flat(atom, st, mn):
                        break
                    seq.append(mn)
                else:
                    return NotClosedWitness(st, limit, d, seq)
    return None


def _structures_for(atom, universe: int, structure: Optional[Structure]):
    if structure is not None:
        return [structure]
    return list(structures(relation_signature(atom), (universe,)))


def classify_atom(atom: Formula, probe: ProbeGrid = ProbeGrid(),
                  structure: Optional[Structure] = None) -> Verdict:
    """Search the probe grid for not-open and not-closed witnesses.

    Probe points are visited in canonical order and the first witness of each
    kind is kept.
    """
    domain = tuple(sorted(free_vars(atom)))
    not_open = not_closed = None
    count = 0
    for st in _structures_for(atom, probe.universe, structure):
        for m in probe_points(domain, probe):
            count += 1
            inside = eval_weighted_flat(atom, st, m)
            if inside and not_open is None:
                not_open = _not_open(atom, st, m, probe)
            if not inside and not_closed is None:
                not_closed = _not_closed(atom, st, m, probe)
            if not_open is not None and not_closed is not None:
                break
        if not_open is not None and not_closed is not None:
            break
    return Verdict(atom, _class(not_open, not_closed), not_open, not_closed, count)


def validate_witness(atom: Formula, w) -> bool:
    """Re-check a witness from scratch."""
    if isinstance(w, NotOpenWitness):
        if not eval_weighted_flat(atom, w.structure, w.m) or not w.probes:
            return False
        return all(err(w.m, n) < eps and not eval_weighted_flat(atom, w.structure, n)
                   for eps, n in w.probes)
    if isinstance(w, NotClosedWitness):
        if eval_weighted_flat(atom, w.structure, w.limit) or not w.sequence:
            return False
        dists = [sum(abs(n.rows.get(r, 0) - w.limit.rows.get(r, 0))
                     for r in set(n.rows) | set(w.limit.rows)) for n in w.sequence]
        shrinking = all(b < a for a, b in zip(dists, dists[1:]))
        return shrinking and all(eval_weighted_flat(atom, w.structure, n) for n in w.sequence)
    raise TypeError(w)


# --- companions ------------------------------------------------------------------------

@dataclass
class CompanionReport:
    """Atom-level checks of weight invariance, downwards closure and companionship.

    ``companions`` compares the atom with its team version (existence of
    multiplicities up to the grid bound) on every grid multiteam.
    """
    weight_invariant: bool
    downwards_closed: bool
    companions: bool
    checked: int
    invariance_witness: Optional[tuple] = None   # (structure, M1, M2) on one support
    dc_witness: Optional[tuple] = None           # (structure, M, N) with N below M
    companion_witness: Optional[tuple] = None    # (structure, M)
    notes: list = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        """Invariance implies downwards closure, which matches companionship."""
        return (not self.weight_invariant or self.downwards_closed) and (
            self.downwards_closed == self.companions)


def _team_version_holds(atom, m: Multiteam, bound: int, st: Structure) -> bool:
    if isinstance(atom, MultiteamAtom):
        return exists_multiplicities(atom, m.support(), bound, st)
    return eval_weighted_flat(atom, st, Multiteam._make(m.domain, {r: 1 for r in m.rows}))


def companion_check(atom: Formula, grid: GridSpec = GridSpec((2,), 4, 3, False),
                    structure: Optional[Structure] = None) -> CompanionReport:
    domain = tuple(sorted(free_vars(atom)))
    sts = [structure] if structure is not None else list(
        structures(relation_signature(atom), grid.universe_sizes))
    inv_w = dc_w = comp_w = None
    seen: dict = {}
    n = 0
    for st in sts:
        for m in multiteams(domain, st.size, grid.max_support, grid.max_mult, False):
            n += 1
            truth = eval_weighted_flat(atom, st, m)
            first = seen.setdefault((st, tuple(sorted(m.rows))), (m, truth))
            if first[1] != truth and inv_w is None:
                inv_w = (st, first[0], m)
            if truth and dc_w is None:
                for sub in submultiteams(m):
                    if sub.rows and not eval_weighted_flat(atom, st, sub):
                        dc_w = (st, m, sub)
                        break
            if comp_w is None and truth != _team_version_holds(atom, m, grid.max_mult, st):
                comp_w = (st, m)
    rep = CompanionReport(inv_w is None, dc_w is None, comp_w is None, n, inv_w, dc_w, comp_w)
    if rep.weight_invariant and not rep.downwards_closed:
        rep.notes.append("weight invariant but not downwards closed: the atom cannot be "
                         "topologically closed")
    return rep

