"""Tarski semantics for first-order formulas over single assignments."""
from __future__ import annotations

from typing import Mapping, Optional

from .core import Structure
from .syntax import (And, BoolLit, EqLit, Exists, Forall, Formula, Or, RelLit,
                     is_atom)


def literal_holds(structure: Structure, s: Mapping[str, int], lit: Formula) -> bool:
    if isinstance(lit, EqLit):
        return (s[lit.left] == s[lit.right]) != lit.negated
    if isinstance(lit, RelLit):
        return structure.holds(lit.name, [s[a] for a in lit.args]) != lit.negated
    if isinstance(lit, BoolLit):
        return lit.value
    raise TypeError(f"not a literal: {lit!r}")


def holds(structure: Structure, s: Mapping[str, int], phi: Formula) -> bool:
    """Truth of a first-order formula under one assignment."""
    if isinstance(phi, (EqLit, RelLit, BoolLit)):
        return literal_holds(structure, s, phi)
    if isinstance(phi, And):
        return all(holds(structure, s, p) for p in phi.parts)
    if isinstance(phi, Or):
        return any(holds(structure, s, p) for p in phi.parts)
    if isinstance(phi, (Exists, Forall)):
        env = dict(s)
        test = any if isinstance(phi, Exists) else all

        def branch(a):
            env[phi.var] = a
            return holds(structure, env, phi.body)
        return test(branch(a) for a in structure.universe)
    if is_atom(phi):
        raise ValueError("dependency atoms have no single-assignment semantics")
    raise TypeError(phi)


def holds3(structure: Structure, s: Mapping[str, int], phi: Formula,
           expand: int = 2) -> Optional[bool]:
    """Three-valued over-approximation: ``False`` only if no row extending ``s``
    can occur in a satisfying evaluation.

    Dependency atoms and literals over unbound variables are unknown
    (``None``). Quantifiers are expanded while ``expand`` allows it, otherwise
    the bound variable is left unknown.
    """
    if isinstance(phi, BoolLit):
        return phi.value
    if isinstance(phi, EqLit):
        if phi.left not in s or phi.right not in s:
            return None
        return (s[phi.left] == s[phi.right]) != phi.negated
    if isinstance(phi, RelLit):
        if any(a not in s for a in phi.args):
            return None
        return structure.holds(phi.name, [s[a] for a in phi.args]) != phi.negated
    if is_atom(phi):
        return None
    if isinstance(phi, And):
        out: Optional[bool] = True
        for p in phi.parts:
            v = holds3(structure, s, p, expand)
            if v is False:
                return False
            if v is None:
                out = None
        return out
    if isinstance(phi, Or):
        out = False
        for p in phi.parts:
            v = holds3(structure, s, p, expand)
            if v is True:
                return True
            if v is None:
                out = None
        return out
    if isinstance(phi, (Exists, Forall)):
        env = {k: v for k, v in s.items() if k != phi.var}
        if expand <= 0:
            return holds3(structure, env, phi.body, 0)
        vals = []
        for a in structure.universe:
            env[phi.var] = a
            vals.append(holds3(structure, env, phi.body, expand - 1))
        if isinstance(phi, Exists):
            if True in vals:
                return True
            return None if None in vals else False
        if False in vals:
            return False
        return None if None in vals else True
    raise TypeError(phi)
