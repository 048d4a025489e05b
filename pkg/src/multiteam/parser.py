"""Surface syntax for formulas, structures and multiteams.

Formula grammar::

    phi  := "(" phi ("&" phi)+ ")" | "(" phi ("|" phi)+ ")" | "(" phi "->" phi ")"
          | ("E" | "A") var "." phi | lit | atom | "true" | "false"
    lit  := ["!"] rel "(" vars ")" | var ("=" | "!=") var
    atom := dep(vars; var) | excl(vars; vars) | incl(vars; vars) | equi(vars; vars)
          | anon(vars; var) | indep(vars; vars) | cycle(vars; vars)
          | minc(vars; vars) | minc[phi](vars; vars) | fork[cmp frac](vars; vars)
          | mindep(vars; vars) | mindep(vars | vars; vars) | tsv[n](atom)

Variable lists are separated by spaces or commas and may be empty. An
implication ``(a -> b)`` needs a first-order antecedent and is expanded on
parsing.
"""
from __future__ import annotations

import re
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import Multiteam, Structure, WeightedMultiteam, _Bag
from .syntax import (COMPARATORS, And, BoolLit, EqLit, Exists, Forall, Formula,
                     MultiteamAtom, Or, RelLit, TeamAtom, TsvAtom, conj, disj,
                     free_vars, is_first_order, walk, RESERVED_PREFIX)

KEYWORDS = {"dep", "excl", "incl", "equi", "anon", "indep", "cycle", "minc",
            "fork", "mindep", "tsv", "true", "false"}


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{msg} (line {line}, column {col})" if line else msg)
        self.line, self.col = line, col


_TOKEN = re.compile(r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<num>\d+(?:/\d+)?)
  | (?P<name>\$?[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op>->|!=|<=|>=|[()\[\]{};,.&|!=<>+*:])
""", re.VERBOSE)


@dataclass(frozen=True)
class Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str, allow_reserved: bool = False) -> list[Tok]:
    out, pos, line, line_start = [], 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        s = m.group()
        if kind == "name" and s.startswith(RESERVED_PREFIX) and not allow_reserved:
            raise ParseError(f"name {s!r} uses the reserved prefix {RESERVED_PREFIX!r}",
                             line, pos - line_start + 1)
        if kind != "ws":
            out.append(Tok(kind, s, line, pos - line_start + 1))
        for i, ch in enumerate(s):
            if ch == "\n":
                line += 1
                line_start = pos + i + 1
        pos = m.end()
    out.append(Tok("eof", "", line, pos - line_start + 1))
    return out


class _Parser:
    def __init__(self, text: str, allow_reserved: bool = False):
        self.toks = tokenize(text, allow_reserved)
        self.i = 0
        self.bound: list[str] = []

    # token helpers
    @property
    def cur(self) -> Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Optional[Tok] = None):
        tok = tok or self.cur
        raise ParseError(msg, tok.line, tok.col)

    def eat(self, text: Optional[str] = None, kind: Optional[str] = None) -> Tok:
        t = self.cur
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            want = repr(text) if text is not None else kind
            self.error(f"expected {want}, found {t.text or 'end of input'!r}")
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        return self.cur.text == text

    # grammar
    def formula(self) -> Formula:
        t = self.cur
        if t.text == "(":
            return self.paren()
        if t.text in ("E", "A") and self.peek().kind == "name":
            return self.quantifier()
        if t.text == "!":
            return self.negation()
        if t.kind == "name":
            if t.text == "true":
                self.i += 1
                return BoolLit(True)
            if t.text == "false":
                self.i += 1
                return BoolLit(False)
            if t.text in KEYWORDS:
                return self.atom()
            if self.peek().text == "(":
                return self.relation(False)
            if self.peek().text in ("=", "!="):
                left = self.eat(kind="name").text
                neg = self.eat().text == "!="
                right = self.var()
                return EqLit(left, right, neg)
        self.error(f"unexpected token {t.text or 'end of input'!r}")

    def paren(self) -> Formula:
        self.eat("(")
        first = self.formula()
        if self.at(")"):
            self.i += 1
            return first
        if self.at("->"):
            self.i += 1
            rhs = self.formula()
            self.eat(")")
            if not is_first_order(first):
                self.error("the antecedent of an implication must be first-order")
            from .syntax import expand_implication
            return expand_implication(first, rhs)
        op = self.cur.text
        if op not in ("&", "|"):
            self.error(f"expected '&', '|', '->' or ')', found {op!r}")
        parts = [first]
        while self.at(op):
            self.i += 1
            parts.append(self.formula())
        if self.cur.text in ("&", "|"):
            self.error("mixed '&' and '|' need explicit parentheses")
        self.eat(")")
        return conj(*parts) if op == "&" else disj(*parts)

    def quantifier(self) -> Formula:
        q = self.eat().text
        vt = self.cur
        v = self.var()
        if v in self.bound:
            self.error(f"variable {v!r} is rebound inside its own scope", vt)
        self.eat(".")
        self.bound.append(v)
        body = self.formula()
        self.bound.pop()
        return Exists(v, body) if q == "E" else Forall(v, body)

    def negation(self) -> Formula:
        bang = self.eat("!")
        t = self.cur
        if t.text in ("true", "false"):
            self.i += 1
            return BoolLit(t.text == "false")
        if t.text in KEYWORDS:
            self.error("negation cannot be applied to a dependency atom", bang)
        if t.kind == "name" and self.peek().text == "(":
            return self.relation(True)
        self.error("negation is only allowed in front of relation literals", bang)

    def relation(self, negated: bool) -> Formula:
        name = self.eat(kind="name").text
        self.eat("(")
        args = self.vars(stop=(")",))
        self.eat(")")
        return RelLit(name, args, negated)

    def var(self) -> str:
        t = self.cur
        if t.kind != "name" or t.text in KEYWORDS:
            self.error(f"expected a variable, found {t.text or 'end of input'!r}")
        self.i += 1
        return t.text

    def vars(self, stop=(";", ")", "|")) -> tuple[str, ...]:
        out = []
        while self.cur.text not in stop:
            if self.at(","):
                self.i += 1
                continue
            out.append(self.var())
        return tuple(out)

    def pair(self) -> tuple[tuple[str, ...], tuple[str, ...]]:
        self.eat("(")
        left = self.vars()
        self.eat(";")
        right = self.vars()
        self.eat(")")
        return left, right

    def atom(self) -> Formula:
        t = self.eat(kind="name")
        k = t.text
        try:
            if k in ("dep", "excl", "incl", "equi", "anon", "indep", "cycle"):
                left, right = self.pair()
                return TeamAtom(k, left, right)
            if k == "minc":
                cond = None
                if self.at("["):
                    self.i += 1
                    cond = self.formula()
                    self.eat("]")
                    if not is_first_order(cond):
                        self.error("the restriction of minc must be first-order", t)
                left, right = self.pair()
                if cond is None:
                    return MultiteamAtom("minc", left, right)
                return MultiteamAtom("minc_cond", left, right, cond=cond)
            if k == "fork":
                self.eat("[")
                cmp = self.eat().text
                if cmp not in COMPARATORS:
                    self.error(f"unknown comparator {cmp!r}", t)
                p = Fraction(self.eat(kind="num").text)
                self.eat("]")
                left, right = self.pair()
                return MultiteamAtom("fork", left, right, cmp=cmp, threshold=p)
            if k == "mindep":
                self.eat("(")
                first = self.vars()
                given, bar = (), self.at("|")
                if bar:
                    self.i += 1
                    given, first = first, self.vars()
                self.eat(";")
                right = self.vars()
                self.eat(")")
                if bar:
                    return MultiteamAtom("mindep_cond", first, right, given=given)
                return MultiteamAtom("mindep", first, right)
            if k == "tsv":
                self.eat("[")
                bound = int(self.eat(kind="num").text)
                self.eat("]")
                self.eat("(")
                inner = self.atom()
                self.eat(")")
                if not isinstance(inner, MultiteamAtom):
                    self.error("tsv applies to multiteam atoms", t)
                return TsvAtom(inner, bound)
        except ValueError as e:
            if isinstance(e, ParseError):
                raise
            self.error(str(e), t)
        self.error(f"unknown atom {k!r}", t)


def parse_formula(text: str, allow_reserved: bool = False) -> Formula:
    """Parse a formula; reserved ``$`` names are rejected unless allowed."""
    p = _Parser(text, allow_reserved)
    phi = p.formula()
    if p.cur.kind != "eof":
        p.error(f"trailing input {p.cur.text!r}")
    free = free_vars(phi)
    for f in walk(phi):
        if isinstance(f, (Exists, Forall)) and f.var in free:
            warnings.warn(f"quantifier rebinds {f.var!r}, which also occurs free", stacklevel=2)
            break
    return phi


# --- rendering ---------------------------------------------------------------

def _vs(vs) -> str:
    return ", ".join(vs)


def _frac(p: Fraction) -> str:
    return str(p.numerator) if p.denominator == 1 else f"{p.numerator}/{p.denominator}"


def render_formula(phi: Formula) -> str:
    """Canonical text; ``parse_formula`` inverts it."""
    if isinstance(phi, BoolLit):
        return "true" if phi.value else "false"
    if isinstance(phi, RelLit):
        return ("!" if phi.negated else "") + f"{phi.name}({_vs(phi.args)})"
    if isinstance(phi, EqLit):
        return f"{phi.left} {'!=' if phi.negated else '='} {phi.right}"
    if isinstance(phi, TeamAtom):
        return f"{phi.kind}({_vs(phi.left)}; {_vs(phi.right)})"
    if isinstance(phi, MultiteamAtom):
        k = phi.kind
        if k == "minc":
            return f"minc({_vs(phi.left)}; {_vs(phi.right)})"
        if k == "minc_cond":
            return f"minc[{render_formula(phi.cond)}]({_vs(phi.left)}; {_vs(phi.right)})"
        if k == "fork":
            return f"fork[{phi.cmp}{_frac(phi.threshold)}]({_vs(phi.left)}; {_vs(phi.right)})"
        if k == "mindep":
            return f"mindep({_vs(phi.left)}; {_vs(phi.right)})"
        return f"mindep({_vs(phi.given)} | {_vs(phi.left)}; {_vs(phi.right)})"
    if isinstance(phi, TsvAtom):
        return f"tsv[{phi.bound}]({render_formula(phi.atom)})"
    if isinstance(phi, And):
        return "(" + " & ".join(render_formula(p) for p in phi.parts) + ")"
    if isinstance(phi, Or):
        return "(" + " | ".join(render_formula(p) for p in phi.parts) + ")"
    if isinstance(phi, Exists):
        return f"E {phi.var}. {render_formula(phi.body)}"
    if isinstance(phi, Forall):
        return f"A {phi.var}. {render_formula(phi.body)}"
    raise TypeError(phi)


# --- structures and multiteams ------------------------------------------------

def _lines(text: str) -> list[tuple[int, str]]:
    out = []
    for n, raw in enumerate(text.replace("/ ", "\n").replace(" /", "\n").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((n, line))
    return out


def parse_structure(text: str) -> Structure:
    """``universe N`` then ``relation NAME ARITY`` blocks, one tuple per line.

    Lines may be separated by `` / `` instead of newlines.
    """
    lines = _lines(text)
    if not lines or not lines[0][1].startswith("universe"):
        raise ParseError("structure must start with 'universe N'", lines[0][0] if lines else 1)
    try:
        size = int(lines[0][1].split()[1])
    except (IndexError, ValueError):
        raise ParseError("bad universe line", lines[0][0]) from None
    rels: dict[str, set] = {}
    arities: dict[str, int] = {}
    current = None
    for n, line in lines[1:]:
        parts = line.split()
        if parts[0] == "relation":
            if len(parts) != 3 or not parts[2].isdigit():
                raise ParseError("expected 'relation NAME ARITY'", n)
            current = parts[1]
            if current in KEYWORDS:
                raise ParseError(f"{current!r} is a reserved word", n)
            arities[current] = int(parts[2])
            rels.setdefault(current, set())
            continue
        if current is None:
            raise ParseError("tuple outside a relation block", n)
        vals = [] if line == "()" else parts
        try:
            t = tuple(int(v) for v in vals)
        except ValueError:
            raise ParseError(f"bad tuple {line!r}", n) from None
        if len(t) != arities[current]:
            raise ParseError(f"tuple {t} has wrong arity for {current}", n)
        if any(not 0 <= a < size for a in t):
            raise ParseError(f"tuple {t} leaves the universe", n)
        rels[current].add(t)
    return Structure(size, {k: frozenset(v) for k, v in rels.items()}, arities)


def render_structure(s: Structure, sep: str = "\n") -> str:
    out = [f"universe {s.size}"]
    for name in sorted(s.relations):
        out.append(f"relation {name} {s.arities[name]}")
        for t in sorted(s.relations[name]):
            out.append(" ".join(map(str, t)) if t else "()")
    return sep.join(out)


def parse_multiteam(text: str, weighted: bool = False) -> _Bag:
    """``vars x y`` then lines ``v1 v2 : mult``; a missing multiplicity means 1.

    With an empty domain the only row is written ``()`` or left blank before the colon.
    """
    lines = _lines(text)
    if not lines or lines[0][1].split()[0] != "vars":
        raise ParseError("multiteam must start with 'vars ...'", lines[0][0] if lines else 1)
    domain = lines[0][1].split()[1:]
    rows = []
    for n, line in lines[1:]:
        vals, _, mult = line.partition(":")
        try:
            r = () if vals.strip() == "()" else tuple(int(v) for v in vals.split())
            m = Fraction(mult.strip()) if mult.strip() else Fraction(1)
        except ValueError:
            raise ParseError(f"bad row {line!r}", n) from None
        if len(r) != len(domain):
            raise ParseError(f"row {r} does not match the domain", n)
        if m <= 0:
            raise ParseError("multiplicities must be positive", n)
        if not weighted and m.denominator != 1:
            raise ParseError("fractional multiplicity in a natural multiteam", n)
        rows.append((r, m if weighted else int(m)))
    cls = WeightedMultiteam if weighted else Multiteam
    try:
        return cls(domain, rows)
    except ValueError as e:
        raise ParseError(str(e)) from None


def render_multiteam(m: _Bag, sep: str = "\n") -> str:
    out = ["vars" + "".join(" " + v for v in m.domain)]
    for r, w in m.items():
        out.append(f"{' '.join(map(str, r))} : {w}".strip())
    return sep.join(out)
