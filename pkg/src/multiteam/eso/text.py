"""Text format for sentences.

::

    base f/2
    exists g/3 <= f*A^1 .
    A z. sum x y { f(x,y) : x = z } = sum x y { f(x,y) : y = z }

Prefix lines declare the weight function and the quantified functions with
their bound exponents. The matrix follows. Quantifiers ``A x y.`` and
``E x.``; connectives ``&`` and ``|`` (mixing them needs parentheses);
literals ``x = y``, ``x != y``, ``P(x,y)``, ``!P(x,y)``, ``true``, ``false``;
term equations ``t = t``. Terms: ``0``, ``g(x,y)``, ``t + t``, ``t * t``,
``sum x y { t }``, ``sum x y { t : guard }`` with a quantifier-free guard,
and ``[ t ]`` for grouping. ``#`` starts a comment; `` / `` separates lines.
"""
from __future__ import annotations

import re

from ..parser import ParseError, render_formula
from ..syntax import FALSE, TRUE, EqLit, RelLit, conj, disj
from .terms import (ZERO, Add, Apply, EsoSentence, MAnd, MExists, MForall, MOr, Mul, SOQuant,
                    Sum, TermEq, Zero, mexists, mforall)

_TOKEN = re.compile(r"\s*(?:(\d+)|([$A-Za-z_][\w$]*)|(!=|<=|[=&|!()\[\]{},.:+*/^]))")


def _tokens(text: str) -> list[str]:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos:pos + 10]!r}")
        out.append(m.group(m.lastindex))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


def _is_name(tok) -> bool:
    return tok is not None and re.fullmatch(r"[$A-Za-z_][\w$]*", tok) is not None


class _P:
    def __init__(self, toks: list[str], functions: set[str]):
        self.t = toks
        self.i = 0
        self.fns = functions

    def peek(self, k: int = 0):
        j = self.i + k
        return self.t[j] if j < len(self.t) else None

    def take(self, want=None) -> str:
        tok = self.peek()
        if tok is None:
            raise ParseError(f"unexpected end of input, expected {want or 'more'}")
        if want is not None and tok != want:
            raise ParseError(f"expected {want!r}, found {tok!r}")
        self.i += 1
        return tok

    def name(self) -> str:
        tok = self.take()
        if not _is_name(tok):
            raise ParseError(f"expected a name, found {tok!r}")
        return tok

    def names_until(self, stop: str) -> tuple[str, ...]:
        out = []
        while self.peek() != stop:
            out.append(self.name())
        return tuple(out)

    def args(self) -> tuple[str, ...]:
        self.take("(")
        out = []
        while self.peek() != ")":
            out.append(self.name())
            if self.peek() == ",":
                self.take(",")
        self.take(")")
        return tuple(out)

    # formulas
    def formula(self):
        tok = self.peek()
        if tok in ("A", "E") and _is_name(self.peek(1)) and self.peek(1) not in ("true", "false"):
            self.take()
            vs = self.names_until(".")
            self.take(".")
            body = self.formula()
            return mforall(vs, body) if tok == "A" else mexists(vs, body)
        first = self.unit()
        op = self.peek()
        if op not in ("&", "|"):
            return first
        parts = [first]
        while self.peek() in ("&", "|"):
            if self.peek() != op:
                raise ParseError("mixing & and | needs parentheses")
            self.take()
            parts.append(self.unit_or_quant())
        return MAnd(tuple(parts)) if op == "&" else MOr(tuple(parts))

    def unit_or_quant(self):
        if self.peek() in ("A", "E") and _is_name(self.peek(1)):
            return self.formula()
        return self.unit()

    def unit(self):
        tok = self.peek()
        if tok == "(":
            self.take("(")
            f = self.formula()
            self.take(")")
            return f
        if tok == "true":
            self.take()
            return TRUE
        if tok == "false":
            self.take()
            return FALSE
        if tok == "!":
            self.take()
            name = self.name()
            return RelLit(name, self.args(), True)
        if self._term_start():
            left = self.term()
            self.take("=")
            return TermEq(left, self.term())
        name = self.name()
        if self.peek() == "(":
            return RelLit(name, self.args())
        op = self.take()
        if op not in ("=", "!="):
            raise ParseError(f"expected = or != after {name}, found {op!r}")
        return EqLit(name, self.name(), op == "!=")

    def _term_start(self) -> bool:
        tok = self.peek()
        if tok in ("0", "[", "sum"):
            return True
        return tok in self.fns and self.peek(1) == "("

    # terms
    def term(self):
        t = self.product()
        while self.peek() == "+":
            self.take()
            t = Add(t, self.product())
        return t

    def product(self):
        t = self.primary()
        while self.peek() == "*":
            self.take()
            t = Mul(t, self.primary())
        return t

    def primary(self):
        tok = self.peek()
        if tok == "0":
            self.take()
            return ZERO
        if tok == "[":
            self.take()
            t = self.term()
            self.take("]")
            return t
        if tok == "sum":
            self.take()
            vs = self.names_until("{")
            self.take("{")
            body = self.term()
            guard = TRUE
            if self.peek() == ":":
                self.take()
                guard = self.guard()
            self.take("}")
            return Sum(vs, body, guard)
        name = self.name()
        if name not in self.fns:
            raise ParseError(f"unknown function {name}")
        return Apply(name, self.args())

    # guards: quantifier-free first-order
    def guard(self):
        first = self.guard_unit()
        op = self.peek()
        if op not in ("&", "|"):
            return first
        parts = [first]
        while self.peek() in ("&", "|"):
            if self.peek() != op:
                raise ParseError("mixing & and | needs parentheses")
            self.take()
            parts.append(self.guard_unit())
        return conj(*parts) if op == "&" else disj(*parts)

    def guard_unit(self):
        tok = self.peek()
        if tok == "(":
            self.take()
            g = self.guard()
            self.take(")")
            return g
        f = self.unit()
        if isinstance(f, TermEq):
            raise ParseError("term equations cannot appear in guards")
        return f


def parse_eso(text: str) -> EsoSentence:
    lines = []
    for raw in text.replace(" / ", "\n").splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    if not lines or not lines[0].startswith("base"):
        raise ParseError("a sentence starts with 'base NAME/ARITY'")
    toks = _tokens(lines[0])
    if len(toks) != 4 or toks[2] != "/":
        raise ParseError("bad base line")
    base, arity = toks[1], int(toks[3])
    quants = []
    rest = []
    for line in lines[1:]:
        if line.startswith("exists ") and not rest:
            t = _tokens(line)
            # exists g / 3 <= f * A ^ 1 .
            if (len(t) != 11 or t[2] != "/" or t[4] != "<=" or t[5] != base or t[6] != "*"
                    or t[7] != "A" or t[8] != "^" or t[10] != "."):
                raise ParseError(f"bad quantifier line {line!r}")
            quants.append(SOQuant(t[1], int(t[3]), int(t[9])))
        else:
            rest.append(line)
    p = _P(_tokens(" ".join(rest)), {base} | {q.name for q in quants})
    matrix = p.formula()
    if p.peek() is not None:
        raise ParseError(f"trailing input at {p.peek()!r}")
    return EsoSentence(base, arity, tuple(quants), matrix)


def render_term(t) -> str:
    if isinstance(t, Zero):
        return "0"
    if isinstance(t, Apply):
        return f"{t.fn}({','.join(t.args)})"
    if isinstance(t, Add):
        return f"[{render_term(t.left)} + {render_term(t.right)}]"
    if isinstance(t, Mul):
        return f"[{render_term(t.left)} * {render_term(t.right)}]"
    if isinstance(t, Sum):
        vs = " ".join(t.vars)
        head = f"sum {vs} " if vs else "sum "
        if t.guard == TRUE:
            return f"{head}{{ {render_term(t.body)} }}"
        return f"{head}{{ {render_term(t.body)} : {render_formula(t.guard)} }}"
    raise TypeError(t)


def render_matrix(phi) -> str:
    if isinstance(phi, TermEq):
        return f"{render_term(phi.left)} = {render_term(phi.right)}"
    if isinstance(phi, (MAnd, MOr)):
        op = " & " if isinstance(phi, MAnd) else " | "
        return "(" + op.join(_part(p) for p in phi.parts) + ")"
    if isinstance(phi, (MForall, MExists)):
        q = "A" if isinstance(phi, MForall) else "E"
        vs = [phi.var]
        body = phi.body
        while isinstance(body, type(phi)):
            vs.append(body.var)
            body = body.body
        return f"{q} {' '.join(vs)}. {render_matrix(body)}"
    return render_formula(phi)


def _part(phi) -> str:
    s = render_matrix(phi)
    return f"({s})" if isinstance(phi, (MForall, MExists)) else s


def render_eso(psi: EsoSentence) -> str:
    lines = [f"base {psi.base}/{psi.base_arity}"]
    for q in psi.quantifiers:
        lines.append(f"exists {q.name}/{q.arity} <= {psi.base}*A^{q.ell} .")
    lines.append(render_matrix(psi.matrix))
    return "\n".join(lines) + "\n"
