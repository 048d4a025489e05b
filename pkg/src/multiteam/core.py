"""Structures, teams and multiteams with their basic operations.

A multiteam is stored as a domain (sorted tuple of variable names) and a map
from value tuples, aligned with the domain, to positive multiplicities.
Elements of a structure are the integers ``0 .. size-1``.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Callable, Iterable, Iterator, Mapping, Sequence, Union

Row = tuple[int, ...]
Assignment = Mapping[str, int]


class UndefinedProbability(ZeroDivisionError):
    """Conditional probability with an empty conditioning set."""


@dataclass(frozen=True)
class Structure:
    """Finite relational structure over ``range(size)``."""
    size: int
    relations: Mapping[str, frozenset[Row]] = field(default_factory=dict)
    arities: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("a structure needs a non-empty universe")
        rels = {k: frozenset(tuple(t) for t in v) for k, v in self.relations.items()}
        ar = dict(self.arities)
        for name, tuples in rels.items():
            for t in tuples:
                ar.setdefault(name, len(t))
                if len(t) != ar[name] or any(not 0 <= a < self.size for a in t):
                    raise ValueError(f"bad tuple {t} for relation {name}")
            ar.setdefault(name, 0)
        object.__setattr__(self, "relations", rels)
        object.__setattr__(self, "arities", ar)

    @property
    def universe(self) -> range:
        return range(self.size)

    def holds(self, name: str, args: Sequence[int]) -> bool:
        try:
            return tuple(args) in self.relations[name]
        except KeyError:
            raise KeyError(f"relation {name!r} is not interpreted") from None

    def key(self) -> tuple:
        return (self.size, tuple(sorted((k, tuple(sorted(v))) for k, v in self.relations.items())))

    def __hash__(self):
        return hash(self.key())

    def __eq__(self, other):
        return isinstance(other, Structure) and self.key() == other.key()


def _canon_domain(domain: Iterable[str]) -> tuple[tuple[str, ...], tuple[int, ...]]:
    domain = tuple(domain)
    if len(set(domain)) != len(domain):
        raise ValueError(f"repeated variable in domain {domain}")
    order = sorted(range(len(domain)), key=lambda i: domain[i])
    return tuple(domain[i] for i in order), tuple(order)


class Team:
    """A finite set of assignments over a common domain."""
    __slots__ = ("domain", "rows")

    def __init__(self, domain: Iterable[str], rows: Iterable[Sequence[int]] = ()):
        dom, order = _canon_domain(domain)
        self.domain = dom
        self.rows = frozenset(tuple(r[i] for i in order) for r in rows)
        for r in self.rows:
            if len(r) != len(dom):
                raise ValueError("row length does not match domain")

    @classmethod
    def from_assignments(cls, domain: Iterable[str], assignments: Iterable[Assignment]) -> "Team":
        dom = tuple(sorted(domain))
        return cls(dom, [tuple(s[v] for v in dom) for s in assignments])

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(sorted(self.rows))

    def __eq__(self, other):
        return isinstance(other, Team) and (self.domain, self.rows) == (other.domain, other.rows)

    def __hash__(self):
        return hash((self.domain, self.rows))

    def __repr__(self):
        return f"Team({self.domain}, {sorted(self.rows)})"

    def assignments(self) -> Iterator[dict[str, int]]:
        for r in sorted(self.rows):
            yield dict(zip(self.domain, r))

    def restrict(self, vars: Iterable[str]) -> "Team":
        vs = tuple(sorted(set(vars)))
        idx = [_index(self.domain, v) for v in vs]
        return Team(vs, (tuple(r[i] for i in idx) for r in self.rows))

    def with_multiplicities(self, n: Mapping[Row, int] | Callable[[Row], int]) -> "Multiteam":
        get = n if callable(n) else n.__getitem__
        return Multiteam(self.domain, {r: get(r) for r in self.rows})


def _index(domain: tuple[str, ...], var: str) -> int:
    try:
        return domain.index(var)
    except ValueError:
        raise KeyError(f"variable {var!r} not in domain {domain}") from None


def getter(domain: tuple[str, ...], vars: Sequence[str]) -> Callable[[Row], Row]:
    """Function projecting a row over ``domain`` onto the tuple ``vars``."""
    idx = tuple(_index(domain, v) for v in vars)
    if not idx:
        return lambda r: ()
    if len(idx) == 1:
        i = idx[0]
        return lambda r: (r[i],)
    return lambda r: tuple(r[i] for i in idx)


class _Bag:
    """Shared implementation of natural and rational weighted multiteams."""
    __slots__ = ("domain", "_rows", "_key")

    def __init__(self, domain: Iterable[str], rows: Mapping[Sequence[int], object] | Iterable = ()):
        dom, order = _canon_domain(domain)
        items = rows.items() if isinstance(rows, Mapping) else rows
        acc: dict[Row, object] = {}
        for r, m in items:
            r = tuple(r)
            if len(r) != len(dom):
                raise ValueError(f"row {r} does not match domain {dom}")
            m = self._check_weight(m)
            if m:
                key = tuple(r[i] for i in order)
                acc[key] = acc.get(key, 0) + m
        self.domain = dom
        self._rows = acc
        self._key = None

    @classmethod
    def _make(cls, domain: tuple[str, ...], rows: dict[Row, object]):
        obj = cls.__new__(cls)
        obj.domain = domain
        obj._rows = rows
        obj._key = None
        return obj

    @staticmethod
    def _check_weight(m):
        raise NotImplementedError

    @classmethod
    def empty(cls, domain: Iterable[str] = ()):
        return cls(domain, {})

    @classmethod
    def from_assignments(cls, domain: Iterable[str], pairs: Iterable[tuple[Assignment, object]]):
        dom = tuple(sorted(domain))
        return cls(dom, [(tuple(s[v] for v in dom), m) for s, m in pairs])

    @property
    def rows(self) -> Mapping[Row, object]:
        """Read-only view: row tuple to multiplicity."""
        return self._rows

    @property
    def size(self):
        return sum(self._rows.values())

    def __len__(self):
        return len(self._rows)

    def is_empty(self) -> bool:
        return not self._rows

    def key(self) -> tuple:
        if self._key is None:
            self._key = (self.domain, tuple(sorted(self._rows.items())))
        return self._key

    def __eq__(self, other):
        return type(self) is type(other) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        body = ", ".join(f"{''.join(map(str, r)) or '()'}:{m}" for r, m in sorted(self._rows.items()))
        return f"{type(self).__name__}({','.join(self.domain)} | {body})"

    def items(self) -> list[tuple[Row, object]]:
        return sorted(self._rows.items())

    def mult(self, s: Assignment | Sequence[int]):
        if isinstance(s, Mapping):
            s = tuple(s[v] for v in self.domain)
        return self._rows.get(tuple(s), 0)

    def assignments(self) -> Iterator[tuple[dict[str, int], object]]:
        for r, m in self.items():
            yield dict(zip(self.domain, r)), m

    def support(self) -> Team:
        return Team(self.domain, self._rows)

    def index(self, var: str) -> int:
        return _index(self.domain, var)


class Multiteam(_Bag):
    """Multiset of assignments with natural multiplicities."""
    __slots__ = ()

    @staticmethod
    def _check_weight(m):
        if isinstance(m, bool) or not isinstance(m, int) or m < 0:
            if isinstance(m, Fraction) and m.denominator == 1 and m >= 0:
                return int(m)
            raise ValueError(f"multiplicity must be a natural number, got {m!r}")
        return m

    def occurrences(self) -> Iterator[Row]:
        """Each row repeated by its multiplicity, in canonical order."""
        for r, m in self.items():
            for _ in range(m):
                yield r


class WeightedMultiteam(_Bag):
    """Assignments with positive rational weights."""
    __slots__ = ()

    @staticmethod
    def _check_weight(m):
        if isinstance(m, bool) or not isinstance(m, Rational) or m < 0:
            raise ValueError(f"weight must be a non-negative rational, got {m!r}")
        return Fraction(m)

    @classmethod
    def from_multiteam(cls, m: _Bag) -> "WeightedMultiteam":
        return cls._make(m.domain, {r: Fraction(w) for r, w in m.rows.items()})


Bag = Union[Multiteam, WeightedMultiteam]


def _same_domain(a: _Bag, b: _Bag):
    if a.domain != b.domain:
        raise ValueError(f"domains differ: {a.domain} vs {b.domain}")


def mt_sum(*ms: _Bag) -> _Bag:
    """Additive union."""
    if not ms:
        raise ValueError("mt_sum needs at least one multiteam")
    acc = dict(ms[0].rows)
    for m in ms[1:]:
        _same_domain(ms[0], m)
        for r, w in m.rows.items():
            acc[r] = acc.get(r, 0) + w
    return type(ms[0])._make(ms[0].domain, acc)


def mt_scale(k, m: _Bag) -> _Bag:
    """Scalar multiple; ``0`` gives the empty multiteam."""
    if k < 0:
        raise ValueError("scalar must be non-negative")
    if isinstance(m, Multiteam) and (not isinstance(k, int) or isinstance(k, bool)):
        raise ValueError("natural multiteams scale by naturals only")
    if k == 0:
        return type(m)._make(m.domain, {})
    return type(m)._make(m.domain, {r: k * w for r, w in m.rows.items()})


def mt_sub(a: _Bag, b: _Bag) -> bool:
    """Submultiset relation ``a`` contained in ``b``."""
    _same_domain(a, b)
    return all(w <= b.rows.get(r, 0) for r, w in a.rows.items())


def mt_diff(b: _Bag, a: _Bag) -> _Bag:
    """The multiteam ``c`` with ``a + c == b``; requires ``a`` contained in ``b``."""
    if not mt_sub(a, b):
        raise ValueError("not a submultiset")
    acc = {r: w - a.rows.get(r, 0) for r, w in b.rows.items()}
    return type(b)._make(b.domain, {r: w for r, w in acc.items() if w})


def restrict(m: _Bag, vars: Iterable[str]) -> _Bag:
    """Restriction to a subset of the domain; multiplicities of merged rows add up."""
    vs = tuple(sorted(set(vars)))
    if vs == m.domain:
        return m
    get = getter(m.domain, vs)
    acc: dict[Row, object] = {}
    for r, w in m.rows.items():
        k = get(r)
        acc[k] = acc.get(k, 0) + w
    return type(m)._make(vs, acc)


def values(m: _Bag | Team, vars: Sequence[str]) -> Counter:
    """The value multiset of the tuple ``vars`` (a set for teams, all counts 1)."""
    get = getter(m.domain, vars)
    out: Counter = Counter()
    if isinstance(m, Team):
        for r in m.rows:
            out[get(r)] = 1
        return out
    for r, w in m.rows.items():
        out[get(r)] += w
    return out


def value_product(v: Counter, w: Counter) -> Counter:
    """Product of two value multisets: concatenated tuples, multiplied counts."""
    return Counter({a + b: c * d for a, c in v.items() for b, d in w.items()})


def filter_eq(m: _Bag, vars: Sequence[str], vals: Sequence[int]) -> _Bag:
    """Sub-multiteam of the rows where ``vars`` take the values ``vals``."""
    get = getter(m.domain, vars)
    vals = tuple(vals)
    return type(m)._make(m.domain, {r: w for r, w in m.rows.items() if get(r) == vals})


def filter_rows(m: _Bag, pred: Callable[[dict[str, int]], bool]) -> _Bag:
    keep = {}
    for r, w in m.rows.items():
        if pred(dict(zip(m.domain, r))):
            keep[r] = w
    return type(m)._make(m.domain, keep)


def filter_formula(m: _Bag, phi, structure: Structure) -> _Bag:
    """Rows whose assignment satisfies the first-order formula ``phi``."""
    from .fo import holds
    return filter_rows(m, lambda s: holds(structure, s, phi))


def pr(m: _Bag, cond, structure: Structure | None = None) -> Fraction:
    """Fraction of the multiteam satisfying ``cond``.

    ``cond`` is a first-order formula or a mapping ``{var: value}``.
    The empty multiteam has no defined probability.
    """
    total = m.size
    if total == 0:
        raise UndefinedProbability("probability over the empty multiteam")
    return Fraction(_select(m, cond, structure).size) / Fraction(total)


def pr_cond(m: _Bag, cond, given, structure: Structure | None = None) -> Fraction:
    """Conditional probability of ``cond`` given ``given``."""
    base = _select(m, given, structure)
    if base.size == 0:
        raise UndefinedProbability("conditioning on an event of probability zero")
    return pr(base, cond, structure)


def _select(m: _Bag, cond, structure):
    if isinstance(cond, Mapping):
        vs = tuple(cond)
        return filter_eq(m, vs, [cond[v] for v in vs])
    if structure is None:
        raise ValueError("a structure is needed to evaluate a formula")
    return filter_formula(m, cond, structure)


def universal_extension(m: _Bag, var: str, universe: Iterable[int]) -> _Bag:
    """Every row extended by every value for ``var``; an existing value is replaced."""
    universe = tuple(universe)
    base = restrict(m, [v for v in m.domain if v != var])
    dom = tuple(sorted(base.domain + (var,)))
    pos = dom.index(var)
    acc = {}
    for r, w in base.rows.items():
        for a in universe:
            acc[r[:pos] + (a,) + r[pos:]] = w
    return type(m)._make(dom, acc)


def skolem_extension(m: Multiteam, var: str, choice) -> Multiteam:
    """Extension by a per-occurrence choice function.

    ``choice`` maps each row of ``m`` (a tuple or a callable taking the row)
    to either a sequence of values, one per occurrence, or a mapping from
    values to counts summing to the multiplicity.
    """
    get = choice if callable(choice) else choice.__getitem__
    keep = [v for v in m.domain if v != var]
    old = getter(m.domain, keep)
    dom = tuple(sorted(keep + [var]))
    pos = dom.index(var)
    acc: dict[Row, int] = {}
    for r, w in m.rows.items():
        c = get(r)
        counts = Counter(c) if not isinstance(c, Mapping) else Counter(dict(c))
        if sum(counts.values()) != w:
            raise ValueError(f"choice for {r} does not account for multiplicity {w}")
        base = old(r)
        for a, k in counts.items():
            if k:
                key = base[:pos] + (a,) + base[pos:]
                acc[key] = acc.get(key, 0) + k
    return Multiteam._make(dom, acc)


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All tuples of ``parts`` naturals summing to ``total``, lexicographically descending."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def submultiteams(m: Multiteam) -> Iterator[Multiteam]:
    """Every submultiset of ``m``."""
    items = m.items()
    for counts in itertools.product(*(range(w + 1) for _, w in items)):
        yield Multiteam._make(m.domain, {r: c for (r, _), c in zip(items, counts) if c})


def all_rows(domain: Sequence[str], universe: Iterable[int]) -> list[Row]:
    return list(itertools.product(tuple(universe), repeat=len(domain)))
