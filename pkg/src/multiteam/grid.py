"""Deterministic enumeration of small structures and multiteams."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional, Sequence

from .core import Multiteam, Structure, all_rows


@dataclass(frozen=True)
class GridSpec:
    """A finite family of structures and multiteams.

    Universes run through ``universe_sizes`` in ascending order. Multiteams
    have at most ``max_support`` distinct rows, each with multiplicity at
    most ``max_mult``.
    """
    universe_sizes: tuple[int, ...] = (2,)
    max_support: int = 2
    max_mult: int = 2
    include_empty: bool = True

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """Read ``A=2,support=3,mult=2``; ``A`` may be a range such as ``1-3``."""
        fields = {}
        for part in text.split(","):
            if not part.strip():
                continue
            key, _, val = part.partition("=")
            fields[key.strip()] = val.strip()
        unknown = set(fields) - {"A", "support", "mult"}
        if unknown:
            raise ValueError(f"unknown grid fields {sorted(unknown)}")
        sizes = (2,)
        if "A" in fields:
            lo, _, hi = fields["A"].partition("-")
            sizes = tuple(range(int(lo), int(hi or lo) + 1))
        return cls(sizes, int(fields.get("support", 2)), int(fields.get("mult", 2)))


def structures(signature: Mapping[str, int], sizes: Sequence[int]) -> Iterator[Structure]:
    """Every interpretation of ``signature`` over each universe size."""
    names = sorted(signature)
    for n in sorted(sizes):
        spaces = [list(itertools.product(range(n), repeat=signature[r])) for r in names]
        for masks in itertools.product(*(range(2 ** len(s)) for s in spaces)):
            rels = {}
            for name, space, mask in zip(names, spaces, masks):
                rels[name] = frozenset(t for i, t in enumerate(space) if mask >> i & 1)
            yield Structure(n, rels, {r: signature[r] for r in names})


def multiteams(domain: Sequence[str], universe_size: int, max_support: int, max_mult: int,
               include_empty: bool = True) -> Iterator[Multiteam]:
    """Supports by size, then lexicographically; multiplicities in colex order."""
    dom = tuple(sorted(domain))
    rows = all_rows(dom, range(universe_size))
    if include_empty:
        yield Multiteam._make(dom, {})
    for k in range(1, min(max_support, len(rows)) + 1):
        for support in itertools.combinations(rows, k):
            for ms in itertools.product(range(1, max_mult + 1), repeat=k):
                ms = ms[::-1]
                yield Multiteam._make(dom, dict(zip(support, ms)))


def instances(grid: GridSpec, domain: Sequence[str], signature: Mapping[str, int],
              fixed: Optional[Sequence[Structure]] = None) -> Iterator[tuple[Structure, Multiteam]]:
    sts = fixed if fixed is not None else structures(signature, grid.universe_sizes)
    for st in sts:
        for m in multiteams(domain, st.size, grid.max_support, grid.max_mult, grid.include_empty):
            yield st, m
