"""Graphs over characters: conflicts, containment order, shared species."""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Mapping

from .matrix import BinaryMatrix

if TYPE_CHECKING:
    from .redblack import RedBlackGraph


@dataclass(frozen=True)
class ConflictGraph:
    vertices: tuple[int, ...]
    edges: frozenset[tuple[int, int]]  # (a, b) with a < b

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def is_empty(self) -> bool:
        return not self.edges

    def has_edge(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    def degree(self, c: int) -> int:
        return sum(1 for e in self.edges if c in e)

    def conflicting(self) -> set[int]:
        return {c for e in self.edges for c in e}


def conflict_edges(columns: Mapping[int, int], species: int) -> frozenset[tuple[int, int]]:
    """Pairs of columns (species masks) showing all four gametes within ``species``."""
    chars = sorted(columns)
    restricted = [columns[c] & species for c in chars]
    out = set()
    for i, a in enumerate(restricted):
        na = species & ~a
        if not a or not na:
            continue
        for j in range(i + 1, len(chars)):
            b = restricted[j]
            if a & b and a & ~b and na & b and na & ~b & species:
                out.add((chars[i], chars[j]))
    return frozenset(out)


def build_conflict_graph(
    m: BinaryMatrix,
    active_species: Iterable[int] | None = None,
    active_chars: Iterable[int] | None = None,
) -> ConflictGraph:
    species = m.all_species if active_species is None else _mask(active_species)
    chars = range(m.n_characters) if active_chars is None else sorted(set(active_chars))
    cols = m.column_masks()
    columns = {c: cols[c] for c in chars}
    return ConflictGraph(tuple(sorted(columns)), conflict_edges(columns, species))


def _mask(items: Iterable[int]) -> int:
    mask = 0
    for i in items:
        mask |= 1 << i
    return mask


@dataclass(frozen=True)
class CharacterPoset:
    """Strict containment order on columns; ``(a, b)`` in ``relation`` means a < b."""

    elements: frozenset[int]
    relation: frozenset[tuple[int, int]]

    def less(self, a: int, b: int) -> bool:
        return (a, b) in self.relation


def poset_from_columns(columns: Mapping[int, int]) -> CharacterPoset:
    """Order columns by inclusion of their species masks.

    Equal columns are ordered by index so the relation stays antisymmetric.
    """
    chars = sorted(columns)
    rel = set()
    for a in chars:
        ca = columns[a]
        for b in chars:
            if a == b:
                continue
            cb = columns[b]
            if ca & ~cb == 0 and (ca != cb or a < b):
                rel.add((a, b))
    return CharacterPoset(frozenset(chars), frozenset(rel))


def build_partial_order(
    m: BinaryMatrix,
    active_chars: Iterable[int] | None = None,
    active_species: Iterable[int] | None = None,
) -> CharacterPoset:
    species = m.all_species if active_species is None else _mask(active_species)
    chars = range(m.n_characters) if active_chars is None else set(active_chars)
    cols = m.column_masks()
    return poset_from_columns({c: cols[c] & species for c in chars})


def maximal_characters(p: CharacterPoset, component_chars: Iterable[int]) -> set[int]:
    dominated = {a for a, b in p.relation if b in p.elements}
    return {c for c in component_chars if c not in dominated}


@dataclass(frozen=True)
class AdjacencyGraph:
    vertices: tuple[int, ...]
    edges: frozenset[tuple[int, int]]

    def has_edge(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges


def build_adjacency_graph(rb: "RedBlackGraph") -> AdjacencyGraph:
    """Characters sharing at least one neighbouring species in ``rb``."""
    chars = [c for c in range(rb.n_characters) if rb.adjacent(c)]
    edges = set()
    for i, a in enumerate(chars):
        na = rb.adjacent(a)
        for b in chars[i + 1:]:
            if na & rb.adjacent(b):
                edges.add((a, b))
    return AdjacencyGraph(tuple(chars), frozenset(edges))
