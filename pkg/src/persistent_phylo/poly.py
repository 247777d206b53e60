"""Polynomial reduction for instances whose conflict graph is empty."""
from __future__ import annotations

from typing import Callable, Iterable

from .graphs import build_conflict_graph, maximal_characters, poset_from_columns
from .matrix import BinaryMatrix, CharacterOp, ConstraintSet, build_extended
from .redblack import CharState, CReduction, RedBlackGraph, build_red_black, realize


class NotEmptyConflict(ValueError):
    pass


def _eager_losses(g: RedBlackGraph, scope: set[int], ops: list[CharacterOp]) -> bool:
    progress = False
    changed = True
    while changed:
        changed = False
        for c in sorted(scope):
            if g.state[c] is CharState.ACTIVE and g.red[c] and g.is_saturated(c):
                realize(g, c)
                ops.append(CharacterOp.loss(c))
                changed = progress = True
    return progress


def reduce_empty_conflict(
    g: RedBlackGraph,
    scope: Iterable[int] | None = None,
    order: Callable[[int], object] | None = None,
) -> list[CharacterOp] | None:
    """Reduce the components spanned by ``scope`` greedily from maximal characters.

    Each pass realizes, per component, the realizable characters that are
    maximal under inclusion of their black neighbourhoods, then loses every
    active character that has become red-saturated.  Returns the operations
    (left applied on ``g``) or None when a pass makes no progress, in which
    case ``g`` is rolled back.
    """
    scope = set(range(g.n_characters) if scope is None else scope)
    order = order or (lambda c: c)
    mark = g.checkpoint()
    ops: list[CharacterOp] = []
    while True:
        comps = g.components(scope)
        if not comps:
            return ops
        progress = False
        for comp in comps:
            inactive = {c: g.black[c] for c in comp.characters if g.state[c] is CharState.INACTIVE}
            poset = poset_from_columns(inactive)
            for c in sorted(maximal_characters(poset, inactive), key=order):
                if g.state[c] is CharState.INACTIVE and g.can_realize(c):
                    realize(g, c)
                    ops.append(CharacterOp.gain(c))
                    progress = True
        if _eager_losses(g, scope, ops):
            progress = True
        if not progress:
            g.rollback(mark)
            return None


def solve_empty_conflict(
    m: BinaryMatrix,
    e: ConstraintSet | None = None,
    order: Callable[[int], object] | None = None,
) -> CReduction | None:
    """A successful c-reduction of ``(m, e)``, or None if there is none.

    ``order`` breaks ties among maximal characters (ascending index by
    default); any order yields the same verdict.
    """
    if not build_conflict_graph(m).is_empty():
        raise NotEmptyConflict("the conflict graph has edges")
    g = build_red_black(build_extended(m, e))
    ops = reduce_empty_conflict(g, order=order)
    return None if ops is None else CReduction(tuple(ops))
