"""Branch-and-bound search for a successful c-reduction.

The search branches over signed operations (gains of inactive characters,
losses of red-saturated active ones) inside one red-black component at a
time.  After every realization the component may split; the pieces are
solved independently and their reductions concatenated.  A component
whose conflict graph is empty is handed to the polynomial procedure.

Failed and solved component states are memoized on their exact graph
state, which is all a component's future depends on.
"""
from __future__ import annotations

import enum
import os
import time
from dataclasses import dataclass, field

from .graphs import conflict_edges
from .matrix import (
    BinaryMatrix,
    CharacterOp,
    ConstraintSet,
    ExtendedMatrix,
    build_extended,
    forbidden_pair_witness,
)
from .poly import reduce_empty_conflict
from .redblack import (
    CharState,
    Component,
    CReduction,
    RealizationError,
    RedBlackGraph,
    apply_reduction,
    build_red_black,
    detect_red_sigma,
    realize,
    undo,
)

DEFAULT_TIMEOUT = 900.0
TIMEOUT_ENV = "PERSISTENT_PHYLO_TIMEOUT"


def default_timeout() -> float:
    value = os.environ.get(TIMEOUT_ENV)
    return float(value) if value else DEFAULT_TIMEOUT


class Verdict(enum.Enum):
    SOLUTION = "Solution"
    NO_SOLUTION = "NoSolution"
    TIMEOUT = "Timeout"


@dataclass
class Budget:
    timeout: float | None = None  # seconds; None means default_timeout()
    max_nodes: int | None = None


class BudgetExceeded(Exception):
    pass


@dataclass
class SearchStats:
    visited: int = 0
    pruned_forbidden: int = 0
    pruned_sigma: int = 0
    pruned_impossible: int = 0
    memo_hits: int = 0
    poly_calls: int = 0

    def as_dict(self) -> dict[str, int]:
        return dict(self.__dict__)


class SearchState:
    """Mutable red-black graph plus the path of operations realized so far."""

    def __init__(
        self,
        m: BinaryMatrix,
        e: ConstraintSet | None = None,
        prune_forbidden: bool = True,
        prune_sigma: bool = True,
    ):
        self.matrix = m
        self.constraints = e or ConstraintSet()
        self.extended = build_extended(m, self.constraints)
        self.graph = build_red_black(self.extended)
        self.prune_forbidden = prune_forbidden
        self.prune_sigma = prune_sigma
        self.stats = SearchStats()

    @property
    def path(self) -> list[CharacterOp]:
        return self.graph.history

    def try_op(self, op: CharacterOp) -> bool:
        """Realize ``op`` and keep it unless it is impossible or pruned."""
        g = self.graph
        if g.next_op(op.character) != op:
            return False
        try:
            j = realize(g, op.character).journal
        except RealizationError:
            self.stats.pruned_impossible += 1
            return False
        if self.prune_forbidden and op.is_gain:
            if forbidden_pair_witness(self.extended, (op.character,)) is not None:
                self.stats.pruned_forbidden += 1
                undo(g, j)
                return False
        if self.prune_sigma and op.is_gain and g.red[op.character]:
            if detect_red_sigma(g, (op.character,)) is not None:
                self.stats.pruned_sigma += 1
                undo(g, j)
                return False
        return True


def _candidates(g: RedBlackGraph, chars, conflicting: set[int]) -> list[CharacterOp]:
    ops = []
    for c in chars:
        st = g.state[c]
        if st is CharState.INACTIVE:
            ops.append(CharacterOp.gain(c))
        elif st is CharState.ACTIVE and g.red[c]:
            ops.append(CharacterOp.loss(c))
    ops.sort(key=lambda op: (op.character not in conflicting, -g.degree(op.character),
                             op.character, op.sign.value))
    return ops


def _component_conflicts(state: SearchState, comp: Component) -> frozenset[tuple[int, int]]:
    cols = state.matrix.column_masks()
    return conflict_edges({c: cols[c] for c in comp.characters}, comp.species_mask)


def admissible_ops(state: SearchState, component: Component | None = None) -> list[CharacterOp]:
    """Operations that can be realized now and survive the one-step prunes.

    Ordered by the branching heuristic: characters with a conflict first,
    then by decreasing red-black degree, then by index.
    """
    g = state.graph
    comps = [component] if component is not None else g.components()
    out = []
    for comp in comps:
        conflicting = {c for edge in _component_conflicts(state, comp) for c in edge}
        for op in _candidates(g, comp.characters, conflicting):
            if g.state[op.character] is CharState.ACTIVE and not g.is_saturated(op.character):
                continue
            mark = g.checkpoint()
            if state.try_op(op):
                out.append(op)
                g.rollback(mark)
    return out


@dataclass
class SolveOutcome:
    verdict: Verdict
    reduction: CReduction | None = None
    completion: ExtendedMatrix | None = None
    tree: object | None = None  # PPPTree
    stats: SearchStats = field(default_factory=SearchStats)
    elapsed: float = 0.0
    conflicts: int = 0

    @property
    def solved(self) -> bool:
        return self.verdict is Verdict.SOLUTION


class _Search:
    def __init__(self, state: SearchState, budget: Budget, decompose: bool, memo: bool):
        self.state = state
        self.g = state.graph
        timeout = budget.timeout if budget.timeout is not None else default_timeout()
        self.deadline = time.perf_counter() + timeout
        self.max_nodes = budget.max_nodes
        self.decompose = decompose
        self.memo: dict | None = {} if memo else None

    def _tick(self) -> None:
        st = self.state.stats
        st.visited += 1
        if self.max_nodes is not None and st.visited > self.max_nodes:
            raise BudgetExceeded("node limit")
        if st.visited % 32 == 1 and time.perf_counter() > self.deadline:
            raise BudgetExceeded("timeout")

    def _replay(self, ops: list[CharacterOp]) -> None:
        for op in ops:
            realize(self.g, op.character)

    def solve(self, comps: list[Component]) -> list[CharacterOp] | None:
        """Reduce every component in ``comps``; on failure ``g`` is restored."""
        if self.decompose:
            mark = self.g.checkpoint()
            out: list[CharacterOp] = []
            for comp in comps:
                r = self.solve_one([comp])
                if r is None:
                    self.g.rollback(mark)
                    return None
                out += r
            return out
        return self.solve_one(comps) if comps else []

    def solve_one(self, comps: list[Component]) -> list[CharacterOp] | None:
        self._tick()
        g = self.g
        chars = set().union(*(c.characters for c in comps))
        key = g.key(chars)
        if self.memo is not None and key in self.memo:
            self.state.stats.memo_hits += 1
            cached = self.memo[key]
            if cached is not None:
                self._replay(cached)
            return None if cached is None else list(cached)

        conflicts: set[tuple[int, int]] = set()
        for comp in comps:
            conflicts |= _component_conflicts(self.state, comp)
        result: list[CharacterOp] | None = None
        if not conflicts:
            # exact only while every character of the component is still
            # inactive (the residual instance is then a submatrix of M);
            # otherwise a greedy failure falls through to branching
            self.state.stats.poly_calls += 1
            result = reduce_empty_conflict(g, chars)
            exact = all(g.state[c] is CharState.INACTIVE for c in chars)
        if result is None and (conflicts or not exact):
            conflicting = {c for edge in conflicts for c in edge}
            for op in _candidates(g, sorted(chars), conflicting):
                mark = g.checkpoint()
                if not self.state.try_op(op):
                    continue
                sub = self.solve(g.components(chars))
                if sub is not None:
                    result = [op] + sub
                    break
                g.rollback(mark)
        if self.memo is not None:
            self.memo[key] = None if result is None else tuple(result)
        return result


def decide_pp_opt(
    m: BinaryMatrix,
    e: ConstraintSet | None = None,
    budget: Budget | None = None,
    *,
    prune_forbidden: bool = True,
    prune_sigma: bool = True,
    decompose: bool = True,
    memo: bool = True,
    build_solution: bool = True,
) -> SolveOutcome:
    """Decide whether ``(m, e)`` has a persistent perfect phylogeny.

    ``m`` should be preprocessed.  On success the outcome carries the
    reduction, the completed extended matrix and the tree, all re-checked
    from scratch.
    """
    from .tree import build_tree, validate_tree

    budget = budget or Budget()
    start = time.perf_counter()
    state = SearchState(m, e, prune_forbidden=prune_forbidden, prune_sigma=prune_sigma)
    search = _Search(state, budget, decompose, memo)
    n_conflicts = len(conflict_edges(dict(enumerate(m.column_masks())), m.all_species))
    try:
        ops = search.solve(state.graph.components())
    except BudgetExceeded:
        state.graph.rollback(0)
        return SolveOutcome(Verdict.TIMEOUT, stats=state.stats,
                            elapsed=time.perf_counter() - start, conflicts=n_conflicts)
    if ops is None:
        return SolveOutcome(Verdict.NO_SOLUTION, stats=state.stats,
                            elapsed=time.perf_counter() - start, conflicts=n_conflicts)
    reduction = CReduction(tuple(ops))
    outcome = SolveOutcome(Verdict.SOLUTION, reduction, stats=state.stats, conflicts=n_conflicts)
    if build_solution:
        fresh = build_red_black(build_extended(m, state.constraints))
        if not apply_reduction(fresh, reduction):
            raise AssertionError("search produced an unsuccessful reduction")
        outcome.completion = fresh.extended.closed()
        if forbidden_pair_witness(outcome.completion) is not None:
            raise AssertionError("completion of a successful reduction has a forbidden pair")
        outcome.tree = build_tree(outcome.completion)
        report = validate_tree(outcome.tree, m, state.constraints)
        if not report.ok:
            raise AssertionError(f"solution tree does not validate: {report}")
    outcome.elapsed = time.perf_counter() - start
    return outcome


STATS_HEADER = (
    "instance,n,m,constraints,conflicts,verdict,nodes,pruned_forbidden,"
    "pruned_sigma,pruned_impossible,elapsed_ms"
)


def stats_row(instance: str, m: BinaryMatrix, e: ConstraintSet, outcome: SolveOutcome) -> str:
    st = outcome.stats
    return ",".join(
        str(v)
        for v in (
            instance, m.n_species, m.n_characters, len(e), outcome.conflicts,
            outcome.verdict.value, st.visited, st.pruned_forbidden, st.pruned_sigma,
            st.pruned_impossible, int(round(outcome.elapsed * 1000)),
        )
    )
