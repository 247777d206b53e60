"""Shared strategies and independent checkers for the test suite."""
from __future__ import annotations

import itertools
import random

import numpy as np
from hypothesis import strategies as st

from persistent_phylo.matrix import BinaryMatrix, CharacterOp, ConstraintSet, build_extended
from persistent_phylo.oracle import extended_columns, has_directed_pp
from persistent_phylo.redblack import apply_reduction, build_red_black, detect_red_sigma, realize
from persistent_phylo.tree import dfs_reduction, validate_tree

# every Solution checked through check_solution is counted here
SOLUTIONS_CHECKED = {"count": 0, "failures": 0}


@st.composite
def matrices(draw, max_species: int = 5, max_characters: int = 5, min_size: int = 1):
    n = draw(st.integers(min_size, max_species))
    m = draw(st.integers(min_size, max_characters))
    cells = draw(st.lists(st.integers(0, 1), min_size=n * m, max_size=n * m))
    return BinaryMatrix(np.array(cells, dtype=np.uint8).reshape(n, m))


@st.composite
def instances(draw, max_species: int = 5, max_characters: int = 5, max_constraints: int = 3):
    m = draw(matrices(max_species, max_characters))
    zeros = [(s, c) for s in range(m.n_species) for c in range(m.n_characters) if m.cell(s, c) == 0]
    if not zeros:
        return m, ConstraintSet()
    chosen = draw(st.lists(st.sampled_from(zeros), max_size=max_constraints, unique=True))
    return m, ConstraintSet(chosen)


def all_matrices(n: int, m: int):
    for cells in itertools.product((0, 1), repeat=n * m):
        yield BinaryMatrix(np.array(cells, dtype=np.uint8).reshape(n, m))


def zero_cells(m: BinaryMatrix) -> list[tuple[int, int]]:
    return [(s, c) for s in range(m.n_species) for c in range(m.n_characters) if m.cell(s, c) == 0]


def random_constraints(m: BinaryMatrix, rng: random.Random, max_size: int = 3) -> ConstraintSet:
    zeros = zero_cells(m)
    if not zeros:
        return ConstraintSet()
    return ConstraintSet(rng.sample(zeros, min(len(zeros), rng.randint(1, max_size))))


def sigma_free_replay(m: BinaryMatrix, e: ConstraintSet, ops) -> bool:
    """Replay ``ops`` on a fresh graph; False if any intermediate graph has a red Σ-path."""
    g = build_red_black(build_extended(m, e))
    for op in ops:
        realize(g, op.character)
        if detect_red_sigma(g) is not None:
            return False
    return g.is_edgeless()


def check_solution(m: BinaryMatrix, e: ConstraintSet, tree, reduction=None) -> None:
    """Round trip a solution: tree validates, its DFS reduction succeeds, completion is clean.

    The completion check recomputes the 2m-column matrix from the tree's
    persistent cells and runs the pairwise test from scratch.
    """
    SOLUTIONS_CHECKED["count"] += 1
    try:
        report = validate_tree(tree, m, e)
        assert report.ok, str(report)
        r = dfs_reduction(tree)
        g = build_red_black(build_extended(m, e))
        assert apply_reduction(g, r), "DFS reduction leaves edges"
        completion = g.extended.closed()
        persistent = {(s, c) for c in range(m.n_characters) for s in range(m.n_species)
                      if completion.persistent[c] >> s & 1}
        assert has_directed_pp(extended_columns(m, persistent))
        if reduction is not None:
            g2 = build_red_black(build_extended(m, e))
            assert apply_reduction(g2, reduction), "reported reduction leaves edges"
    except AssertionError:
        SOLUTIONS_CHECKED["failures"] += 1
        raise


# -- classical directed perfect phylogeny, built independently ----------------

def classical_tree(columns: list[tuple[str, int]], n: int) -> tuple:
    """Canonical form of the directed perfect phylogeny of laminar ``columns``.

    ``columns`` are (label, species mask) pairs.  Every species walks a trie
    keyed by its columns sorted by decreasing support; nodes without species
    and with one child are contracted.  The canonical form is a nested tuple
    (edge labels, species, children) with children sorted.
    """
    cols = [(label, mask) for label, mask in columns if mask]
    cols.sort(key=lambda x: (-bin(x[1]).count("1"), x[1], x[0]))
    # group equal supports into one edge
    groups: dict[int, list[str]] = {}
    for label, mask in cols:
        groups.setdefault(mask, []).append(label)
    order = sorted(groups, key=lambda x: -bin(x).count("1"))
    trie: dict = {"edge": (), "species": [], "kids": {}}
    for s in range(n):
        node = trie
        for mask in order:
            if mask >> s & 1:
                key = tuple(sorted(groups[mask]))
                node = node["kids"].setdefault(key, {"edge": key, "species": [], "kids": {}})
        node["species"].append(s)

    def canon(node, pending=()):
        edge = tuple(sorted(pending + node["edge"]))
        kids = list(node["kids"].values())
        if not node["species"] and len(kids) == 1 and node is not trie:
            return canon(kids[0], edge)
        return (edge, tuple(sorted(node["species"])), tuple(sorted(canon(k) for k in kids)))

    return canon(trie)


def tree_canon(tree) -> tuple:
    names = tree.character_names

    def canon(node):
        edge = tuple(sorted(op.label(names) for op in node.ops))
        kids = tuple(sorted(canon(tree.nodes[c]) for c in node.children))
        return (edge, tuple(sorted(node.species)), kids)

    return canon(tree.root)


def random_laminar_matrix(rng: random.Random, n: int, m: int) -> BinaryMatrix:
    """Columns are clades of a random rooted tree, species sit on random nodes."""
    size = rng.randint(2, n + m)
    parent = [None] + [rng.randrange(i) for i in range(1, size)]
    where = [rng.randrange(size) for _ in range(n)]
    below = [{v} for v in range(size)]
    for v in range(size - 1, 0, -1):
        below[parent[v]] |= below[v]
    cols = []
    for _ in range(m):
        v = rng.randrange(1, size)
        cols.append([1 if where[s] in below[v] else 0 for s in range(n)])
    return BinaryMatrix(np.array(cols, dtype=np.uint8).T.reshape(n, m))


# -- generalized characters with character tree 0 -> 1 -> 2 -------------------

def _gcc_tree_ok(states: list[list[int]]) -> bool:
    """Does a tree exist in which every state of every character is connected?

    Build the trie of the binary columns "state >= 1" and "state == 2",
    require each column to hang below exactly one edge, then check that
    along every edge each character only moves forward along 0 -> 1 -> 2,
    one step per edge, starting from 0 at the root.
    """
    n = len(states)
    k = len(states[0]) if states else 0
    cols = []
    for c in range(k):
        for level in (1, 2):
            mask = sum(1 << s for s in range(n) if states[s][c] >= level)
            if mask:
                cols.append(((c, level), mask))
    # compatibility: no two columns partially overlapping
    for (_, a), (_, b) in itertools.combinations(cols, 2):
        if a & b and a & ~b and b & ~a:
            return False
    cols.sort(key=lambda x: (-bin(x[1]).count("1"), x[0]))
    # each trie node is identified by its path of columns
    nodes: dict[tuple, list[int]] = {(): [0] * k}
    for s in range(n):
        path: tuple = ()
        vec = [0] * k
        for (c, level), mask in cols:
            if mask >> s & 1:
                path = path + ((c, level),)
                vec[c] = level
                if path not in nodes:
                    nodes[path] = list(vec)
        if nodes[path] != list(states[s]):
            return False
    for path, vec in nodes.items():
        if not path:
            continue
        parent = nodes[path[:-1]]
        c, level = path[-1]
        if vec[c] != level or parent[c] != level - 1:
            return False
    return True


def gcc_brute_force(rows: list[list[str]]) -> bool:
    """Decide a {1}, {0}, {0,2} instance by trying every choice for the {0,2} cells."""
    open_cells = [(s, c) for s, row in enumerate(rows) for c, t in enumerate(row) if t == "0,2"]
    base = [[1 if t == "1" else 0 for t in row] for row in rows]
    for choice in itertools.product((0, 2), repeat=len(open_cells)):
        states = [list(r) for r in base]
        for (s, c), v in zip(open_cells, choice):
            states[s][c] = v
        if _gcc_tree_ok(states):
            return True
    return False


def gcc_states_from_tree(tree, rows: list[list[str]]) -> list[list[int]]:
    """Map each species' tree vector back to GCC states.

    Bit 1 is state 1; bit 0 is state 0 unless the character was gained and
    then lost above the node, in which case it is state 2.
    """
    where = tree.node_of_species()
    out = []
    for s in range(len(rows)):
        node = where[s][0]
        path = set(tree.path_ops(node))
        vec = tree.nodes[node].vector
        states = []
        for c, bit in enumerate(vec):
            if bit:
                states.append(1)
            elif CharacterOp.gain(c) in path and CharacterOp.loss(c) in path:
                states.append(2)
            else:
                states.append(0)
        out.append(states)
    return out
