"""Persistent perfect phylogenies: construction, validation and Newick I/O."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

from .matrix import (
    BinaryMatrix,
    CharacterOp,
    ConstraintSet,
    ExtendedMatrix,
    PreprocessReport,
    Sign,
    bits,
    popcount,
)
from .redblack import CReduction


class NotLaminar(ValueError):
    pass


class IncompleteMatrix(ValueError):
    pass


class NewickError(ValueError):
    pass


@dataclass
class TreeNode:
    id: int
    parent: int | None
    ops: list[CharacterOp] = field(default_factory=list)  # label of the edge from the parent
    species: list[int] = field(default_factory=list)
    children: list[int] = field(default_factory=list)
    vector: tuple[int, ...] = ()


class PPPTree:
    """A rooted tree whose edges carry c+/c- labels and nodes 0/1 vectors."""

    def __init__(self, n_characters: int, species_names: Sequence[str], character_names: Sequence[str]):
        self.n_characters = n_characters
        self.species_names = tuple(species_names)
        self.character_names = tuple(character_names)
        self.nodes: list[TreeNode] = [TreeNode(0, None, vector=(0,) * n_characters)]

    @property
    def root(self) -> TreeNode:
        return self.nodes[0]

    def add_node(self, parent: int, ops: Sequence[CharacterOp] = (), species: Sequence[int] = ()) -> TreeNode:
        node = TreeNode(len(self.nodes), parent, list(ops), list(species))
        self.nodes.append(node)
        self.nodes[parent].children.append(node.id)
        return node

    def compute_vectors(self) -> None:
        """Derive every vector from the root by applying the edge labels."""
        for node in self.preorder():
            if node.parent is None:
                node.vector = (0,) * self.n_characters
                continue
            vec = list(self.nodes[node.parent].vector)
            for op in node.ops:
                vec[op.character] = 1 if op.is_gain else 0
            node.vector = tuple(vec)

    def preorder(self, start: int = 0):
        stack = [start]
        while stack:
            node = self.nodes[stack.pop()]
            yield node
            stack.extend(reversed(node.children))

    def subtree_species(self, node_id: int) -> list[int]:
        return sorted(s for n in self.preorder(node_id) for s in n.species)

    def node_of_species(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for node in self.nodes:
            for s in node.species:
                out.setdefault(s, []).append(node.id)
        return out

    def path_ops(self, node_id: int) -> list[CharacterOp]:
        ops: list[CharacterOp] = []
        node = self.nodes[node_id]
        while node.parent is not None:
            ops[:0] = node.ops
            node = self.nodes[node.parent]
        return ops

    def sort_children(self) -> None:
        """Order children by the smallest species index in their subtree."""
        key = {}
        for node in reversed(list(self.preorder())):
            own = min(node.species) if node.species else float("inf")
            key[node.id] = min([own] + [key[c] for c in node.children])
        for node in self.nodes:
            node.children.sort(key=lambda c: (key[c], c))

    def edges(self) -> list[tuple[int, int, list[CharacterOp]]]:
        return [(n.parent, n.id, n.ops) for n in self.nodes if n.parent is not None]


def _edge_order(op: CharacterOp) -> tuple:
    return op.character, op.sign is Sign.LOSS


def build_tree(me: ExtendedMatrix) -> PPPTree:
    """Directed perfect phylogeny of the completed 2m-column matrix.

    Nonempty column supports are nested by decreasing size; columns with the
    same support share an edge, each species sits at the smallest support
    containing it, and nodes carrying no species with a single child are
    contracted into the edge below them.
    """
    base = me.base
    for c in range(me.n_characters):
        if me.unknown(c):
            raise IncompleteMatrix(f"c{c + 1} still has open pairs")
    supports: dict[int, list[CharacterOp]] = {}
    for col in me.columns():
        ones, _ = me.column(col)
        if ones:
            supports.setdefault(ones, []).append(col)
    order = sorted(supports, key=lambda x: (-popcount(x), min(_edge_order(op) for op in supports[x])))

    tree = PPPTree(me.n_characters, base.species_names, base.character_names)
    placed: list[tuple[int, int]] = []  # (support, node id), decreasing support size
    for support in order:
        parent, parent_size = 0, None
        for other, node_id in placed:
            inter = other & support
            if not inter:
                continue
            if inter != support:
                a, b = supports[other][0], supports[support][0]
                raise NotLaminar(f"columns {a!r} and {b!r} overlap without nesting")
            size = popcount(other)
            if parent_size is None or size < parent_size:
                parent, parent_size = node_id, size
        node = tree.add_node(parent, sorted(supports[support], key=_edge_order))
        placed.append((support, node.id))

    for s in range(me.n_species):
        best, best_size = 0, None
        for support, node_id in placed:
            if support >> s & 1:
                size = popcount(support)
                if best_size is None or size < best_size:
                    best, best_size = node_id, size
        tree.nodes[best].species.append(s)

    tree = _contract(tree)
    tree.compute_vectors()
    tree.sort_children()
    return tree


def _contract(tree: PPPTree) -> PPPTree:
    """Rebuild without species-less nodes that have exactly one child."""
    out = PPPTree(tree.n_characters, tree.species_names, tree.character_names)
    out.root.species = list(tree.root.species)

    def copy(src: TreeNode, dst_parent: int, pending: list[CharacterOp]) -> None:
        ops = pending + src.ops
        if not src.species and len(src.children) == 1:
            copy(tree.nodes[src.children[0]], dst_parent, ops)
            return
        node = out.add_node(dst_parent, ops, src.species)
        for child in src.children:
            copy(tree.nodes[child], node.id, [])

    for child in tree.root.children:
        copy(tree.nodes[child], 0, [])
    return out


@dataclass(frozen=True)
class Violation:
    clause: str
    message: str

    def __str__(self) -> str:
        return f"[{self.clause}] {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def add(self, clause: str, message: str) -> None:
        self.violations.append(Violation(clause, message))

    def clauses(self) -> set[str]:
        return {v.clause for v in self.violations}

    def __str__(self) -> str:
        return "valid" if self.ok else "\n".join(str(v) for v in self.violations)


def _is_ancestor(tree: PPPTree, a: int, b: int) -> bool:
    """True when node ``a`` lies on the path from the root to ``b`` (inclusive)."""
    node: int | None = b
    while node is not None:
        if node == a:
            return True
        node = tree.nodes[node].parent
    return False


def validate_tree(t: PPPTree, m: BinaryMatrix, e: ConstraintSet | None = None) -> ValidationReport:
    """Check ``t`` against the persistent perfect phylogeny conditions for ``(m, e)``.

    Clause names: ``item 1`` vector lengths, ``item 2`` zero root, ``item 4``
    at most one gain and one loss per character with the loss below the
    gain, ``item 5`` each species labels one node equal to its row,
    ``labels`` vectors agreeing with edge labels, ``constraint`` E* entries.
    Unlabeled edges are accepted.
    """
    e = e or ConstraintSet()
    rep = ValidationReport()
    k = m.n_characters
    if t.n_characters != k:
        rep.add("item 1", f"tree has {t.n_characters} characters, matrix has {k}")
        return rep
    for node in t.nodes:
        if len(node.vector) != k:
            rep.add("item 1", f"node {node.id} has a vector of length {len(node.vector)}")
    if rep.violations:
        return rep
    if any(t.root.vector):
        rep.add("item 2", "root vector is not all zeros")

    gains: dict[int, list[int]] = {}
    losses: dict[int, list[int]] = {}
    for node in t.preorder():
        if node.parent is None:
            continue
        before = list(t.nodes[node.parent].vector)
        expected = list(before)
        for op in node.ops:
            c = op.character
            (gains if op.is_gain else losses).setdefault(c, []).append(node.id)
            if op.is_gain and expected[c] == 1:
                rep.add("item 4", f"{op.label(t.character_names)} on the edge to node {node.id} "
                                  "gains a character that is already present")
            if not op.is_gain and expected[c] == 0:
                rep.add("item 4", f"{op.label(t.character_names)} on the edge to node {node.id} "
                                  "is not preceded by a gain")
            expected[c] = 1 if op.is_gain else 0
        if tuple(expected) != node.vector:
            rep.add("labels", f"vector of node {node.id} disagrees with its edge labels")
        for c in range(k):
            if before[c] != node.vector[c] and not any(op.character == c for op in node.ops):
                rep.add("labels", f"c{c + 1} changes on the edge to node {node.id} without a label")

    names = t.character_names
    for c in range(k):
        g, l = gains.get(c, []), losses.get(c, [])
        if len(g) > 1:
            rep.add("item 4", f"{names[c]} is gained on {len(g)} edges")
        if len(l) > 1:
            rep.add("item 4", f"{names[c]} is lost on {len(l)} edges")
        if g and l:
            if l[0] == g[0] or not _is_ancestor(t, g[0], l[0]):
                rep.add("item 4", f"{names[c]}- is not below {names[c]}+")
        elif l:
            rep.add("item 4", f"{names[c]}- without {names[c]}+")

    where = t.node_of_species()
    for s in range(m.n_species):
        nodes = where.get(s, [])
        if len(nodes) != 1:
            rep.add("item 5", f"{m.species_names[s]} labels {len(nodes)} nodes")
            continue
        if t.nodes[nodes[0]].vector != m.row(s):
            rep.add("item 5", f"vector at {m.species_names[s]} differs from its row")
    for s in where:
        if not 0 <= s < m.n_species:
            rep.add("item 5", f"unknown species index {s}")

    for s, c in e:
        nodes = where.get(s, [])
        if len(nodes) != 1:
            continue
        ops = set(t.path_ops(nodes[0]))
        if CharacterOp.gain(c) in ops and CharacterOp.loss(c) in ops:
            rep.add("constraint", f"{names[c]} is persistent in {m.species_names[s]}")
    return rep


def dfs_reduction(t: PPPTree) -> CReduction:
    """Edge labels in depth-first order, children by smallest species index."""
    t.sort_children()
    ops: list[CharacterOp] = []
    for node in t.preorder():
        ops.extend(node.ops)
    return CReduction(tuple(ops))


def tree_completion(t: PPPTree, m: BinaryMatrix) -> set[tuple[int, int]]:
    """Cells (species, character) where the character is persistent in ``t``."""
    out = set()
    for s, nodes in t.node_of_species().items():
        path = set(t.path_ops(nodes[0]))
        for c in range(m.n_characters):
            if CharacterOp.gain(c) in path and CharacterOp.loss(c) in path:
                out.add((s, c))
    return out


def restore_tree(t: PPPTree, report: PreprocessReport, original: BinaryMatrix) -> PPPTree:
    """Map a tree of a preprocessed instance back onto the original matrix.

    Removed duplicate species join their twin's node, removed duplicate
    characters follow their twin's edges, void characters stay absent.
    """
    ks, kc = report.kept_species, report.kept_characters
    twins_c: dict[int, list[int]] = {}
    for removed, twin in report.duplicate_characters:
        twins_c.setdefault(twin, []).append(removed)
    twins_s: dict[int, list[int]] = {}
    for removed, twin in report.duplicate_species:
        twins_s.setdefault(twin, []).append(removed)

    out = PPPTree(original.n_characters, original.species_names, original.character_names)
    mapping = {0: 0}
    for node in t.preorder():
        species = []
        for s in node.species:
            species.append(ks[s])
            species.extend(twins_s.get(ks[s], []))
        if node.parent is None:
            out.root.species = sorted(species)
            continue
        ops = []
        for op in node.ops:
            c = kc[op.character]
            ops.append(CharacterOp(c, op.sign))
            ops.extend(CharacterOp(d, op.sign) for d in twins_c.get(c, []))
        new = out.add_node(mapping[node.parent], sorted(ops, key=_edge_order), sorted(species))
        mapping[node.id] = new.id
    out.compute_vectors()
    out.sort_children()
    return out


# -- Newick -------------------------------------------------------------------

def to_newick(t: PPPTree) -> str:
    """Serialize with species names as node names and edge labels in brackets.

    ``(s1[c1+])root;`` is a root with one child carrying species s1 under
    the edge c1+.  Children of a branching node are each wrapped in an
    unnamed, unlabeled node, as in a standard tree.
    """
    t.sort_children()
    sp, ch = t.species_names, t.character_names

    def render(node: TreeNode) -> str:
        kids = [render(t.nodes[c]) for c in node.children]
        if len(kids) > 1:
            kids = [f"({k})" for k in kids]
        text = f"({','.join(kids)})" if kids else ""
        text += "|".join(sp[s] for s in sorted(node.species))
        if node.ops:
            text += "[" + ",".join(op.label(ch) for op in node.ops) + "]"
        return text

    root = t.root
    kids = [render(t.nodes[c]) for c in root.children]
    if len(kids) > 1:
        kids = [f"({k})" for k in kids]
    body = f"({','.join(kids)})" if kids else ""
    name = "|".join(sp[s] for s in sorted(root.species))
    return body + (name + "|root" if name else "root") + ";"


_TOKEN = re.compile(r"\s*(\(|\)|,|;|\[[^\]]*\]|[^()\[\],;\s]+)")


def parse_newick(text: str, species_names: Sequence[str], character_names: Sequence[str]) -> PPPTree:
    """Inverse of :func:`to_newick`; unnamed, unlabeled single-child wrappers are dropped."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if not mt:
            raise NewickError(f"unexpected character at offset {pos}")
        tokens.append(mt.group(1))
        pos = mt.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    sp_index = {name: i for i, name in enumerate(species_names)}
    ch_index = {name: i for i, name in enumerate(character_names)}
    i = 0

    def peek() -> str | None:
        return tokens[i] if i < len(tokens) else None

    def take() -> str:
        nonlocal i
        if i >= len(tokens):
            raise NewickError("unexpected end of input")
        tok = tokens[i]
        i += 1
        return tok

    def parse_node() -> dict:
        children = []
        if peek() == "(":
            take()
            children.append(parse_node())
            while peek() == ",":
                take()
                children.append(parse_node())
            if take() != ")":
                raise NewickError("expected ')'")
        name = ""
        if peek() not in (None, "(", ")", ",", ";") and not peek().startswith("["):
            name = take()
        ops = []
        if peek() is not None and peek().startswith("["):
            for label in filter(None, (x.strip() for x in take()[1:-1].split(","))):
                if label[-1] not in "+-" or label[:-1] not in ch_index:
                    raise NewickError(f"bad edge label {label!r}")
                ops.append(CharacterOp(ch_index[label[:-1]], Sign(label[-1])))
        return {"name": name, "ops": ops, "children": children}

    root = parse_node()
    if take() != ";":
        raise NewickError("expected ';'")
    if i != len(tokens):
        raise NewickError("trailing input after ';'")

    def species_of(name: str, is_root: bool) -> list[int]:
        parts = [p for p in name.split("|") if p] if name else []
        if is_root:
            if not parts or parts[-1] != "root":
                raise NewickError("root node must be named 'root'")
            parts = parts[:-1]
        out = []
        for p in parts:
            if p not in sp_index:
                raise NewickError(f"unknown species {p!r}")
            out.append(sp_index[p])
        return out

    tree = PPPTree(len(character_names), species_names, character_names)
    tree.root.species = species_of(root["name"], True)
    if root["ops"]:
        raise NewickError("the root has no incoming edge to label")

    def build(node: dict, parent: int) -> None:
        while not node["name"] and not node["ops"] and len(node["children"]) == 1:
            node = node["children"][0]
        new = tree.add_node(parent, node["ops"], species_of(node["name"], False))
        for child in node["children"]:
            build(child, new.id)

    for child in root["children"]:
        build(child, 0)
    tree.compute_vectors()
    return tree


def format_trace(r: CReduction, names: Sequence[str] | None = None) -> str:
    return "".join(label + "\n" for label in r.labels(names))


def parse_trace(text: str, names: Sequence[str]) -> CReduction:
    index = {name: i for i, name in enumerate(names)}
    ops = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line[-1] not in "+-" or line[:-1] not in index:
            raise ValueError(f"line {lineno}: bad operation {line!r}")
        ops.append(CharacterOp(index[line[:-1]], Sign(line[-1])))
    return CReduction(tuple(ops))
