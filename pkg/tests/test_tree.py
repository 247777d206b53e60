import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from persistent_phylo.cli import solve_instance
from persistent_phylo.matrix import BinaryMatrix, CharacterOp, ConstraintSet, ExtendedMatrix, build_extended
from persistent_phylo.tree import (
    IncompleteMatrix,
    NewickError,
    NotLaminar,
    PPPTree,
    build_tree,
    dfs_reduction,
    format_trace,
    parse_newick,
    parse_trace,
    to_newick,
    validate_tree,
)

from support import check_solution, instances

P3 = BinaryMatrix([[1, 1], [1, 0], [0, 1]])
ID2 = BinaryMatrix([[1, 0], [0, 1]])


def path_tree():
    return build_tree(ExtendedMatrix.from_persistent_cells(P3, ConstraintSet(), [(2, 0)]))


def test_build_examples():
    t = build_tree(ExtendedMatrix.from_persistent_cells(BinaryMatrix([[1]]), ConstraintSet(), []))
    assert len(t.nodes) == 2 and t.nodes[1].ops == [CharacterOp.gain(0)] and t.nodes[1].species == [0]

    t = path_tree()
    chain = []
    node = t.root
    while node.children:
        assert len(node.children) == 1
        node = t.nodes[node.children[0]]
        chain.append((node.ops, node.species))
    assert chain == [
        ([CharacterOp.gain(0)], [1]),
        ([CharacterOp.gain(1)], [0]),
        ([CharacterOp.loss(0)], [2]),
    ]

    t = build_tree(build_extended(ID2).closed())
    assert [t.nodes[c].ops for c in t.root.children] == [[CharacterOp.gain(0)], [CharacterOp.gain(1)]]


def test_build_rejects_bad_completions():
    with pytest.raises(NotLaminar):
        build_tree(build_extended(P3).closed())
    with pytest.raises(IncompleteMatrix):
        build_tree(build_extended(P3))


def test_validate_examples():
    t = path_tree()
    assert validate_tree(t, P3, ConstraintSet()).ok
    report = validate_tree(t, P3, ConstraintSet([(2, 0)]))
    assert report.clauses() == {"constraint"}
    assert "c1 is persistent in s3" in str(report)
    t.root.vector = (1, 0)
    assert "item 2" in validate_tree(t, P3, ConstraintSet()).clauses()


def test_validate_catches_structural_faults():
    t = PPPTree(2, P3.species_names, P3.character_names)
    a = t.add_node(0, [CharacterOp.loss(0)], [1])
    t.add_node(a.id, [CharacterOp.gain(0)], [0])
    t.compute_vectors()
    report = validate_tree(t, P3, ConstraintSet())
    assert "item 4" in report.clauses() and "item 5" in report.clauses()

    t = path_tree()
    t.nodes[-1].species = []
    assert "item 5" in validate_tree(t, P3, ConstraintSet()).clauses()

    t = path_tree()
    t.nodes[-1].vector = (1, 1)
    assert "labels" in validate_tree(t, P3, ConstraintSet()).clauses()


def test_validate_accepts_unlabeled_edges():
    t = PPPTree(1, ("s1",), ("c1",))
    hub = t.add_node(0)
    t.add_node(hub.id, [CharacterOp.gain(0)], [0])
    t.compute_vectors()
    assert validate_tree(t, BinaryMatrix([[1]]), ConstraintSet()).ok


def test_dfs_examples():
    assert dfs_reduction(path_tree()).labels() == ["c1+", "c2+", "c1-"]
    assert dfs_reduction(build_tree(build_extended(ID2).closed())).labels() == ["c1+", "c2+"]
    single = build_tree(build_extended(BinaryMatrix([[1]])).closed())
    assert dfs_reduction(single).labels() == ["c1+"]


def test_newick_examples():
    single = build_tree(build_extended(BinaryMatrix([[1]])).closed())
    assert to_newick(single) == "(s1[c1+])root;"
    assert to_newick(path_tree()) == "(((s3[c1-])s1[c2+])s2[c1+])root;"
    assert to_newick(build_tree(build_extended(ID2).closed())) == "((s1[c1+]),(s2[c2+]))root;"


def test_newick_round_trip_and_errors():
    for t, m in ((path_tree(), P3), (build_tree(build_extended(ID2).closed()), ID2)):
        back = parse_newick(to_newick(t), m.species_names, m.character_names)
        assert to_newick(back) == to_newick(t)
        assert validate_tree(back, m, ConstraintSet()).ok
    for bad in ("(s1[c1+])", "(s1[c9+])root;", "(x[c1+])root;", "(s1[c1+])top;", "(s1[c1+]root;"):
        with pytest.raises(NewickError):
            parse_newick(bad, ("s1",), ("c1",))


def test_species_on_root_and_shared_nodes():
    m = BinaryMatrix([[0, 0], [1, 0], [1, 0]])
    t = build_tree(build_extended(m).closed())
    text = to_newick(t)
    assert text == "(s2|s3[c1+])s1|root;"
    back = parse_newick(text, m.species_names, m.character_names)
    assert validate_tree(back, m, ConstraintSet()).ok


@settings(max_examples=200, deadline=None)
@given(instances(max_species=7, max_characters=5))
def test_solution_round_trips(inst):
    m, e = inst
    res = solve_instance(m, e)
    if res.outcome.solved:
        t = res.tree
        check_solution(m, e, t)
        text = to_newick(t)
        back = parse_newick(text, m.species_names, m.character_names)
        assert to_newick(back) == text
        # at most one gain and one loss per character, loss below gain
        for node in t.preorder():
            path = t.path_ops(node.id)
            for c in range(m.n_characters):
                signs = [op.sign.value for op in path if op.character == c]
                assert signs in ([], ["+"], ["+", "-"])
        # multiset of species vectors equals the rows
        where = t.node_of_species()
        assert sorted(t.nodes[where[s][0]].vector for s in range(m.n_species)) == sorted(
            m.row(s) for s in range(m.n_species))


def test_restore_adds_back_duplicates_and_voids():
    m = BinaryMatrix([[1, 1, 1, 0], [1, 1, 0, 0], [1, 1, 0, 0], [0, 0, 0, 0]])
    res = solve_instance(m)
    assert res.outcome.solved
    t = res.tree
    assert validate_tree(t, m, ConstraintSet()).ok
    where = t.node_of_species()
    assert where[1] == where[2]
    edge = next(n for n in t.nodes if CharacterOp.gain(0) in n.ops)
    assert CharacterOp.gain(1) in edge.ops
    assert all(op.character != 3 for n in t.nodes for op in n.ops)


def test_trace_round_trip():
    r = dfs_reduction(path_tree())
    text = format_trace(r, P3.character_names)
    assert text == "c1+\nc2+\nc1-\n"
    assert parse_trace(text, P3.character_names) == r
    with pytest.raises(ValueError):
        parse_trace("c7+\n", P3.character_names)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32))
def test_children_order_by_smallest_species(seed):
    rng = random.Random(seed)
    m = BinaryMatrix([[1 if rng.random() < 0.4 else 0 for _ in range(4)] for _ in range(6)])
    res = solve_instance(m)
    if not res.outcome.solved:
        return
    t = res.tree
    for node in t.nodes:
        keys = [min(t.subtree_species(c)) for c in node.children]
        assert keys == sorted(keys)
