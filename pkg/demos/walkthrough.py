"""A short tour of the library on small instances.

Run with ``python demos/walkthrough.py``.
"""
from persistent_phylo import (
    BinaryMatrix,
    ConstraintSet,
    decide_pp_opt,
    gen_with_conflicts,
    oracle_decide,
    preprocess,
    solve_empty_conflict,
)
from persistent_phylo.cli import solve_instance
from persistent_phylo.generator import conflict_count
from persistent_phylo.tree import dfs_reduction, format_trace, to_newick


def show(title, m, e=ConstraintSet()):
    print(f"== {title}")
    print(m.array)
    if len(e):
        print("constrained cells:", sorted(e))
    res = solve_instance(m, e)
    print("verdict:", res.outcome.verdict.value, "| oracle:", oracle_decide(m, e, cap=None).verdict.value)
    if res.tree is not None:
        print("newick: ", to_newick(res.tree))
        print("trace:  ", format_trace(dfs_reduction(res.tree), m.character_names).split())
    print()


# three species, two characters: c1 must be lost in s3 for a tree to exist
p3 = BinaryMatrix([[1, 1], [1, 0], [0, 1]])
show("persistence rescues an incompatible pair", p3)

# forbid that loss and the other possible one
show("both losses forbidden", p3, ConstraintSet([(2, 0), (1, 1)]))

# all four gametes: the conflict graph has an edge, so the search is needed
four = BinaryMatrix([[0, 0], [0, 1], [1, 0], [1, 1]])
show("one conflict", four)

# the polynomial procedure on a conflict-free instance
m = gen_with_conflicts(12, 6, range(0, 1), seed=3, density=0.3)
r = solve_empty_conflict(m)
print("== empty conflict graph, 12x6")
print("reduction:", r.labels())
print()

# a generated batch, solved with the search
print("== ten 30x10 instances with 1..6 conflicts")
for seed in range(10):
    m = gen_with_conflicts(30, 10, range(1, 7), seed=seed)
    pm, pe, _ = preprocess(m)
    out = decide_pp_opt(pm, pe)
    print(f"seed {seed}: {conflict_count(m)} conflicts, reduced to {pm.n_species}x{pm.n_characters},"
          f" {out.verdict.value}, {out.stats.visited} nodes")
