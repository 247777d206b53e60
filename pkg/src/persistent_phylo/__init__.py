"""Persistent perfect phylogenies with constraints on persistence."""
from .generator import InvalidParams, Unsatisfied, conflict_count, gen_matrix, gen_with_conflicts
from .graphs import (
    ConflictGraph,
    build_adjacency_graph,
    build_conflict_graph,
    build_partial_order,
    maximal_characters,
)
from .io import ParseError, gcc_import, parse_constraints, parse_matrix, read_constraints, read_matrix
from .matrix import (
    BinaryMatrix,
    CharacterOp,
    ConstraintOnOne,
    ConstraintSet,
    ExtendedMatrix,
    PairState,
    PreprocessReport,
    Sign,
    build_extended,
    forbidden_pair_witness,
    preprocess,
)
from .oracle import OracleResult, OracleVerdict, oracle_decide
from .poly import NotEmptyConflict, solve_empty_conflict
from .redblack import (
    CharState,
    CReduction,
    RealizationError,
    RedBlackGraph,
    apply_reduction,
    build_red_black,
    connected_components,
    detect_red_sigma,
    realize,
    undo,
)
from .search import Budget, SolveOutcome, Verdict, decide_pp_opt
from .tree import (
    NotLaminar,
    PPPTree,
    ValidationReport,
    build_tree,
    dfs_reduction,
    parse_newick,
    restore_tree,
    to_newick,
    validate_tree,
)

__version__ = "0.1.0"
