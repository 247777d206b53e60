import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from persistent_phylo.generator import InvalidParams, Unsatisfied, conflict_count, gen_matrix, gen_with_conflicts
from persistent_phylo.matrix import BinaryMatrix
from persistent_phylo.oracle import oracle_decide


@settings(max_examples=50)
@given(st.integers(1, 20), st.integers(1, 10), st.floats(0.05, 0.95), st.integers(0, 2**64 - 1))
def test_determinism(n, m, density, seed):
    a, b = gen_matrix(n, m, density, seed), gen_matrix(n, m, density, seed)
    assert np.array_equal(a.array, b.array)


def test_stream_is_row_major_pcg64():
    m = gen_matrix(4, 3, 0.5, 42)
    expected = np.random.Generator(np.random.PCG64(42)).random(12) < 0.5
    assert m.array.flatten().tolist() == expected.astype(int).tolist()


def test_dense_limit():
    m = gen_matrix(400, 10, 0.999, 1)
    assert m.array.mean() > 0.99


def test_conflict_count_examples():
    assert conflict_count(BinaryMatrix([[0, 0], [0, 1], [1, 0], [1, 1]])) == 1
    assert conflict_count(BinaryMatrix([[1, 1], [1, 0], [0, 1]])) == 0
    assert conflict_count(BinaryMatrix([[1], [0], [1]])) == 0


def test_targets():
    assert conflict_count(gen_with_conflicts(20, 8, range(0, 1), seed=5)) == 0
    assert conflict_count(gen_with_conflicts(50, 15, range(1, 2), seed=5)) == 1
    a = gen_with_conflicts(50, 15, range(1, 11), seed=9)
    b = gen_with_conflicts(50, 15, range(1, 11), seed=9)
    assert np.array_equal(a.array, b.array)


def test_unsatisfiable_targets():
    with pytest.raises(Unsatisfied):
        gen_with_conflicts(10, 3, range(4, 6), seed=0)
    with pytest.raises(Unsatisfied):
        gen_with_conflicts(2, 6, range(1, 2), seed=0, max_attempts=5)  # two rows cannot hold four gametes


@pytest.mark.parametrize("args", [(0, 3, 0.5, 1), (3, 0, 0.5, 1), (3, 3, 0.0, 1), (3, 3, 1.0, 1),
                                  (3, 3, 0.5, -1), (3, 3, 0.5, 2**64)])
def test_invalid_params(args):
    with pytest.raises(InvalidParams):
        gen_matrix(*args)


def test_invalid_target():
    with pytest.raises(InvalidParams):
        gen_with_conflicts(5, 5, range(3, 3), seed=0)


def test_small_batches_are_mixed():
    verdicts = [bool(oracle_decide(gen_matrix(10, 8, 0.35, seed), cap=None)) for seed in range(10)]
    assert True in verdicts and False in verdicts
