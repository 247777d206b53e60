"""Brute-force ground truth by enumerating completions of the extended matrix.

Nothing here uses the red-black machinery: a completion is an explicit
n x 2m 0/1 array and the directed perfect phylogeny test is the pairwise
three-gamete check.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .matrix import BinaryMatrix, ConstraintSet

DEFAULT_CAP = 22


class OracleVerdict(enum.Enum):
    YES = "Yes"
    NO = "No"
    TOO_LARGE = "TooLarge"


@dataclass
class OracleResult:
    verdict: OracleVerdict
    persistent: list[tuple[int, int]] | None = None  # the first passing completion
    open_pairs: int = 0

    def __bool__(self) -> bool:
        return self.verdict is OracleVerdict.YES


def has_directed_pp(columns) -> bool:
    """True iff no two columns show (1,1), (1,0) and (0,1) together.

    ``columns`` is an n x k 0/1 array (one column per binary character) or a
    sequence of equal-length 0/1 columns.
    """
    x = np.asarray(columns, dtype=np.int64)
    if x.ndim == 1:
        return True
    if x.ndim == 2 and x.shape[0] != 0 and not isinstance(columns, np.ndarray):
        # a list of columns
        x = x.T
    if x.shape[1] < 2:
        return True
    both = x.T @ x
    ones = x.sum(axis=0)
    only_first = ones[:, None] - both
    only_second = ones[None, :] - both
    bad = (both > 0) & (only_first > 0) & (only_second > 0)
    return not bad.any()


def extended_columns(m: BinaryMatrix, persistent: set[tuple[int, int]]) -> np.ndarray:
    """The completed n x 2m matrix: columns c+ and c- interleaved."""
    a = m.array.astype(np.int64)
    n, k = a.shape
    out = np.zeros((n, 2 * k), dtype=np.int64)
    out[:, 0::2] = a
    for s, c in persistent:
        out[s, 2 * c] = 1
        out[s, 2 * c + 1] = 1
    return out


def oracle_decide(
    m: BinaryMatrix, e: ConstraintSet | None = None, cap: int | None = DEFAULT_CAP
) -> OracleResult:
    """Is there a completion of the open pairs with a directed perfect phylogeny?

    Open pairs are taken in row-major order and tried Zero first, then
    Persistent.  Branches whose already-decided rows exhibit a forbidden
    column pair are cut, which skips only completions that would fail the
    final test anyway.  ``cap=None`` removes the size limit.
    """
    e = e or ConstraintSet()
    n, k = m.shape
    a = m.array
    open_cells = [
        (s, c) for s in range(n) for c in range(k) if a[s, c] == 0 and (s, c) not in e
    ]
    q = len(open_cells)
    if cap is not None and q > cap:
        return OracleResult(OracleVerdict.TOO_LARGE, open_pairs=q)

    # values[s][col] in {0, 1, None}; col 2c is c+, 2c+1 is c-
    width = 2 * k
    values: list[list[int | None]] = []
    for s in range(n):
        row: list[int | None] = []
        for c in range(k):
            if a[s, c] == 1:
                row += [1, 0]
            elif (s, c) in e:
                row += [0, 0]
            else:
                row += [None, None]
        values.append(row)

    def column_ok(col: int) -> bool:
        for other in range(width):
            if other == col:
                continue
            seen11 = seen10 = seen01 = False
            for s in range(n):
                x, y = values[s][col], values[s][other]
                if x is None or y is None:
                    continue
                if x and y:
                    seen11 = True
                elif x:
                    seen10 = True
                elif y:
                    seen01 = True
            if seen11 and seen10 and seen01:
                return False
        return True

    if not all(column_ok(col) for col in range(width)):
        return OracleResult(OracleVerdict.NO, open_pairs=q)

    chosen: list[tuple[int, int]] = []

    def search(i: int) -> bool:
        if i == q:
            return True
        s, c = open_cells[i]
        for v in (0, 1):
            values[s][2 * c] = v
            values[s][2 * c + 1] = v
            if column_ok(2 * c) and column_ok(2 * c + 1):
                if v:
                    chosen.append((s, c))
                if search(i + 1):
                    return True
                if v:
                    chosen.pop()
        values[s][2 * c] = None
        values[s][2 * c + 1] = None
        return False

    if search(0):
        witness = list(chosen)
        assert has_directed_pp(extended_columns(m, set(witness)))
        return OracleResult(OracleVerdict.YES, witness, q)
    return OracleResult(OracleVerdict.NO, open_pairs=q)
