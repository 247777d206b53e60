"""Seeded random instances with control over the conflict count.

Randomness comes from numpy's PCG64 bit generator seeded with the given
integer (``numpy.random.Generator(numpy.random.PCG64(seed))``).  A matrix is
drawn cell by cell in row-major order: cell (i, j) is 1 when the next
``random()`` double is below the density.  Both PCG64 and the double
conversion are fixed by numpy, so seeds reproduce across platforms.
"""
from __future__ import annotations

import math

import numpy as np

from .graphs import build_conflict_graph
from .matrix import BinaryMatrix

DENSITY_RANGE = (0.01, 0.5)


class InvalidParams(ValueError):
    pass


class Unsatisfied(RuntimeError):
    pass


def _rng(seed: int) -> np.random.Generator:
    if not isinstance(seed, (int, np.integer)) or seed < 0 or seed >= 2**64:
        raise InvalidParams(f"seed must be an integer in [0, 2^64), got {seed!r}")
    return np.random.Generator(np.random.PCG64(int(seed)))


def _check_shape(n: int, m: int) -> None:
    if n < 1 or m < 1:
        raise InvalidParams(f"need n, m >= 1, got {n}x{m}")


def _draw(rng: np.random.Generator, n: int, m: int, density: float) -> BinaryMatrix:
    cells = rng.random(n * m) < density  # row-major, one double per cell
    return BinaryMatrix(cells.reshape(n, m).astype(np.uint8))


def gen_matrix(n: int, m: int, density: float, seed: int) -> BinaryMatrix:
    _check_shape(n, m)
    if not 0 < density < 1:
        raise InvalidParams(f"density must lie in (0, 1), got {density}")
    return _draw(_rng(seed), n, m, density)


def conflict_count(m: BinaryMatrix) -> int:
    return build_conflict_graph(m).n_edges


def gen_with_conflicts(
    n: int,
    m: int,
    target_edges: range,
    seed: int,
    max_attempts: int = 10_000,
    density: float | None = None,
) -> BinaryMatrix:
    """First draw whose conflict count lies in ``target_edges``.

    All attempts share one stream.  Without a fixed ``density`` each attempt
    first draws its own density log-uniformly from ``DENSITY_RANGE``, which
    reaches both sparse (few conflicts) and dense regimes.
    """
    _check_shape(n, m)
    if density is not None and not 0 < density < 1:
        raise InvalidParams(f"density must lie in (0, 1), got {density}")
    if not isinstance(target_edges, range) or target_edges.step != 1 or len(target_edges) == 0:
        raise InvalidParams(f"target must be a nonempty contiguous range, got {target_edges!r}")
    rng = _rng(seed)
    if target_edges.start > m * (m - 1) // 2:
        raise Unsatisfied(f"{m} characters allow at most {m * (m - 1) // 2} conflicts")
    lo, hi = (math.log(x) for x in DENSITY_RANGE)
    for _ in range(max_attempts):
        d = density if density is not None else math.exp(lo + (hi - lo) * rng.random())
        mat = _draw(rng, n, m, d)
        if conflict_count(mat) in target_edges:
            return mat
    raise Unsatisfied(f"no {n}x{m} matrix with conflicts in {target_edges} after {max_attempts} attempts")
