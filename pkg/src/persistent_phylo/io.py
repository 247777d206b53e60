"""Text formats: matrices, constraint lists and generalized-character instances.

Matrix file::

    # optional comments
    #species a b c        (optional, only for non-default names)
    #characters x y       (optional)
    3 2
    1 1
    1 0
    0 1

Constraint file: one ``species character`` pair of 0-based indices per line.
GCC instance file: one line per species, one state-set token per
generalized character (``1``, ``0`` or ``0,2``).
"""
from __future__ import annotations

import re
from pathlib import Path

from .matrix import BinaryMatrix, ConstraintSet, _default_names

_BAD_NAME = re.compile(r"[\s()\[\],;|:#]")


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        where = "".join(f"{x}:" for x in (source, line) if x is not None)
        super().__init__(f"{where} {message}" if where else message)
        self.line = line
        self.source = source


class IllegalStateSet(ParseError):
    pass


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        yield lineno, raw.strip()


def _names(tokens: list[str], kind: str, lineno: int, source: str | None) -> list[str]:
    for t in tokens:
        if _BAD_NAME.search(t):
            raise ParseError(f"illegal {kind} name {t!r}", lineno, source)
    return tokens


def parse_matrix(text: str, source: str | None = None) -> BinaryMatrix:
    def fail(message: str, line: int | None) -> ParseError:
        return ParseError(message, line, source)

    species = characters = None
    header = None
    rows: list[list[int]] = []
    last = 1
    for lineno, line in _lines(text):
        last = lineno
        if not line:
            continue
        if line.startswith("#"):
            head, *rest = line.split()
            if head == "#species":
                species = _names(rest, "species", lineno, source), lineno
            elif head == "#characters":
                characters = _names(rest, "character", lineno, source), lineno
            continue
        tokens = line.split()
        if header is None:
            if len(tokens) != 2 or not all(t.isdigit() for t in tokens):
                raise fail(f"expected header 'n m', got {line!r}", lineno)
            header = int(tokens[0]), int(tokens[1])
            continue
        if len(rows) == header[0]:
            raise fail(f"more than {header[0]} rows", lineno)
        if len(tokens) != header[1]:
            raise fail(f"row has {len(tokens)} entries, expected {header[1]}", lineno)
        if any(t not in ("0", "1") for t in tokens):
            raise fail("entries must be 0 or 1", lineno)
        rows.append([int(t) for t in tokens])
    if header is None:
        raise fail("missing header 'n m'", last)
    n, m = header
    if len(rows) != n:
        raise fail(f"expected {n} rows, found {len(rows)}", last)
    for names, kind, size in ((species, "species", n), (characters, "character", m)):
        if names is not None and len(names[0]) != size:
            raise fail(f"{len(names[0])} {kind} names for {size} entries", names[1])
        if names is not None and len(set(names[0])) != size:
            raise fail(f"duplicate {kind} names", names[1])
    return BinaryMatrix(
        rows,
        species[0] if species else None,
        characters[0] if characters else None,
        n_characters=m,
    )


def format_matrix(m: BinaryMatrix) -> str:
    out = []
    if m.species_names != _default_names("s", m.n_species):
        out.append("#species " + " ".join(m.species_names))
    if m.character_names != _default_names("c", m.n_characters):
        out.append("#characters " + " ".join(m.character_names))
    out.append(f"{m.n_species} {m.n_characters}")
    for s in range(m.n_species):
        out.append(" ".join(str(v) for v in m.row(s)))
    return "\n".join(out) + "\n"


def parse_constraints(text: str, m: BinaryMatrix | None = None, source: str | None = None) -> ConstraintSet:
    entries = []
    for lineno, line in _lines(text):
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2 or not all(t.isdigit() for t in tokens):
            raise ParseError(f"expected 'species character', got {line!r}", lineno, source)
        s, c = int(tokens[0]), int(tokens[1])
        if m is not None:
            if s >= m.n_species or c >= m.n_characters:
                raise ParseError(f"cell ({s}, {c}) is outside the {m.n_species}x{m.n_characters} matrix",
                                 lineno, source)
            if m.cell(s, c):
                raise ParseError(f"cell ({s}, {c}) is 1 and cannot be constrained", lineno, source)
        entries.append((s, c))
    return ConstraintSet(entries)


def format_constraints(e: ConstraintSet) -> str:
    return "".join(f"{s} {c}\n" for s, c in e)


def read_matrix(path: str | Path) -> BinaryMatrix:
    return parse_matrix(Path(path).read_text(), str(path))


def read_constraints(path: str | Path, m: BinaryMatrix | None = None) -> ConstraintSet:
    return parse_constraints(Path(path).read_text(), m, str(path))


# -- generalized characters ---------------------------------------------------

GCC_TOKENS = ("1", "0", "0,2")


def parse_gcc(text: str, source: str | None = None) -> list[list[str]]:
    rows = []
    for lineno, line in _lines(text):
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        for t in tokens:
            if t not in GCC_TOKENS:
                raise IllegalStateSet(f"state set {t!r} is not one of 1, 0, 0,2", lineno, source)
        if rows and len(tokens) != len(rows[0]):
            raise ParseError(f"row has {len(tokens)} state sets, expected {len(rows[0])}", lineno, source)
        rows.append(tokens)
    return rows


def gcc_to_instance(rows: list[list[str]]) -> tuple[BinaryMatrix, ConstraintSet]:
    """``1`` becomes a 1-cell, ``0,2`` an open 0-cell, ``0`` a constrained 0-cell."""
    k = len(rows[0]) if rows else 0
    cells = [[1 if t == "1" else 0 for t in row] for row in rows]
    e = ConstraintSet((s, c) for s, row in enumerate(rows) for c, t in enumerate(row) if t == "0")
    return BinaryMatrix(cells, n_characters=k), e


def gcc_import(path: str | Path) -> tuple[BinaryMatrix, ConstraintSet]:
    return gcc_to_instance(parse_gcc(Path(path).read_text(), str(path)))

