"""Binary instances, constraints, preprocessing and the extended matrix.

Species and character sets are handled as Python integers used as bit
sets: bit ``i`` of a column mask is set when species ``i`` carries the
character.  All the heavier machinery (red-black graph, search) works on
these masks.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class ConstraintOnOne(ValueError):
    """A constraint names a cell whose value is 1."""


class Sign(str, enum.Enum):
    GAIN = "+"
    LOSS = "-"


class CharacterOp(NamedTuple):
    """A signed character: ``c+`` (gain) or ``c-`` (loss).

    Also used to name a column of the extended matrix.
    """

    character: int
    sign: Sign

    @classmethod
    def gain(cls, c: int) -> "CharacterOp":
        return cls(c, Sign.GAIN)

    @classmethod
    def loss(cls, c: int) -> "CharacterOp":
        return cls(c, Sign.LOSS)

    @property
    def is_gain(self) -> bool:
        return self.sign is Sign.GAIN

    def label(self, names: Sequence[str] | None = None) -> str:
        name = names[self.character] if names is not None else f"c{self.character + 1}"
        return f"{name}{self.sign.value}"

    def __repr__(self) -> str:
        return self.label()


def popcount(x: int) -> int:
    return bin(x).count("1")


def bits(x: int) -> list[int]:
    """Indices of the set bits of ``x`` in increasing order."""
    out = []
    i = 0
    while x:
        if x & 1:
            out.append(i)
        x >>= 1
        i += 1
    return out


def lowest_bit(x: int) -> int:
    return (x & -x).bit_length() - 1


def _default_names(prefix: str, k: int) -> tuple[str, ...]:
    return tuple(f"{prefix}{i + 1}" for i in range(k))


class BinaryMatrix:
    """An immutable species x character 0/1 matrix.

    >>> m = BinaryMatrix([[1, 1], [1, 0], [0, 1]])
    >>> m.shape
    (3, 2)
    >>> bin(m.column_mask(0))
    '0b11'
    """

    __slots__ = ("_data", "species_names", "character_names", "_cols", "_rows")

    def __init__(
        self,
        rows: Iterable[Iterable[int]] | np.ndarray,
        species_names: Sequence[str] | None = None,
        character_names: Sequence[str] | None = None,
        n_characters: int | None = None,
    ):
        data = np.array(rows, dtype=np.uint8)
        if data.size == 0:
            data = data.reshape(len(data) if data.ndim >= 1 else 0, n_characters or 0)
        if data.ndim != 2:
            raise ValueError("matrix must be two-dimensional")
        if not np.isin(data, (0, 1)).all():
            raise ValueError("matrix cells must be 0 or 1")
        data.setflags(write=False)
        n, m = data.shape
        sp = tuple(species_names) if species_names is not None else _default_names("s", n)
        ch = tuple(character_names) if character_names is not None else _default_names("c", m)
        if len(sp) != n or len(ch) != m:
            raise ValueError("name lists do not match the matrix shape")
        if len(set(sp)) != n or len(set(ch)) != m:
            raise ValueError("species and character names must be unique")
        self._data = data
        self.species_names = sp
        self.character_names = ch
        self._cols: tuple[int, ...] | None = None
        self._rows: tuple[int, ...] | None = None

    @property
    def n_species(self) -> int:
        return self._data.shape[0]

    @property
    def n_characters(self) -> int:
        return self._data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._data.shape

    @property
    def array(self) -> np.ndarray:
        return self._data

    def cell(self, s: int, c: int) -> int:
        return int(self._data[s, c])

    def row(self, s: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self._data[s])

    def column(self, c: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self._data[:, c])

    def column_masks(self) -> tuple[int, ...]:
        if self._cols is None:
            cols = []
            for c in range(self.n_characters):
                mask = 0
                for s in np.flatnonzero(self._data[:, c]):
                    mask |= 1 << int(s)
                cols.append(mask)
            self._cols = tuple(cols)
        return self._cols

    def column_mask(self, c: int) -> int:
        return self.column_masks()[c]

    def row_masks(self) -> tuple[int, ...]:
        if self._rows is None:
            rows = []
            for s in range(self.n_species):
                mask = 0
                for c in np.flatnonzero(self._data[s]):
                    mask |= 1 << int(c)
                rows.append(mask)
            self._rows = tuple(rows)
        return self._rows

    @property
    def all_species(self) -> int:
        return (1 << self.n_species) - 1

    def submatrix(self, species: Sequence[int], characters: Sequence[int]) -> "BinaryMatrix":
        data = self._data[np.ix_(list(species), list(characters))]
        return BinaryMatrix(
            data,
            [self.species_names[s] for s in species],
            [self.character_names[c] for c in characters],
            n_characters=len(characters),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BinaryMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self._data, other._data)
            and self.species_names == other.species_names
            and self.character_names == other.character_names
        )

    def __hash__(self) -> int:
        return hash((self.shape, self._data.tobytes()))

    def __repr__(self) -> str:
        rows = ["".join(str(v) for v in r) for r in self._data.tolist()]
        return f"BinaryMatrix({self.n_species}x{self.n_characters}: {' '.join(rows)})"


@dataclass(frozen=True)
class ConstraintSet:
    """Zero cells (species, character) where the character may not be persistent."""

    entries: frozenset[tuple[int, int]] = frozenset()

    def __init__(self, entries: Iterable[tuple[int, int]] = ()):
        object.__setattr__(self, "entries", frozenset((int(s), int(c)) for s, c in entries))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(sorted(self.entries))

    def __contains__(self, item: object) -> bool:
        return item in self.entries

    def check(self, m: BinaryMatrix) -> None:
        for s, c in self:
            if not (0 <= s < m.n_species and 0 <= c < m.n_characters):
                raise IndexError(f"constraint ({s}, {c}) outside a {m.shape} matrix")
            if m.cell(s, c) == 1:
                raise ConstraintOnOne(f"constraint ({s}, {c}) names a 1-cell")

    def column_masks(self, n_characters: int) -> list[int]:
        masks = [0] * n_characters
        for s, c in self.entries:
            masks[c] |= 1 << s
        return masks


class PairState(enum.Enum):
    GAINED = "1,0"
    UNKNOWN = "?,?"
    ZERO = "0,0"
    PERSISTENT = "1,1"


class ZeroOrigin(enum.Enum):
    CONSTRAINT = "constraint"
    COMPLETION = "completion"


class ExtendedMatrix:
    """The pair-state matrix obtained by splitting each character into c+/c-.

    State is kept per character as four species masks.  ``gained`` and
    ``constrained`` never change; ``zero`` (which always contains
    ``constrained``) and ``persistent`` grow as pairs get completed.
    """

    __slots__ = ("base", "gained", "constrained", "zero", "persistent")

    def __init__(self, base: BinaryMatrix, constrained: Sequence[int]):
        self.base = base
        self.gained = list(base.column_masks())
        self.constrained = list(constrained)
        self.zero = list(constrained)
        self.persistent = [0] * base.n_characters

    @property
    def n_species(self) -> int:
        return self.base.n_species

    @property
    def n_characters(self) -> int:
        return self.base.n_characters

    def unknown(self, c: int) -> int:
        return self.base.all_species & ~(self.gained[c] | self.zero[c] | self.persistent[c])

    def state(self, s: int, c: int) -> PairState:
        bit = 1 << s
        if self.gained[c] & bit:
            return PairState.GAINED
        if self.persistent[c] & bit:
            return PairState.PERSISTENT
        if self.zero[c] & bit:
            return PairState.ZERO
        return PairState.UNKNOWN

    def origin(self, s: int, c: int) -> ZeroOrigin | None:
        bit = 1 << s
        if self.constrained[c] & bit:
            return ZeroOrigin.CONSTRAINT
        if self.zero[c] & bit:
            return ZeroOrigin.COMPLETION
        return None

    def is_complete(self) -> bool:
        return all(self.unknown(c) == 0 for c in range(self.n_characters))

    def column(self, col: CharacterOp) -> tuple[int, int]:
        """``(ones, zeros)`` masks of a c+ or c- column; ``?`` rows are in neither."""
        c = col.character
        if col.is_gain:
            return self.gained[c] | self.persistent[c], self.zero[c]
        return self.persistent[c], self.gained[c] | self.zero[c]

    def columns(self) -> list[CharacterOp]:
        return [op for c in range(self.n_characters) for op in (CharacterOp.gain(c), CharacterOp.loss(c))]

    def to_array(self) -> np.ndarray:
        """The n x 2m matrix over {0, 1, -1}; -1 stands for ``?``."""
        n, m = self.n_species, self.n_characters
        out = np.full((n, 2 * m), -1, dtype=np.int8)
        for k, col in enumerate(self.columns()):
            ones, zeros = self.column(col)
            for s in bits(ones):
                out[s, k] = 1
            for s in bits(zeros):
                out[s, k] = 0
        return out

    def copy(self) -> "ExtendedMatrix":
        other = ExtendedMatrix.__new__(ExtendedMatrix)
        other.base = self.base
        other.gained = list(self.gained)
        other.constrained = list(self.constrained)
        other.zero = list(self.zero)
        other.persistent = list(self.persistent)
        return other

    def closed(self) -> "ExtendedMatrix":
        """Copy with every remaining ``?`` pair completed to Zero."""
        other = self.copy()
        for c in range(self.n_characters):
            other.zero[c] |= self.unknown(c)
        return other

    def snapshot(self) -> tuple:
        return tuple(self.zero), tuple(self.persistent)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExtendedMatrix):
            return NotImplemented
        return (
            self.base == other.base
            and self.constrained == other.constrained
            and self.zero == other.zero
            and self.persistent == other.persistent
        )

    @classmethod
    def from_persistent_cells(
        cls, base: BinaryMatrix, e: ConstraintSet, persistent: Iterable[tuple[int, int]]
    ) -> "ExtendedMatrix":
        """Complete every ``?`` pair: Persistent for the listed cells, Zero otherwise."""
        me = build_extended(base, e)
        for s, c in persistent:
            if me.state(s, c) is not PairState.UNKNOWN:
                raise ValueError(f"cell ({s}, {c}) is not an open pair")
            me.persistent[c] |= 1 << s
        return me.closed()


def build_extended(m: BinaryMatrix, e: ConstraintSet | None = None) -> ExtendedMatrix:
    e = e or ConstraintSet()
    e.check(m)
    return ExtendedMatrix(m, e.column_masks(m.n_characters))


class ForbiddenWitness(NamedTuple):
    first: CharacterOp
    second: CharacterOp
    species: tuple[int, int, int]  # rows showing (1,1), (1,0), (0,1)


def _pair_witness(a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int, int] | None:
    a1, a0 = a
    b1, b0 = b
    both = a1 & b1
    if not both:
        return None
    only_a = a1 & b0
    if not only_a:
        return None
    only_b = a0 & b1
    if not only_b:
        return None
    return lowest_bit(both), lowest_bit(only_a), lowest_bit(only_b)


def forbidden_pair_witness(
    me: ExtendedMatrix, characters: Iterable[int] | None = None
) -> ForbiddenWitness | None:
    """Find two columns of the extended matrix showing (1,1), (1,0) and (0,1).

    Rows with ``?`` in either column are ignored.  With ``characters`` only
    pairs involving a column of one of those characters are examined.
    """
    cols = me.columns()
    data = [me.column(col) for col in cols]
    if characters is None:
        for i in range(len(cols)):
            for j in range(i + 1, len(cols)):
                w = _pair_witness(data[i], data[j])
                if w is not None:
                    return ForbiddenWitness(cols[i], cols[j], w)
        return None
    focus = sorted(set(characters))
    for c in focus:
        for i in (2 * c, 2 * c + 1):
            for j in range(len(cols)):
                if j == i:
                    continue
                w = _pair_witness(data[i], data[j])
                if w is not None:
                    if j < i:
                        return ForbiddenWitness(cols[j], cols[i], _pair_witness(data[j], data[i]))
                    return ForbiddenWitness(cols[i], cols[j], w)
    return None


@dataclass
class PreprocessReport:
    """How a preprocessed instance maps back onto the original one.

    ``kept_species[i]`` is the original index of preprocessed species ``i``
    (same for characters).  Duplicates are ``(removed, twin)`` pairs of
    original indices; the twin is always kept.
    """

    kept_species: list[int] = field(default_factory=list)
    kept_characters: list[int] = field(default_factory=list)
    duplicate_species: list[tuple[int, int]] = field(default_factory=list)
    duplicate_characters: list[tuple[int, int]] = field(default_factory=list)
    removed_void: list[int] = field(default_factory=list)

    @property
    def removed_duplicates(self) -> list[tuple[str, int, int]]:
        return [("species", r, t) for r, t in self.duplicate_species] + [
            ("character", r, t) for r, t in self.duplicate_characters
        ]

    @property
    def is_identity(self) -> bool:
        return not (self.duplicate_species or self.duplicate_characters or self.removed_void)

    def compose(self, inner: "PreprocessReport") -> "PreprocessReport":
        """Report of running ``inner`` on the output described by ``self``."""
        ks, kc = self.kept_species, self.kept_characters
        return PreprocessReport(
            [ks[i] for i in inner.kept_species],
            [kc[i] for i in inner.kept_characters],
            self.duplicate_species + [(ks[r], ks[t]) for r, t in inner.duplicate_species],
            self.duplicate_characters + [(kc[r], kc[t]) for r, t in inner.duplicate_characters],
            self.removed_void + [kc[i] for i in inner.removed_void],
        )


def preprocess(
    m: BinaryMatrix, e: ConstraintSet | None = None
) -> tuple[BinaryMatrix, ConstraintSet, PreprocessReport]:
    """Drop void characters, then duplicate species, then duplicate characters.

    Two rows (columns) are merged only when their constraint entries agree
    as well; the first occurrence is kept.
    """
    e = e or ConstraintSet()
    e.check(m)
    n, k = m.shape
    report = PreprocessReport()
    cols = m.column_masks()
    chars = []
    for c in range(k):
        if cols[c] == 0:
            report.removed_void.append(c)
        else:
            chars.append(c)
    char_set = set(chars)

    seen: dict[tuple, int] = {}
    species = []
    for s in range(n):
        key = (
            tuple(m.cell(s, c) for c in chars),
            tuple(sorted(c for (t, c) in e.entries if t == s and c in char_set)),
        )
        if key in seen:
            report.duplicate_species.append((s, seen[key]))
        else:
            seen[key] = s
            species.append(s)
    species_set = set(species)

    seen = {}
    kept_chars = []
    for c in chars:
        key = (
            tuple(m.cell(s, c) for s in species),
            tuple(sorted(s for (s, d) in e.entries if d == c and s in species_set)),
        )
        if key in seen:
            report.duplicate_characters.append((c, seen[key]))
        else:
            seen[key] = c
            kept_chars.append(c)

    report.kept_species = species
    report.kept_characters = kept_chars
    sp_index = {s: i for i, s in enumerate(species)}
    ch_index = {c: j for j, c in enumerate(kept_chars)}
    sub = m.submatrix(species, kept_chars)
    sub_e = ConstraintSet(
        (sp_index[s], ch_index[c]) for s, c in e.entries if s in sp_index and c in ch_index
    )
    return sub, sub_e, report
