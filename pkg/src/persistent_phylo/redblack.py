"""Red-black graph: species/character bipartite graph driven by realizations.

Adjacency is stored per character as a species mask (``black`` or
``red``; a character's edges are always of a single colour).  Every
mutation goes through :func:`realize`, which returns a journal that
:func:`undo` replays backwards.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .matrix import CharacterOp, ExtendedMatrix, Sign, bits, lowest_bit


class CharState(enum.IntEnum):
    INACTIVE = 0
    ACTIVE = 1
    FREE = 2


class RealizationError(ValueError):
    def __init__(self, character: int, message: str):
        super().__init__(message)
        self.character = character


class ImpossibleFree(RealizationError):
    pass


class ImpossibleActiveNotSaturated(RealizationError):
    pass


class ImpossibleConstrained(RealizationError):
    pass


class JournalMismatch(RuntimeError):
    pass


class InvalidReduction(ValueError):
    pass


class ReductionFailed(RuntimeError):
    def __init__(self, index: int, op: CharacterOp, cause: Exception):
        super().__init__(f"operation {index} ({op!r}) failed: {cause}")
        self.index = index
        self.op = op
        self.cause = cause


@dataclass(frozen=True)
class CReduction:
    """An ordered sequence of signed characters.

    Each character is gained at most once and lost at most once, and a
    loss always comes after the matching gain.
    """

    ops: tuple[CharacterOp, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(CharacterOp(c, Sign(s)) for c, s in self.ops))
        gained, lost = set(), set()
        for op in self.ops:
            c = op.character
            if op.is_gain:
                if c in gained:
                    raise InvalidReduction(f"c{c + 1} gained twice")
                gained.add(c)
            else:
                if c not in gained:
                    raise InvalidReduction(f"loss of c{c + 1} before its gain")
                if c in lost:
                    raise InvalidReduction(f"c{c + 1} lost twice")
                lost.add(c)

    def __len__(self) -> int:
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    @property
    def losses(self) -> list[CharacterOp]:
        return [op for op in self.ops if not op.is_gain]

    def labels(self, names: Sequence[str] | None = None) -> list[str]:
        return [op.label(names) for op in self.ops]


class Journal(NamedTuple):
    serial: int
    op: CharacterOp
    saved: tuple  # state, black, red, zero, persistent of the character


class Component(NamedTuple):
    species: frozenset[int]
    characters: frozenset[int]
    species_mask: int


class SigmaPath(NamedTuple):
    """Induced red path s1 - c1 - s2 - c2 - s3."""

    s1: int
    c1: int
    s2: int
    c2: int
    s3: int


class RedBlackGraph:
    def __init__(self, me: ExtendedMatrix):
        self.extended = me
        self.n_species = me.n_species
        self.n_characters = me.n_characters
        self.state = [CharState.INACTIVE] * self.n_characters
        # a completed pair is not black: only Gained cells of inactive characters
        self.black = [me.gained[c] for c in range(self.n_characters)]
        self.red = [0] * self.n_characters
        self._stack: list[Journal] = []
        self._serial = 0

    # -- queries -----------------------------------------------------------

    def adjacent(self, c: int) -> int:
        return self.black[c] | self.red[c]

    def degree(self, c: int) -> int:
        return bin(self.black[c] | self.red[c]).count("1")

    def n_edges(self) -> int:
        return sum(self.degree(c) for c in range(self.n_characters))

    def is_edgeless(self) -> bool:
        return not any(self.black) and not any(self.red)

    def edges(self) -> list[tuple[int, int, str]]:
        out = []
        for c in range(self.n_characters):
            for s in bits(self.black[c]):
                out.append((s, c, "black"))
            for s in bits(self.red[c]):
                out.append((s, c, "red"))
        out.sort()
        return out

    def component_of(self, c: int, scope: Iterable[int] | None = None) -> tuple[int, set[int]]:
        """Species mask and character set of the component containing ``c``."""
        species = self.black[c] | self.red[c]
        chars = {c}
        if not species:
            return 0, chars
        pool = [d for d in (range(self.n_characters) if scope is None else scope)
                if d != c and (self.black[d] or self.red[d])]
        grown = True
        while grown:
            grown = False
            rest = []
            for d in pool:
                nd = self.black[d] | self.red[d]
                if nd & species:
                    species |= nd
                    chars.add(d)
                    grown = True
                else:
                    rest.append(d)
            pool = rest
        return species, chars

    def components(self, scope: Iterable[int] | None = None) -> list[Component]:
        """Components with at least one edge, ordered by smallest character."""
        chars = sorted(range(self.n_characters) if scope is None else scope)
        chars = [c for c in chars if self.black[c] or self.red[c]]
        seen: set[int] = set()
        out = []
        for c in chars:
            if c in seen:
                continue
            species, members = self.component_of(c, chars)
            seen |= members
            out.append(Component(frozenset(bits(species)), frozenset(members), species))
        return out

    def isolated_species(self) -> list[int]:
        covered = 0
        for c in range(self.n_characters):
            covered |= self.black[c] | self.red[c]
        return [s for s in range(self.n_species) if not covered >> s & 1]

    def free_characters(self) -> list[int]:
        return [c for c in range(self.n_characters) if self.state[c] is CharState.FREE]

    def is_saturated(self, c: int) -> bool:
        """Active and red-adjacent to every species of its component."""
        if self.state[c] is not CharState.ACTIVE:
            return False
        species, _ = self.component_of(c)
        return species & ~self.red[c] == 0

    def can_realize(self, c: int) -> bool:
        st = self.state[c]
        if st is CharState.INACTIVE:
            species, _ = self.component_of(c)
            return not (self.extended.zero[c] & species)
        if st is CharState.ACTIVE:
            return self.is_saturated(c)
        return False

    def next_op(self, c: int) -> CharacterOp:
        st = self.state[c]
        if st is CharState.INACTIVE:
            return CharacterOp.gain(c)
        if st is CharState.ACTIVE:
            return CharacterOp.loss(c)
        raise ImpossibleFree(c, f"c{c + 1} is free")

    def key(self, chars: Iterable[int]) -> tuple:
        return tuple((c, int(self.state[c]), self.black[c] | self.red[c]) for c in sorted(chars))

    # -- journal -----------------------------------------------------------

    def checkpoint(self) -> int:
        return len(self._stack)

    def rollback(self, mark: int) -> None:
        while len(self._stack) > mark:
            undo(self, self._stack[-1])

    @property
    def history(self) -> list[CharacterOp]:
        return [j.op for j in self._stack]

    def _save(self, c: int) -> tuple:
        me = self.extended
        return self.state[c], self.black[c], self.red[c], me.zero[c], me.persistent[c]

    def _push(self, op: CharacterOp, saved: tuple) -> Journal:
        self._serial += 1
        j = Journal(self._serial, op, saved)
        self._stack.append(j)
        return j


def build_red_black(me: ExtendedMatrix) -> RedBlackGraph:
    return RedBlackGraph(me)


class Realization(NamedTuple):
    op: CharacterOp
    journal: Journal


def realize(g: RedBlackGraph, c: int) -> Realization:
    """Gain an inactive character or lose an active one, completing the matrix."""
    st = g.state[c]
    me = g.extended
    if st is CharState.FREE:
        raise ImpossibleFree(c, f"c{c + 1} is free")
    species, _ = g.component_of(c)
    if st is CharState.INACTIVE:
        blocked = me.zero[c] & species
        if blocked:
            raise ImpossibleConstrained(
                c, f"c{c + 1} cannot be persistent in s{lowest_bit(blocked) + 1}"
            )
        saved = g._save(c)
        new_red = species & ~me.gained[c]
        me.persistent[c] |= new_red
        me.zero[c] |= me.unknown(c)
        g.red[c] = new_red
        g.black[c] = 0
        g.state[c] = CharState.ACTIVE
        op = CharacterOp.gain(c)
    else:
        missing = species & ~g.red[c]
        if missing:
            raise ImpossibleActiveNotSaturated(
                c, f"c{c + 1} has no red edge to s{lowest_bit(missing) + 1}"
            )
        saved = g._save(c)
        g.red[c] = 0
        g.state[c] = CharState.FREE
        op = CharacterOp.loss(c)
    return Realization(op, g._push(op, saved))


def undo(g: RedBlackGraph, journal: Journal) -> None:
    if not g._stack or g._stack[-1] is not journal:
        raise JournalMismatch("journal is not the most recent realization")
    g._stack.pop()
    c = journal.op.character
    state, black, red, zero, persistent = journal.saved
    g.state[c] = state
    g.black[c] = black
    g.red[c] = red
    g.extended.zero[c] = zero
    g.extended.persistent[c] = persistent


def detect_red_sigma(g: RedBlackGraph, characters: Iterable[int] | None = None) -> SigmaPath | None:
    """Look for an induced path of four red edges starting at a species.

    Both path characters are active, hence all their edges are red, and the
    path is induced exactly when each end species misses the far character.
    With ``characters`` only paths through one of them are considered.
    """
    active = [c for c in range(g.n_characters) if g.red[c]]
    focus = active if characters is None else [c for c in characters if g.red[c]]
    for a in focus:
        ra = g.red[a]
        for b in active:
            if b == a:
                continue
            rb = g.red[b]
            mid = ra & rb
            if not mid:
                continue
            left = ra & ~(rb | g.black[b])
            right = rb & ~(ra | g.black[a])
            if left and right:
                c1, c2 = (a, b) if a < b else (b, a)
                l, r = (left, right) if a < b else (right, left)
                return SigmaPath(lowest_bit(l), c1, lowest_bit(mid), c2, lowest_bit(r))
    return None


def connected_components(g: RedBlackGraph) -> list[Component]:
    return g.components()


def apply_reduction(g: RedBlackGraph, r: CReduction | Sequence[CharacterOp]) -> bool:
    """Realize the operations in order; True when the graph ends edgeless."""
    if not isinstance(r, CReduction):
        r = CReduction(tuple(r))
    for i, op in enumerate(r):
        try:
            expected = g.next_op(op.character)
            if expected != op:
                raise InvalidReduction(f"{op!r} does not match the state of c{op.character + 1}")
            realize(g, op.character)
        except (RealizationError, InvalidReduction) as err:
            raise ReductionFailed(i, op, err) from err
    return g.is_edgeless()


def dump_edges(g: RedBlackGraph) -> str:
    return "".join(f"s{s + 1} c{c + 1} {colour}\n" for s, c, colour in g.edges())
