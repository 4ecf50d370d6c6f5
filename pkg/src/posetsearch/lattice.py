"""Lattices, join-irreducible codes and matryoshka chains.

Every element ``x`` of a finite lattice gets a bit vector over the
join-irreducible elements (bit ``i`` set iff the ``i``-th join-irreducible is
``<= x``).  Order between lattice elements is then plain bit inclusion.
Repeatedly restricting a lattice to its join-irreducibles plus top and
bottom gives a shrinking chain of posets; when every one of them is again a
lattice the chain ends in a level whose Hasse diagram minus the top is a tree.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator, Sequence

import numpy as np

from .poset import Poset, PosetError, bits, build_from_pairs


class NotLattice(PosetError):
    def __init__(self, x, y, reason):
        self.witness = (x, y, reason)
        super().__init__(f"not a lattice: pair ({x}, {y}) {reason}")


class NotMatryoshka(PosetError):
    def __init__(self, level, cause: NotLattice):
        self.level = level
        self.cause = cause
        self.witness = cause.witness
        super().__init__(f"level {level} is not a lattice: pair {cause.witness[:2]} {cause.witness[2]}")


class NotATree(PosetError):
    pass


def _leq_matrix(p: Poset) -> np.ndarray:
    """``m[a, b]`` is ``a <= b``, 0-based."""
    n = p.n
    m = np.zeros((n, n), dtype=bool)
    for b in p:
        for a in bits(p.down_mask(b)):
            m[a - 1, b - 1] = True
    return m


def _bound_table(within: np.ndarray):
    """Least element of every pairwise bound set.

    ``within[a, b]`` says ``a`` lies in the bound direction from ``b``
    (``a >= b`` for joins).  Returns (table, ok) with 0-based entries.
    """
    n = within.shape[0]
    # a least bound is the member dominated by every other member: the one
    # with the most elements beyond it
    reach = within.sum(axis=0)
    table = np.zeros((n, n), dtype=np.int64)
    ok = np.zeros((n, n), dtype=bool)
    for x in range(n):
        bound_sets = within[:, x][None, :] & within.T  # row y: bounds of {x, y}
        scored = np.where(bound_sets, reach[None, :], -1)
        cand = scored.argmax(axis=1)
        nonempty = bound_sets.any(axis=1)
        # every member of the bound set must lie beyond the candidate
        covered = ~bound_sets | within[:, cand].T
        ok[x] = nonempty & covered.all(axis=1)
        table[x] = cand
    return table, ok


@dataclass(frozen=True, eq=False)
class Lattice:
    base: Poset
    meets: np.ndarray
    joins: np.ndarray

    @property
    def n(self):
        return self.base.n

    @property
    def top(self):
        return self.base.top

    @property
    def bottom(self):
        return self.base.bottom

    def meet(self, x: int, y: int) -> int:
        self.base._check(x)
        self.base._check(y)
        return int(self.meets[x - 1, y - 1]) + 1

    def join(self, x: int, y: int) -> int:
        self.base._check(x)
        self.base._check(y)
        return int(self.joins[x - 1, y - 1]) + 1


def check_lattice(p: Poset) -> Lattice:
    """Return the lattice structure of ``p`` or raise :class:`NotLattice`.

    The witness is the first failing pair in index order; joins are checked
    before meets.
    """
    leq = _leq_matrix(p)
    joins, join_ok = _bound_table(leq.T.copy())  # within[a, b] = a >= b
    meets, meet_ok = _bound_table(leq.copy())  # within[a, b] = a <= b
    if not (join_ok.all() and meet_ok.all()):
        for x, y in combinations(range(1, p.n + 1), 2):
            if not join_ok[x - 1, y - 1]:
                raise NotLattice(x, y, _describe(p, x, y, upper=True))
            if not meet_ok[x - 1, y - 1]:
                raise NotLattice(x, y, _describe(p, x, y, upper=False))
    return Lattice(p, meets, joins)


def _describe(p, x, y, upper):
    if upper:
        common = p.up_mask(x) & p.up_mask(y)
        extreme = p.minimal(common)
        what, which = "join", "minimal upper"
    else:
        common = p.down_mask(x) & p.down_mask(y)
        extreme = p.maximal(common)
        what, which = "meet", "maximal lower"
    if not common:
        return f"has no {'upper' if upper else 'lower'} bound, no {what}"
    return f"has {which} bounds {{{','.join(map(str, extreme))}}}, no unique {what}"


def is_lattice(p: Poset) -> bool:
    try:
        check_lattice(p)
    except NotLattice:
        return False
    return True


def join_irreducibles(l: Lattice | Poset) -> tuple:
    """Elements with exactly one child, ascending."""
    p = l.base if isinstance(l, Lattice) else l
    return tuple(x for x in p if p.outdeg(x) == 1)


@dataclass(frozen=True)
class BinaryCode:
    """Bit vector over a join-irreducible enumeration; bit 0 prints first."""

    bits: int
    width: int

    def __le__(self, other: "BinaryCode") -> bool:
        return self.bits & ~other.bits == 0

    def __lt__(self, other):
        return self <= other and self.bits != other.bits

    def __str__(self):
        return "".join("1" if self.bits >> i & 1 else "0" for i in range(self.width))

    def __getitem__(self, i):
        return bool(self.bits >> i & 1)

    @classmethod
    def from_flags(cls, flags: Sequence[bool]) -> "BinaryCode":
        b = 0
        for i, f in enumerate(flags):
            if f:
                b |= 1 << i
        return cls(b, len(flags))


def assign_codes(l: Lattice | Poset, ji: Sequence[int] | None = None) -> dict:
    p = l.base if isinstance(l, Lattice) else l
    ji = join_irreducibles(p) if ji is None else tuple(ji)
    codes = {}
    for x in p:
        down = p.down_mask(x)
        codes[x] = BinaryCode.from_flags([bool(down >> j & 1) for j in ji])
    return codes


@dataclass(frozen=True)
class Reduction:
    poset: Poset
    embed: tuple  # embed[i - 1] = element of the source lattice


def reduce(l: Lattice | Poset) -> Reduction:
    """Subposet on the join-irreducibles plus top and bottom, in index order."""
    p = l.base if isinstance(l, Lattice) else l
    keep = set(join_irreducibles(p))
    keep.update(e for e in (p.top, p.bottom) if e is not None)
    elements = tuple(sorted(keep))
    return Reduction(p.induced(elements), elements)


def is_terminal(l: Lattice | Poset) -> bool:
    p = l.base if isinstance(l, Lattice) else l
    return all(p.outdeg(x) == 1 or x in (p.top, p.bottom) for x in p)


def tree_like(p: Poset) -> bool:
    """Every element but the bottom has exactly one child."""
    if p.bottom is None:
        return False
    return all(x == p.bottom or p.outdeg(x) == 1 for x in p)


def remove_top(p: Poset) -> Reduction:
    elements = tuple(x for x in p if x != p.top)
    return Reduction(p.induced(elements), elements)


@dataclass
class MatryoshkaChain:
    levels: list  # Lattice per level, L_0 first
    embeds: list  # embeds[i][j - 1]: element of L_i for element j of L_{i+1}
    ji: list  # canonical join-irreducible enumeration per level
    codes: list  # codes[i][x] for x in L_i
    tree: Reduction = field(default=None)

    @property
    def t(self) -> int:
        return len(self.levels) - 1

    @property
    def sizes(self) -> list:
        return [lv.n for lv in self.levels]

    def lift(self, level: int, x: int) -> int:
        """Element of L_level corresponding to element ``x`` of L_{level+1}."""
        return self.embeds[level][x - 1]


def build_chain(l: Lattice | Poset) -> MatryoshkaChain:
    lat = l if isinstance(l, Lattice) else check_lattice(l)
    if lat.n < 2:
        raise PosetError("chain construction needs top != bottom")
    levels = [lat]
    embeds = []
    while not is_terminal(levels[-1]):
        red = reduce(levels[-1])
        try:
            nxt = check_lattice(red.poset)
        except NotLattice as err:
            raise NotMatryoshka(len(levels), err) from None
        levels.append(nxt)
        embeds.append(red.embed)
    ji = [join_irreducibles(lv) for lv in levels]
    codes = [assign_codes(lv, j) for lv, j in zip(levels, ji)]
    last = levels[-1].base
    # keep the top in the tree when it is itself join-irreducible
    tree = Reduction(last, tuple(last)) if last.outdeg(last.top) == 1 else remove_top(last)
    return MatryoshkaChain(levels, embeds, ji, codes, tree)


def is_matryoshka(p: Poset) -> bool:
    try:
        build_chain(p)
    except (NotLattice, NotMatryoshka):
        return False
    return True


def small_lattices(max_size: int) -> Iterator[Poset]:
    """All lattices with ``3 <= n <= max_size`` elements, up to labelling.

    Interior elements ``2..n-1`` are enumerated as naturally labelled DAGs
    (edges go from smaller to larger index), top is 1 and bottom is n; the
    output is deduplicated by isomorphism.
    """
    from .poset import is_isomorphic

    for n in range(3, max_size + 1):
        inner = list(range(2, n))
        slots = list(combinations(inner, 2))
        seen: dict = {}
        for mask in range(1 << len(slots)):
            pairs = [s for i, s in enumerate(slots) if mask >> i & 1]
            pairs += [(1, x) for x in inner] + [(x, n) for x in inner]
            if not inner:
                pairs = [(1, n)]
            p = build_from_pairs(n, pairs)
            if not is_lattice(p):
                continue
            key = tuple(sorted(p.desc_mask(x).bit_count() for x in p)), len(p.cover_edges)
            bucket = seen.setdefault(key, [])
            if any(is_isomorphic(p, q) for q in bucket):
                continue
            bucket.append(p)
            yield p


def find_nonmatryoshka(max_size: int = 8) -> Poset | None:
    """Smallest lattice whose join-irreducible reduction is not a lattice."""
    for p in small_lattices(max_size):
        try:
            build_chain(p)
        except NotMatryoshka:
            return p
    return None
