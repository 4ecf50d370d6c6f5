"""Finite posets over dense indices ``1..n``.

The strict order is held as one Python-int bitset per element: bit ``j`` of
``desc[i]`` is set when ``j < i``.  Cover edges (the Hasse diagram) are the
transitive reduction of that relation and are always recomputed from it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence


class PosetError(ValueError):
    pass


class CycleDetected(PosetError):
    def __init__(self, cycle: Sequence[int]):
        self.cycle = tuple(cycle)
        super().__init__("order relation has a cycle: " + " > ".join(map(str, self.cycle)))


class IndexOutOfRange(PosetError):
    def __init__(self, index, n):
        self.index = index
        self.n = n
        super().__init__(f"element {index} is outside 1..{n}")


class ParseError(PosetError):
    def __init__(self, msg, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            msg = f"line {lineno}: {msg}"
        super().__init__(msg)


def bits(mask: int) -> Iterator[int]:
    """Yield the set bit positions of ``mask`` in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(items: Iterable[int]) -> int:
    m = 0
    for i in items:
        m |= 1 << i
    return m


@dataclass(frozen=True)
class RelativeSets:
    ancestors: frozenset
    descendants: frozenset
    parents: frozenset
    children: frozenset

    @property
    def indeg(self) -> int:
        return len(self.parents)

    @property
    def outdeg(self) -> int:
        return len(self.children)


@dataclass(frozen=True)
class DescendantList:
    """Children first (``outdeg`` of them), then the deeper descendants.

    The same layout serves the ancestor list, with parents in front.
    """

    outdeg: int
    entries: tuple

    @property
    def children(self) -> tuple:
        return self.entries[: self.outdeg]

    @property
    def rest(self) -> tuple:
        return self.entries[self.outdeg :]

    def __len__(self):
        return len(self.entries)

    def __str__(self):
        head = ",".join(map(str, self.children))
        tail = ",".join(map(str, self.rest))
        return f"({self.outdeg}; {head} | {tail})"


class Poset:
    """Immutable finite poset on ``1..n``.

    Build with :func:`build_from_pairs` (or :meth:`Poset.from_pairs`); the
    constructor expects an already-closed, acyclic ``desc`` table.
    """

    def __init__(self, n: int, desc: Sequence[int], names: Sequence[str] | None = None):
        self.n = n
        # index 0 unused so element ids can be used directly
        self._desc = tuple(desc)
        anc = [0] * (n + 1)
        for x in range(1, n + 1):
            for y in bits(self._desc[x]):
                anc[y] |= 1 << x
        self._anc = tuple(anc)
        self._children = tuple(self._covers(self._desc, x) for x in range(n + 1))
        par = [0] * (n + 1)
        for x in range(1, n + 1):
            for c in bits(self._children[x]):
                par[c] |= 1 << x
        self._parents = tuple(par)
        self.all_mask = ((1 << (n + 1)) - 1) & ~1
        self.top = self._extreme(self._desc)
        self.bottom = self._extreme(self._anc)
        if names is not None:
            if len(names) != n:
                raise PosetError(f"expected {n} names, got {len(names)}")
            self.names = tuple(names)
            self._index = {name: i for i, name in enumerate(self.names, 1)}
            if len(self._index) != n:
                raise PosetError("element names must be unique")
        else:
            self.names = None
            self._index = None

    @staticmethod
    def _covers(desc, x):
        if x == 0:
            return 0
        below = desc[x]
        deeper = 0
        for d in bits(below):
            deeper |= desc[d]
        return below & ~deeper

    def _extreme(self, rel):
        for x in range(1, self.n + 1):
            if rel[x] | (1 << x) == self.all_mask:
                return x
        return None

    @classmethod
    def from_pairs(cls, n, pairs, names=None):
        return build_from_pairs(n, pairs, names=names)

    def _check(self, x):
        if not isinstance(x, int) or not 1 <= x <= self.n:
            raise IndexOutOfRange(x, self.n)

    def __len__(self):
        return self.n

    def __iter__(self):
        return iter(range(1, self.n + 1))

    def __repr__(self):
        return f"Poset(n={self.n}, covers={len(self.cover_edges)})"

    def __eq__(self, other):
        return isinstance(other, Poset) and self.n == other.n and self._desc == other._desc

    def __hash__(self):
        return hash((self.n, self._desc))

    # order queries

    def is_leq(self, x: int, y: int) -> bool:
        self._check(x)
        self._check(y)
        return x == y or bool(self._desc[y] >> x & 1)

    def is_lt(self, x: int, y: int) -> bool:
        self._check(x)
        self._check(y)
        return bool(self._desc[y] >> x & 1)

    def comparable(self, x, y):
        return self.is_leq(x, y) or self.is_leq(y, x)

    # bitset views, used by the search code

    def desc_mask(self, x: int) -> int:
        return self._desc[x]

    def anc_mask(self, x: int) -> int:
        return self._anc[x]

    def children_mask(self, x: int) -> int:
        return self._children[x]

    def parents_mask(self, x: int) -> int:
        return self._parents[x]

    def up_mask(self, x: int) -> int:
        return self._anc[x] | 1 << x

    def down_mask(self, x: int) -> int:
        return self._desc[x] | 1 << x

    def descendants(self, x: int) -> frozenset:
        self._check(x)
        return frozenset(bits(self._desc[x]))

    def ancestors(self, x: int) -> frozenset:
        self._check(x)
        return frozenset(bits(self._anc[x]))

    def children(self, x: int) -> tuple:
        self._check(x)
        return tuple(bits(self._children[x]))

    def parents(self, x: int) -> tuple:
        self._check(x)
        return tuple(bits(self._parents[x]))

    def outdeg(self, x: int) -> int:
        self._check(x)
        return self._children[x].bit_count()

    def indeg(self, x: int) -> int:
        self._check(x)
        return self._parents[x].bit_count()

    def relatives(self, x: int) -> RelativeSets:
        self._check(x)
        return RelativeSets(
            ancestors=frozenset(bits(self._anc[x])),
            descendants=frozenset(bits(self._desc[x])),
            parents=frozenset(bits(self._parents[x])),
            children=frozenset(bits(self._children[x])),
        )

    def descendant_list(self, x: int) -> DescendantList:
        self._check(x)
        kids = self._children[x]
        return DescendantList(
            kids.bit_count(),
            tuple(bits(kids)) + tuple(bits(self._desc[x] & ~kids)),
        )

    def ancestor_list(self, x: int) -> DescendantList:
        self._check(x)
        par = self._parents[x]
        return DescendantList(
            par.bit_count(),
            tuple(bits(par)) + tuple(bits(self._anc[x] & ~par)),
        )

    @property
    def cover_edges(self) -> frozenset:
        return frozenset((x, c) for x in range(1, self.n + 1) for c in bits(self._children[x]))

    def strict_pairs(self) -> Iterator[tuple]:
        """All ``(a, b)`` with ``a > b``."""
        for a in range(1, self.n + 1):
            for b in bits(self._desc[a]):
                yield a, b

    def maximal(self, mask: int) -> list:
        """Maximal elements of the subset encoded by ``mask``."""
        return [x for x in bits(mask) if not self._anc[x] & mask]

    def minimal(self, mask: int) -> list:
        return [x for x in bits(mask) if not self._desc[x] & mask]

    def index_of(self, name: str) -> int:
        if self._index is None or name not in self._index:
            raise KeyError(name)
        return self._index[name]

    def name_of(self, x: int) -> str:
        self._check(x)
        return self.names[x - 1] if self.names else str(x)

    def induced(self, elements: Sequence[int]) -> "Poset":
        """Subposet on ``elements``, reindexed densely in the given order."""
        index = {e: i for i, e in enumerate(elements, 1)}
        pairs = [
            (index[a], index[b])
            for a in elements
            for b in bits(self._desc[a])
            if b in index
        ]
        names = [self.name_of(e) for e in elements] if self.names else None
        return build_from_pairs(len(elements), pairs, names=names)

    def relabel(self, perm: Sequence[int]) -> "Poset":
        """Rename element ``x`` to ``perm[x - 1]``."""
        pairs = [(perm[a - 1], perm[b - 1]) for a, b in self.strict_pairs()]
        return build_from_pairs(self.n, pairs)

    def dual(self) -> "Poset":
        return build_from_pairs(self.n, [(b, a) for a, b in self.strict_pairs()], names=self.names)


def build_from_pairs(n: int, pairs: Iterable[tuple], names: Sequence[str] | None = None) -> Poset:
    """Close ``pairs`` (each meaning ``first > second``) into a poset on ``1..n``."""
    if not isinstance(n, int) or n < 1:
        raise PosetError(f"poset needs at least one element, got n={n!r}")
    succ = [0] * (n + 1)
    for a, b in pairs:
        for v in (a, b):
            if not isinstance(v, int) or not 1 <= v <= n:
                raise IndexOutOfRange(v, n)
        if a == b:
            raise CycleDetected((a, a))
        succ[a] |= 1 << b

    order = _topological(n, succ)
    desc = [0] * (n + 1)
    # reverse topological order: successors are finished first
    for x in reversed(order):
        d = 0
        for s in bits(succ[x]):
            d |= desc[s] | (1 << s)
        desc[x] = d
    return Poset(n, desc, names=names)


def _topological(n, succ):
    indeg = [0] * (n + 1)
    for a in range(1, n + 1):
        for b in bits(succ[a]):
            indeg[b] += 1
    ready = [x for x in range(n, 0, -1) if indeg[x] == 0]
    order = []
    while ready:
        x = ready.pop()
        order.append(x)
        for b in bits(succ[x]):
            indeg[b] -= 1
            if indeg[b] == 0:
                ready.append(b)
    if len(order) < n:
        raise CycleDetected(_find_cycle(n, succ, set(order)))
    return order


def _find_cycle(n, succ, acyclic):
    stuck = [x for x in range(1, n + 1) if x not in acyclic]
    # every stuck element has a stuck successor, so walking must revisit
    seen = {}
    path = []
    x = stuck[0]
    while x not in seen:
        seen[x] = len(path)
        path.append(x)
        x = next(b for b in bits(succ[x]) if b not in acyclic)
    return path[seen[x]:] + [x]


# text format


def parse_poset(text: str) -> Poset:
    """Parse the ``poset <n>`` / ``gt <a> <b>`` line format."""
    n = None
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if n is None:
            if fields[0] != "poset" or len(fields) != 2:
                raise ParseError("expected header 'poset <n>'", lineno)
            n = _int(fields[1], lineno)
            if n < 1:
                raise ParseError("element count must be positive", lineno)
            continue
        if fields[0] != "gt" or len(fields) != 3:
            raise ParseError(f"expected 'gt <a> <b>', got {line!r}", lineno)
        a, b = _int(fields[1], lineno), _int(fields[2], lineno)
        for v in (a, b):
            if not 1 <= v <= n:
                raise ParseError(f"element {v} outside 1..{n}", lineno)
        pairs.append((a, b))
    if n is None:
        raise ParseError("missing 'poset <n>' header")
    return build_from_pairs(n, pairs)


def _int(tok, lineno):
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"not an integer: {tok!r}", lineno) from None


def format_poset(p: Poset, comment: str | None = None) -> str:
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines.append(f"poset {p.n}")
    lines.extend(f"gt {a} {b}" for a, b in sorted(p.cover_edges))
    return "\n".join(lines) + "\n"


def is_isomorphic(p: Poset, q: Poset) -> bool:
    """Order isomorphism by backtracking; meant for small posets."""
    if p.n != q.n or len(p.cover_edges) != len(q.cover_edges):
        return False

    def sig(P, x):
        return (P.desc_mask(x).bit_count(), P.anc_mask(x).bit_count(), P.outdeg(x), P.indeg(x))

    sp = {x: sig(p, x) for x in p}
    sq = {y: sig(q, y) for y in q}
    if sorted(sp.values()) != sorted(sq.values()):
        return False
    order = sorted(p, key=lambda x: -p.desc_mask(x).bit_count())
    image = {}
    used = set()

    def extend(i):
        if i == len(order):
            return True
        x = order[i]
        for y in q:
            if y in used or sq[y] != sp[x]:
                continue
            if all(p.is_leq(x, a) == q.is_leq(y, b) and p.is_leq(a, x) == q.is_leq(b, y) for a, b in image.items()):
                image[x] = y
                used.add(y)
                if extend(i + 1):
                    return True
                del image[x]
                used.discard(y)
        return False

    return extend(0)
