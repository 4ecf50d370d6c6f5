"""Poset and lattice generators.

All generated search datasets number the top 1 and the bottom n.
"""
from __future__ import annotations

import random
from itertools import product

from .poset import Poset, PosetError, build_from_pairs


class BadParams(PosetError):
    pass


def chain(n: int) -> Poset:
    if n < 1:
        raise BadParams("chain length must be >= 1")
    return build_from_pairs(n, [(i, i + 1) for i in range(1, n)])


def star(k: int) -> Poset:
    """Top, ``k`` pairwise incomparable atoms, bottom (the lattice M_k)."""
    if k < 1:
        raise BadParams("star needs at least one atom")
    n = k + 2
    pairs = [(1, a) for a in range(2, n)] + [(a, n) for a in range(2, n)]
    return build_from_pairs(n, pairs)


def boolean(k: int) -> Poset:
    """Subsets of a k-set by inclusion: 1 is the full set, 2**k the empty set."""
    if k < 1:
        raise BadParams("boolean lattice needs k >= 1")
    size = 1 << k
    full = size - 1
    pairs = []
    for s in range(size):
        for i in range(k):
            if s >> i & 1:
                pairs.append((full - s + 1, full - (s & ~(1 << i)) + 1))
    return build_from_pairs(size, pairs)


def grid(*dims: int) -> Poset:
    """Product of chains of the given lengths; 1 is the top."""
    if not dims or any(d < 1 for d in dims):
        raise BadParams("grid dimensions must be >= 1")
    points = sorted(product(*(range(d) for d in dims)), reverse=True)
    index = {pt: i for i, pt in enumerate(points, 1)}
    pairs = []
    for pt in points:
        for axis in range(len(dims)):
            if pt[axis] > 0:
                lower = pt[:axis] + (pt[axis] - 1,) + pt[axis + 1:]
                pairs.append((index[pt], index[lower]))
    return build_from_pairs(len(points), pairs)


def random_poset(n: int, prob: float, seed: int) -> Poset:
    """Random DAG on ``n - 2`` interior elements with adjoined top and bottom.

    Interior labels are shuffled so that index order carries no structure.
    """
    if n < 2:
        raise BadParams("random poset needs n >= 2")
    if not 0.0 <= prob <= 1.0:
        raise BadParams("edge probability must lie in [0, 1]")
    rng = random.Random(f"poset:{n}:{prob}:{seed}")
    inner = list(range(2, n))
    labels = inner[:]
    rng.shuffle(labels)
    pairs = []
    for i in range(len(inner)):
        for j in range(i + 1, len(inner)):
            if rng.random() < prob:
                pairs.append((labels[i], labels[j]))
    pairs += [(1, x) for x in inner] + [(x, n) for x in inner]
    if n == 2:
        pairs = [(1, 2)]
    return build_from_pairs(n, pairs)


def random_sublattice(seed: int, max_size: int = 40) -> Poset:
    """Sublattice of a random product of chains, closed under meet and join.

    The result is renumbered so that the top is 1 and the bottom is n.
    """
    rng = random.Random(f"sublattice:{seed}")
    while True:
        dims = [rng.randint(2, 4) for _ in range(rng.randint(1, 4))]
        total = 1
        for d in dims:
            total *= d
        if total <= 4 * max_size:
            break
    points = list(product(*(range(d) for d in dims)))
    keep = set(rng.sample(points, rng.randint(2, min(len(points), 8))))
    # close under componentwise min/max
    while True:
        extra = set()
        for a in keep:
            for b in keep:
                extra.add(tuple(map(min, a, b)))
                extra.add(tuple(map(max, a, b)))
        if extra <= keep:
            break
        keep |= extra
        if len(keep) > max_size:
            return random_sublattice(seed * 7919 + 1, max_size)
    pts = sorted(keep, key=lambda pt: (-sum(pt), pt))
    index = {pt: i for i, pt in enumerate(pts, 1)}
    pairs = [
        (index[a], index[b])
        for a in pts
        for b in pts
        if a != b and all(x >= y for x, y in zip(a, b))
    ]
    return build_from_pairs(len(pts), pairs)


def from_spec(kind: str, params, seed: int = 0) -> Poset:
    """Dispatch for the ``gen`` command: ``kind`` plus its numeric parameters."""
    try:
        if kind == "chain":
            (n,) = params
            return chain(int(n))
        if kind == "boolean":
            (k,) = params
            return boolean(int(k))
        if kind == "grid":
            return grid(*(int(d) for d in params))
        if kind == "star":
            (k,) = params
            return star(int(k))
        if kind == "random-poset":
            n, prob = params
            return random_poset(int(n), float(prob), seed)
    except (TypeError, ValueError) as err:
        raise BadParams(f"bad parameters for {kind}: {list(params)}") from err
    raise BadParams(f"unknown generator {kind!r}")
