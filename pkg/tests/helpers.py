"""Canonical fixtures and brute-force oracles shared by the test modules."""
from itertools import product

import numpy as np

from posetsearch.generate import boolean, chain, grid, star
from posetsearch.poset import bits, build_from_pairs

B2 = build_from_pairs(4, [(1, 2), (1, 3), (2, 4), (3, 4)])
C4 = chain(4)
B3 = boolean(3)
STAR3 = star(3)
BOWTIE6 = build_from_pairs(6, [(1, 2), (1, 3), (2, 4), (2, 5), (3, 4), (3, 5), (4, 6), (5, 6)])
GRID2x3 = grid(2, 3)
# smallest lattice whose join-irreducible reduction is not a lattice,
# frozen from small_lattices(7)
NONMAT = build_from_pairs(7, [(1, 2), (1, 3), (2, 4), (3, 4), (4, 5), (4, 6), (5, 7), (6, 7)])

MATRYOSHKA_FIXTURES = {"B2": B2, "B3": B3, "C4": C4, "STAR3": STAR3, "GRID2x3": GRID2x3}


def leq_matrix(p):
    """Brute-force order matrix, m[a-1, b-1] = a <= b, via reachability over covers."""
    n = p.n
    reach = np.eye(n, dtype=bool)
    for a, b in p.cover_edges:
        reach[b - 1, a - 1] = True
    # Warshall on the cover graph, independent of the library's bitsets
    for k in range(n):
        reach |= reach[:, k : k + 1] & reach[k : k + 1, :]
    return reach


def lower_bounds(p, x, y):
    return {z for z in p if p.is_leq(z, x) and p.is_leq(z, y)}


def upper_bounds(p, x, y):
    return {z for z in p if p.is_leq(x, z) and p.is_leq(y, z)}


def brute_meet(p, x, y):
    lb = lower_bounds(p, x, y)
    best = [z for z in lb if all(p.is_leq(w, z) for w in lb)]
    return best[0] if best else None


def brute_join(p, x, y):
    ub = upper_bounds(p, x, y)
    best = [z for z in ub if all(p.is_leq(z, w) for w in ub)]
    return best[0] if best else None


def audit_status(status, vq, no_value="NO"):
    """Every element marked as failing must really fail ``geq``."""
    for x, st in status.items():
        if st == no_value:
            assert x not in vq.up_set, f"element {x} marked {st} but is above the query"


def audit_parallel(out, vq):
    sh = out.shared
    assert not sh.conflicts
    for x in range(1, len(sh.anc)):
        if sh.anc[x] == "ANC":
            assert x in vq.up_set
        elif sh.anc[x] == "NONANC":
            assert x not in vq.up_set
        if sh.nondes[x]:
            assert x not in vq.down_set


def expected_outcome(vq):
    return vq.target


def brute_hom(g, h, v):
    """Exhaustive check over every concept map; relation images are then independent."""
    gc = [cid for cid, _ in g.concepts]
    hc = [cid for cid, _ in h.concepts]
    if not gc:
        # only relations with no arguments could remain, which arity forbids
        return all(any(v.relation_leq(ht, rt) for _, ht, _ in h.relations) for _, rt, _ in g.relations)
    if not hc:
        return False
    col = {cid: i for i, cid in enumerate(gc)}
    hidx = {cid: i for i, cid in enumerate(hc)}
    maps = np.array(list(product(range(len(hc)), repeat=len(gc))), dtype=np.int64)
    ok = np.ones(len(maps), dtype=bool)
    htype = [t for _, t in h.concepts]
    for cid, ctype in g.concepts:
        allowed = np.array([v.concept_leq(t, ctype) for t in htype])
        ok &= allowed[maps[:, col[cid]]]
    for _, rtype, args in g.relations:
        any_img = np.zeros(len(maps), dtype=bool)
        for _, ht, hargs in h.relations:
            if len(hargs) != len(args) or not v.relation_leq(ht, rtype):
                continue
            m = np.ones(len(maps), dtype=bool)
            for a, b in zip(args, hargs):
                m &= maps[:, col[a]] == hidx[b]
            any_img |= m
        ok &= any_img
    return bool(ok.any())


def set_of(mask):
    return set(bits(mask))
