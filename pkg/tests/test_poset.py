import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import B2, C4, leq_matrix
from posetsearch.poset import (
    CycleDetected,
    IndexOutOfRange,
    ParseError,
    build_from_pairs,
    format_poset,
    is_isomorphic,
    parse_poset,
)


@st.composite
def dags(draw, max_n=12):
    n = draw(st.integers(1, max_n))
    # edges only go from a lower to a higher position of a random permutation
    perm = draw(st.permutations(range(1, n + 1)))
    pairs = draw(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=3 * n))
    edges = {(perm[a], perm[b]) for a, b in pairs if a < b}
    return n, edges


def test_diamond():
    assert B2.top == 1 and B2.bottom == 4
    assert B2.is_lt(4, 1)
    assert (1, 4) not in B2.cover_edges
    assert B2.cover_edges == {(1, 2), (1, 3), (2, 4), (3, 4)}


def test_singleton():
    p = build_from_pairs(1, [])
    assert p.top == 1 and p.bottom == 1


def test_cycle_rejected():
    with pytest.raises(CycleDetected) as err:
        build_from_pairs(3, [(1, 2), (2, 3), (3, 1)])
    assert set(err.value.cycle) == {1, 2, 3}


def test_self_pair_is_a_cycle():
    with pytest.raises(CycleDetected):
        build_from_pairs(2, [(2, 2)])


def test_index_out_of_range():
    with pytest.raises(IndexOutOfRange):
        build_from_pairs(3, [(1, 4)])
    with pytest.raises(IndexOutOfRange):
        B2.is_leq(0, 1)
    with pytest.raises(IndexOutOfRange):
        B2.relatives(5)


def test_is_leq():
    assert B2.is_leq(4, 1)
    assert not B2.is_leq(2, 3)
    assert B2.is_leq(2, 2)


def test_relatives():
    r = B2.relatives(2)
    assert (set(r.ancestors), set(r.descendants)) == ({1}, {4})
    assert (set(r.parents), set(r.children)) == ({1}, {4})
    assert (r.indeg, r.outdeg) == (1, 1)
    r = B2.relatives(1)
    assert not r.ancestors and set(r.children) == {2, 3} and r.outdeg == 2
    r = C4.relatives(3)
    assert set(r.ancestors) == {1, 2} and set(r.parents) == {2}
    assert set(r.descendants) == {4} and set(r.children) == {4}


def test_descendant_lists():
    assert str(B2.descendant_list(1)) == "(2; 2,3 | 4)"
    d = B2.descendant_list(4)
    assert d.outdeg == 0 and d.entries == ()
    d = C4.descendant_list(1)
    assert d.outdeg == 1 and d.children == (2,) and d.rest == (3, 4)
    a = C4.ancestor_list(4)
    assert a.children == (3,) and a.rest == (1, 2)


def test_pairs_need_not_be_covers():
    p = build_from_pairs(4, [(1, 2), (2, 3), (1, 3), (3, 4), (1, 4)])
    assert p.cover_edges == {(1, 2), (2, 3), (3, 4)}


def test_text_roundtrip():
    text = format_poset(B2, comment="diamond")
    assert text.startswith("# diamond\nposet 4\n")
    assert parse_poset(text) == B2


def test_parse_tolerates_comments_and_blank_lines():
    p = parse_poset("# c\n\nposet 3\ngt 1 2   # first\n\ngt 2 3\n")
    assert p.cover_edges == {(1, 2), (2, 3)}


@pytest.mark.parametrize(
    "text,lineno",
    [
        ("gt 1 2\n", 1),
        ("poset 3\ngt 1\n", 2),
        ("poset 3\nlt 1 2\n", 2),
        ("poset x\n", 1),
        ("poset 2\ngt 1 b\n", 2),
    ],
)
def test_parse_errors(text, lineno):
    with pytest.raises(ParseError) as err:
        parse_poset(text)
    assert err.value.lineno == lineno


def test_parse_cycle():
    with pytest.raises(CycleDetected):
        parse_poset("poset 2\ngt 1 2\ngt 2 1\n")


def test_dual_and_isomorphism():
    assert is_isomorphic(B2, B2.dual())
    assert not is_isomorphic(C4, B2)
    assert C4.dual().top == 4


@settings(max_examples=150, deadline=None)
@given(dags())
def test_closure_is_transitive_and_covers_regenerate_it(case):
    n, edges = case
    p = build_from_pairs(n, edges)
    lt = np.array([[p.is_lt(a, b) for b in p] for a in p], dtype=bool)
    assert not lt.diagonal().any()
    comp = (lt.astype(int) @ lt.astype(int)) > 0
    assert not (comp & ~lt).any()
    # brute force reachability from the covers only
    want = leq_matrix(p)
    np.fill_diagonal(want, False)
    assert (want == lt).all()
    # and from the raw input pairs
    raw = np.eye(n, dtype=bool)
    for a, b in edges:
        raw[b - 1, a - 1] = True
    for k in range(n):
        raw |= raw[:, k : k + 1] & raw[k : k + 1, :]
    np.fill_diagonal(raw, False)
    assert (raw == lt).all()


@settings(max_examples=150, deadline=None)
@given(dags(max_n=20))
def test_parents_and_children_are_nearest_relatives(case):
    n, edges = case
    p = build_from_pairs(n, edges)
    for x in p:
        anc, desc = p.ancestors(x), p.descendants(x)
        # nearest relatives: least ancestors, greatest descendants
        nearest_up = {a for a in anc if not any(p.is_lt(b, a) for b in anc)}
        nearest_down = {d for d in desc if not any(p.is_lt(d, b) for b in desc)}
        r = p.relatives(x)
        assert set(r.parents) == nearest_up and set(r.children) == nearest_down
        assert r.indeg == len(r.parents) and r.outdeg == len(r.children)
        assert all(any(p.is_leq(q, a) for q in r.parents) for a in anc)
        assert all(any(p.is_leq(d, c) for c in r.children) for d in desc)


@settings(max_examples=150, deadline=None)
@given(dags())
def test_descendant_list_layout(case):
    n, edges = case
    p = build_from_pairs(n, edges)
    for x in p:
        d = p.descendant_list(x)
        assert set(d.children) == set(p.children(x))
        assert set(d.entries) == set(p.descendants(x))
        assert len(set(d.entries)) == len(d.entries)
        assert list(d.children) == sorted(d.children) and list(d.rest) == sorted(d.rest)
        a = p.ancestor_list(x)
        assert set(a.children) == set(p.parents(x)) and set(a.entries) == set(p.ancestors(x))


@settings(max_examples=150, deadline=None)
@given(dags())
def test_reported_top_and_bottom_are_extreme(case):
    n, edges = case
    p = build_from_pairs(n, edges)
    tops = [t for t in p if all(p.is_leq(x, t) for x in p)]
    bottoms = [b for b in p if all(p.is_leq(b, x) for x in p)]
    assert p.top == (tops[0] if tops else None)
    assert p.bottom == (bottoms[0] if bottoms else None)


@settings(max_examples=100, deadline=None)
@given(dags())
def test_format_parse_roundtrip(case):
    n, edges = case
    p = build_from_pairs(n, edges)
    assert parse_poset(format_poset(p)) == p
