"""Sequential searches that count query comparisons.

``search_sequential`` walks down from the top asking "is this element above
the query?", pruning every element below a "no".  ``search_matryoshka``
instead learns which join-irreducibles of the innermost lattice of a
matryoshka chain lie below the query, then recovers the query's code level
by level with bit-vector comparisons only.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from .lattice import MatryoshkaChain, NotATree, BinaryCode, tree_like
from .oracle import GEQ, LEQ, Ledger, QueryOracle
from .poset import Poset, PosetError, bits

YES = "YES"
NO = "NO"


class MissingTopOrBottom(PosetError):
    pass


class TopEqualsBottom(PosetError):
    pass


class QueryIsBottom(PosetError):
    pass


class LevelOutOfRange(PosetError):
    pass


@dataclass
class SearchStats:
    geq_calls: int = 0
    leq_calls: int = 0
    duplicate_attempts: int = 0
    code_comparisons: int = 0
    levels_visited: int = 0
    tree_calls: int = 0
    verify_calls: int = 0
    elapsed_ms: float = 0.0

    @property
    def oracle_calls(self) -> int:
        """Distinct comparisons evaluated by the underlying oracle."""
        return self.geq_calls + self.leq_calls

    @property
    def requests(self) -> int:
        """Comparisons asked for, including ones answered from the ledger."""
        return self.oracle_calls + self.duplicate_attempts


@dataclass
class SearchOutcome:
    found: int | None
    stats: SearchStats
    trace: list = field(default_factory=list)
    status: dict = field(default_factory=dict)
    ledger: Ledger | None = None

    @property
    def absent(self) -> bool:
        return self.found is None

    def describe(self) -> str:
        return "absent" if self.found is None else f"found:{self.found}"


class _Probe:
    """Ledger-backed oracle access with an optional trace."""

    def __init__(self, oracle: QueryOracle, tracing: bool):
        self.ledger = Ledger(oracle)
        self.trace = [] if tracing else None
        self.requests = 0

    def ask(self, step, direction, x, who=None):
        answer, _ = self.ledger.request(x, direction, who)
        self.requests += 1
        if self.trace is not None:
            self.trace.append(f"{step} {direction} {x} {'T' if answer else 'F'}")
        return answer

    def fill(self, stats: SearchStats, started: float):
        stats.geq_calls = self.ledger.geq_calls
        stats.leq_calls = self.ledger.leq_calls
        stats.duplicate_attempts = self.ledger.duplicate_attempts
        stats.elapsed_ms = (time.perf_counter() - started) * 1000.0


def _check_dataset(p: Poset):
    if p.top is None or p.bottom is None:
        raise MissingTopOrBottom("dataset needs both a top and a bottom element")
    if p.top == p.bottom:
        raise TopEqualsBottom("dataset top and bottom coincide")


def search_sequential(p: Poset, oracle: QueryOracle, trace: bool = False) -> SearchOutcome:
    """Top-down search; at most one ``geq`` per element and a single ``leq``."""
    _check_dataset(p)
    if getattr(oracle, "target", None) == p.bottom:
        raise QueryIsBottom("the query must not be the bottom element")
    return _walk(p, oracle, trace, dual=False)


def search_sequential_dual(p: Poset, oracle: QueryOracle, trace: bool = False) -> SearchOutcome:
    """Bottom-up mirror of :func:`search_sequential`."""
    _check_dataset(p)
    if getattr(oracle, "target", None) == p.top:
        raise QueryIsBottom("the query must not be the top element for the dual walk")
    return _walk(p, oracle, trace, dual=True)


def _walk(p: Poset, oracle, tracing, dual):
    started = time.perf_counter()
    probe = _Probe(oracle, tracing)
    if dual:
        step_dir, final_dir = LEQ, GEQ
        nexts, beyond, start = p.parents, p.anc_mask, p.bottom
    else:
        step_dir, final_dir = GEQ, LEQ
        nexts, beyond, start = p.children, p.desc_mask, p.top
    status = {}
    x = start
    while True:
        status[x] = YES
        descended = False
        for y in nexts(x):
            if status.get(y) == NO:
                continue
            if probe.ask("6", step_dir, y):
                x = y
                descended = True
                break
            # y fails, so does everything past it
            status[y] = NO
            for d in bits(beyond(y)):
                status[d] = NO
        if not descended:
            break
    found = x if probe.ask("9", final_dir, x) else None
    stats = SearchStats()
    probe.fill(stats, started)
    return SearchOutcome(found, stats, probe.trace or [], status, probe.ledger)


@dataclass
class QueryBits:
    """Known answers to "element <= q"; None marks undetermined elements."""

    values: dict
    asked: set = field(default_factory=set)

    def __getitem__(self, x):
        return self.values.get(x)

    def determined(self):
        return {x: v for x, v in self.values.items() if v is not None}


def _settle(p: Poset, open_: int, ask) -> tuple:
    """Resolve "x <= q" for every element in ``open_`` by greedy splitting.

    Each round asks about the open element whose worse answer leaves the
    fewest open elements (smallest index on ties); a "yes" settles
    everything below it, a "no" everything above it.
    """
    values = {}
    asked = []
    while open_:
        best, best_score = None, -1
        for j in bits(open_):
            score = min((p.desc_mask(j) & open_).bit_count(), (p.anc_mask(j) & open_).bit_count())
            if score > best_score:
                best, best_score = j, score
        asked.append(best)
        if ask(best):
            settled = p.down_mask(best) & open_
            value = True
        else:
            settled = p.up_mask(best) & open_
            value = False
        for s in bits(settled):
            values[s] = value
        open_ &= ~settled
    return values, asked


def tree_code_search(tree: Poset, oracle: QueryOracle, ids=None, probe: _Probe | None = None) -> QueryBits:
    """Decide "j <= q" for every non-bottom element of a tree-like poset.

    ``ids`` maps tree elements to the ids the oracle understands.  The
    bottom's bit is never requested.
    """
    if not tree_like(tree):
        raise NotATree("search tree must be tree-like")
    probe = probe or _Probe(oracle, False)
    ids = ids or tuple(tree)
    open_ = tree.all_mask & ~(1 << tree.bottom)
    values, asked = _settle(tree, open_, lambda j: probe.ask("4", LEQ, ids[j - 1]))
    return QueryBits(values, set(asked))


def extend_code(chain: MatryoshkaChain, level: int, known: QueryBits | dict) -> tuple:
    """Lift "x <= q" answers from level ``level + 1`` to level ``level``.

    Returns ``(QueryBits over L_level, code of q at L_level, comparisons)``;
    no oracle is consulted.
    """
    if not 0 <= level < chain.t:
        raise LevelOutOfRange(f"level {level} outside 0..{chain.t - 1}")
    values = known.values if isinstance(known, QueryBits) else known
    upper = chain.levels[level + 1].base
    back = {e: i for i, e in enumerate(chain.embeds[level], 1)}
    flags = []
    for j in chain.ji[level]:
        v = values.get(back[j])
        if v is None:
            if back[j] != upper.bottom:
                raise LevelOutOfRange(f"bit for element {back[j]} of level {level + 1} is unknown")
            v = True
        flags.append(v)
    code_q = BinaryCode.from_flags(flags)
    codes = chain.codes[level]
    out = {x: codes[x] <= code_q for x in chain.levels[level].base}
    return QueryBits(out), code_q, len(out)


def search_matryoshka(chain: MatryoshkaChain, oracle: QueryOracle, trace: bool = False,
                      confirm: bool = True) -> SearchOutcome:
    """Find the query in ``L_0`` of a matryoshka chain.

    Oracle use: the tree-level ``leq`` questions, one ``leq`` on the top when
    it is a needed code bit outside the tree and every tree answer was
    "yes", and two verification calls on the code-matched candidate.

    Code inclusion only proves "x <= q" when q itself lies in that level.
    On chains with three or more levels a "yes" inferred for an element
    that is not join-irreducible at its level can be wrong, which later
    turns a present query into a rejected candidate.  With ``confirm`` such
    inferred bits are re-asked (greedily, before they are used one level
    down); chains with ``t <= 1`` never need it.
    """
    started = time.perf_counter()
    probe = _Probe(oracle, trace)
    stats = SearchStats()
    t = chain.t
    last = chain.levels[t].base

    def to_base(level, x):
        for lv in range(level - 1, -1, -1):
            x = chain.lift(lv, x)
        return x

    tree = chain.tree
    ids = [to_base(t, e) for e in tree.embed]
    before = probe.requests
    tbits = tree_code_search(tree.poset, None, ids=ids, probe=probe)
    known = {tree.embed[x - 1]: v for x, v in tbits.values.items()}
    known[last.bottom] = True
    # the top is a code bit one level down but sits outside the tree
    if last.top not in known and t > 0 and chain.lift(t - 1, last.top) in chain.ji[t - 1]:
        if all(known.values()):
            known[last.top] = probe.ask("4", LEQ, to_base(t, last.top))
        else:
            known[last.top] = False
    stats.tree_calls = probe.requests - before
    stats.levels_visited = 1

    code_q = None
    for level in range(t - 1, -1, -1):
        qbits, code_q, comps = extend_code(chain, level, known)
        known = qbits.values
        stats.code_comparisons += comps
        stats.levels_visited += 1
        if confirm and level > 0:
            known = _confirm(chain, level, known, probe, lambda x, lv=level: to_base(lv, x))

    if code_q is None:
        code_q = BinaryCode.from_flags([known[j] for j in chain.ji[0]])
    found = None
    candidate = None
    for x, c in chain.codes[0].items():
        stats.code_comparisons += 1
        if c.bits == code_q.bits:
            candidate = x
            break
    if candidate is not None:
        before = probe.requests
        if probe.ask("7", GEQ, candidate) and probe.ask("7", LEQ, candidate):
            found = candidate
        stats.verify_calls = probe.requests - before
    probe.fill(stats, started)
    return SearchOutcome(found, stats, probe.trace or [], {}, probe.ledger)


def _confirm(chain, level, known, probe, to_base):
    """Re-ask inferred "yes" bits of L_level that feed the next level's code."""
    lat = chain.levels[level].base
    exact = set(chain.ji[level])
    needed = set(chain.ji[level - 1])
    open_ = 0
    for x, v in known.items():
        if v and x != lat.bottom and x not in exact and chain.lift(level - 1, x) in needed:
            open_ |= 1 << x
    if not open_:
        return known
    # answers only travel inside the open set; anything else keeps its code value
    values, _ = _settle(lat, open_, lambda x: probe.ask("6", LEQ, to_base(x)))
    merged = dict(known)
    merged.update(values)
    return merged
