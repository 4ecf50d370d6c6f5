"""Query oracles and comparison accounting.

A query oracle answers two questions about a fixed, hidden query element
``q``: ``geq(x)`` is "c_x >= q" and ``leq(x)`` is "c_x <= q".  Every answer
is assumed expensive, so searches go through a :class:`Ledger` that
evaluates each (element, direction) pair at most once.
"""
from __future__ import annotations

import random
import threading
from collections import Counter
from dataclasses import dataclass
from typing import Protocol

from .poset import Poset, bits, mask_of

GEQ = "geq"
LEQ = "leq"


class QueryOracle(Protocol):
    def geq(self, x: int) -> bool: ...

    def leq(self, x: int) -> bool: ...


class InconsistentVirtualQuery(ValueError):
    def __init__(self, msg, witness=None):
        self.witness = witness
        super().__init__(msg if witness is None else f"{msg}: {witness}")


@dataclass(frozen=True)
class VirtualQuery:
    """Answer profile of a query element that may or may not lie in the dataset."""

    up_set: frozenset
    down_set: frozenset
    target: int | None = None

    @classmethod
    def present(cls, p: Poset, z: int) -> "VirtualQuery":
        return cls(frozenset(bits(p.up_mask(z))), frozenset(bits(p.down_mask(z))), z)

    def validate(self, p: Poset) -> None:
        """Raise :class:`InconsistentVirtualQuery` unless the profile fits ``p``."""
        for x in self.up_set | self.down_set:
            if not isinstance(x, int) or not 1 <= x <= p.n:
                raise InconsistentVirtualQuery("element out of range", x)
        up = mask_of(self.up_set)
        down = mask_of(self.down_set)
        for x in self.up_set:
            missing = p.anc_mask(x) & ~up
            if missing:
                raise InconsistentVirtualQuery("up_set not up-closed", (next(bits(missing)), x))
        for x in self.down_set:
            missing = p.desc_mask(x) & ~down
            if missing:
                raise InconsistentVirtualQuery("down_set not down-closed", (x, next(bits(missing))))
        for x in self.up_set:
            bad = down & ~p.down_mask(x)
            if bad:
                raise InconsistentVirtualQuery("down_set element not below up_set element", (next(bits(bad)), x))
        common = self.up_set & self.down_set
        if len(common) > 1:
            raise InconsistentVirtualQuery("up_set and down_set share several elements", tuple(sorted(common)))
        expected = next(iter(common)) if common else None
        if self.target != expected:
            raise InconsistentVirtualQuery("target does not match up/down intersection", (self.target, expected))


class ExplicitOracle:
    """Oracle backed by a validated :class:`VirtualQuery`."""

    def __init__(self, p: Poset, vq: VirtualQuery):
        vq.validate(p)
        self.poset = p
        self.query = vq
        self.target = vq.target

    def geq(self, x: int) -> bool:
        return x in self.query.up_set

    def leq(self, x: int) -> bool:
        return x in self.query.down_set


def explicit_oracle(p: Poset, vq: VirtualQuery) -> ExplicitOracle:
    return ExplicitOracle(p, vq)


class CountingOracle:
    """Counts how often each pair reaches the wrapped oracle."""

    def __init__(self, inner: QueryOracle):
        self.inner = inner
        self.counts = Counter()
        self._lock = threading.Lock()
        self.target = getattr(inner, "target", None)

    def geq(self, x):
        with self._lock:
            self.counts[(x, GEQ)] += 1
        return self.inner.geq(x)

    def leq(self, x):
        with self._lock:
            self.counts[(x, LEQ)] += 1
        return self.inner.leq(x)


class _Claim:
    __slots__ = ("done", "answer", "owner")

    def __init__(self, owner):
        self.done = threading.Event()
        self.answer = None
        self.owner = owner


class Ledger:
    """Claim-once accounting for query comparisons.

    The first requester of a pair evaluates it; everybody else, including
    concurrent requesters, waits for that answer and is counted as a
    duplicate attempt.
    """

    def __init__(self, inner: QueryOracle):
        self.inner = inner
        self._claims: dict[tuple, _Claim] = {}
        self._lock = threading.Lock()
        self.geq_calls = 0
        self.leq_calls = 0
        self.duplicate_attempts = 0
        self.per_worker = Counter()
        self.evaluations: list[tuple] = []

    def request(self, x: int, direction: str, who=None) -> tuple[bool, bool]:
        """Return ``(answer, fresh)``; ``fresh`` is True for the claiming call."""
        key = (x, direction)
        with self._lock:
            claim = self._claims.get(key)
            if claim is None:
                claim = self._claims[key] = _Claim(who)
                if direction == GEQ:
                    self.geq_calls += 1
                else:
                    self.leq_calls += 1
                self.per_worker[who] += 1
                fresh = True
            else:
                self.duplicate_attempts += 1
                fresh = False
        if fresh:
            fn = self.inner.geq if direction == GEQ else self.inner.leq
            claim.answer = bool(fn(x))
            with self._lock:
                self.evaluations.append((x, direction, claim.answer, who))
            claim.done.set()
        else:
            claim.done.wait()
        return claim.answer, fresh

    def known(self, x: int, direction: str):
        """Published answer for a pair, or None."""
        claim = self._claims.get((x, direction))
        if claim is None or not claim.done.is_set():
            return None
        return claim.answer

    @property
    def total(self) -> int:
        return self.geq_calls + self.leq_calls

    def snapshot(self) -> dict:
        return {
            "geq_calls": self.geq_calls,
            "leq_calls": self.leq_calls,
            "duplicate_attempts": self.duplicate_attempts,
        }


class LedgerOracle:
    """A :class:`QueryOracle` view of a ledger, optionally tagged with a worker id."""

    def __init__(self, ledger: Ledger, who=None):
        self.ledger = ledger
        self.who = who
        self.target = getattr(ledger.inner, "target", None)

    def geq(self, x):
        return self.ledger.request(x, GEQ, self.who)[0]

    def leq(self, x):
        return self.ledger.request(x, LEQ, self.who)[0]

    def as_worker(self, who) -> "LedgerOracle":
        return LedgerOracle(self.ledger, who)


def with_ledger(o: QueryOracle) -> tuple[LedgerOracle, Ledger]:
    if isinstance(o, LedgerOracle):
        return o, o.ledger
    ledger = Ledger(o)
    return LedgerOracle(ledger), ledger


def random_virtual_query(p: Poset, seed: int, want_present: bool, exclude_bottom: bool = True) -> VirtualQuery:
    """Sample a consistent query profile, deterministically per seed.

    Present queries pick a target uniformly (skipping the bottom unless the
    poset has nothing else).  Absent queries keep the top in ``up_set`` so the
    query sits below the dataset's top, as the searches assume.
    """
    rng = random.Random(f"vq:{seed}")
    if want_present:
        pool = [x for x in p if not (exclude_bottom and x == p.bottom)] or list(p)
        return VirtualQuery.present(p, rng.choice(pool))

    for _ in range(64):
        up = _sample_up(p, rng)
        below_all = p.all_mask
        for u in bits(up):
            below_all &= p.down_mask(u)
        cand = below_all & ~up
        if not cand and up != p.all_mask:
            continue
        down = 0
        tops = p.maximal(cand)
        if tops:
            picked = [t for t in tops if rng.random() < 0.5] or [rng.choice(tops)]
            for t in picked:
                down |= p.down_mask(t)
        if rng.random() < 0.15 and len(tops) > 0:
            # occasionally shrink the ideal, still down-closed
            down = p.down_mask(rng.choice(list(bits(down))))
        vq = VirtualQuery(frozenset(bits(up)), frozenset(bits(down)), None)
        vq.validate(p)
        return vq
    # every filter/ideal pair intersects: degenerate profile
    up = p.up_mask(p.top) if p.top is not None else p.all_mask
    return VirtualQuery(frozenset(bits(up)), frozenset(), None)


def _sample_up(p, rng):
    mode = rng.random()
    if mode < 0.5 and p.n > 1:
        # just above some element z: strict ancestors of z
        pool = [x for x in p if x != p.top] or list(p)
        z = rng.choice(pool)
        up = p.anc_mask(z)
        if p.top is not None:
            up |= p.up_mask(p.top)
        return up
    k = rng.randint(1, min(3, p.n))
    up = 0
    for z in rng.sample(range(1, p.n + 1), k):
        up |= p.up_mask(z)
    return up
