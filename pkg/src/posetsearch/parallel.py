"""Parallel poset search over shared status cells.

Worker 1 performs the plain top-down walk.  The other workers start from
random interior elements, skip regions already classified by anyone, and
jump into the descendants of elements somebody else has shown to be above
the query.  Every worker is a generator that yields once per algorithm
step, so the same code runs on real threads or under an explicit,
reproducible interleaving.
"""
from __future__ import annotations

import itertools
import random
import threading
import time
from dataclasses import dataclass, field

from .oracle import GEQ, LEQ, Ledger, QueryOracle
from .poset import Poset, PosetError, bits
from .search import SearchOutcome, SearchStats, _check_dataset

UNKNOWN = "UNKNOWN"
ANC = "ANC"
NONANC = "NONANC"

PARK = "park"


class InvalidWorkerCount(PosetError):
    pass


class MalformedSchedule(PosetError):
    pass


class SharedStatus:
    """Monotone per-element cells plus the write-once stop cell."""

    def __init__(self, n: int):
        self.anc = [UNKNOWN] * (n + 1)
        self.nondes = [False] * (n + 1)
        self.stop = None
        self.conflicts = []
        self._lock = threading.Lock()
        self.stopped = threading.Event()

    def mark(self, mask: int, state: str) -> None:
        with self._lock:
            for x in bits(mask):
                cur = self.anc[x]
                if cur == UNKNOWN:
                    self.anc[x] = state
                elif cur != state:
                    self.conflicts.append((x, cur, state))

    def set_nondes(self, x: int) -> None:
        with self._lock:
            self.nondes[x] = True

    def publish(self, result) -> bool:
        with self._lock:
            if self.stop is not None:
                return False
            self.stop = result
        self.stopped.set()
        return True


@dataclass
class ParallelStats(SearchStats):
    m: int = 0
    per_worker_calls: list = field(default_factory=list)
    restarts: list = field(default_factory=list)
    steps: int = 0


@dataclass
class _Worker:
    s: int
    rng: random.Random
    restarts: int = 0
    requests: int = 0
    done: bool = False


class _Run:
    def __init__(self, p: Poset, oracle: QueryOracle, m: int, seed: int, tracing: bool):
        self.p = p
        self.ledger = Ledger(oracle)
        self.shared = SharedStatus(p.n)
        self.interior = p.all_mask & ~(1 << p.top) & ~(1 << p.bottom)
        self.workers = [_Worker(s, random.Random(f"{seed}:{s}")) for s in range(1, m + 1)]
        self.trace = [] if tracing else None
        self._trace_lock = threading.Lock()

    def ask(self, w: _Worker, step, direction, x):
        answer, fresh = self.ledger.request(x, direction, w.s)
        w.requests += 1
        if self.trace is not None:
            with self._trace_lock:
                tag = "" if fresh else " (reused)"
                self.trace.append(f"P{w.s} {step} {direction} {x} {'T' if answer else 'F'}{tag}")
        return answer

    def note(self, w, text):
        if self.trace is not None:
            with self._trace_lock:
                self.trace.append(f"P{w.s} {text}")

    def steps(self, w: _Worker):
        """Generator for one worker; each ``yield`` ends an algorithm step."""
        p, sh = self.p, self.shared
        R = self.interior
        if w.s == 1:
            x = p.top
            sampling = False
        else:
            sampling = True
        while True:
            if sampling:
                # 1.3: pick a start, skipping classified elements
                yield "1.3"
                if sh.stop is not None:
                    return
                if not R:
                    self.note(w, "park")
                    while sh.stop is None:
                        yield PARK
                    return
                x = w.rng.choice(tuple(bits(R)))
                state = sh.anc[x]
                if state == ANC:
                    R = p.desc_mask(x) & self.interior
                    continue
                if state == NONANC:
                    R &= ~p.down_mask(x)
                    continue
                if not self.ask(w, "1.4", GEQ, x):
                    sh.mark(p.down_mask(x), NONANC)
                    R &= ~p.down_mask(x)
                    continue
                sampling = False
            # 1.5 onwards: x is known to be above the query
            sh.mark(1 << x, ANC)
            moved = False
            for y in p.children(x):
                yield "1.7"
                if sh.stop is not None:
                    return
                if w.s != 1 and sh.anc[y] == ANC:
                    R = p.desc_mask(y) & self.interior
                    sampling = True
                    moved = True
                    break
                if sh.anc[y] == NONANC:
                    continue
                if self.ask(w, "1.10", GEQ, y):
                    x = y
                    moved = True
                    break
                sh.mark(p.down_mask(y), NONANC)
            if moved:
                continue
            # 1.13: children exhausted
            if not sh.nondes[x]:
                if self.ask(w, "1.14", LEQ, x):
                    if sh.publish(("found", x)):
                        self.note(w, f"publish found:{x}")
                    return
                sh.set_nondes(x)
            if w.s == 1:
                if sh.publish(("absent",)):
                    self.note(w, "publish absent")
                return
            w.restarts += 1
            self.note(w, "restart")
            sampling = True

    def outcome(self, started, steps, m):
        stop = self.shared.stop
        found = stop[1] if stop and stop[0] == "found" else None
        stats = ParallelStats(
            geq_calls=self.ledger.geq_calls,
            leq_calls=self.ledger.leq_calls,
            duplicate_attempts=self.ledger.duplicate_attempts,
            elapsed_ms=(time.perf_counter() - started) * 1000.0,
            m=m,
            per_worker_calls=[self.ledger.per_worker[w.s] for w in self.workers],
            restarts=[w.restarts for w in self.workers],
            steps=steps,
        )
        status = {x: self.shared.anc[x] for x in self.p}
        out = SearchOutcome(found, stats, self.trace or [], status, self.ledger)
        out.shared = self.shared
        return out


def _validate(p, m):
    _check_dataset(p)
    if not isinstance(m, int) or m < 2:
        raise InvalidWorkerCount(f"need at least 2 workers, got {m!r}")


def search_parallel(p: Poset, oracle: QueryOracle, m: int = 2, seed: int = 0,
                    scheduler="threads", trace: bool = False) -> SearchOutcome:
    """Run ``m`` workers; ``scheduler`` is "threads", "round-robin", "random" or a schedule."""
    if scheduler == "threads":
        return _run_threads(p, oracle, m, seed, trace)
    return run_deterministic(p, oracle, m, seed, scheduler, trace=trace)


def _run_threads(p, oracle, m, seed, tracing):
    _validate(p, m)
    started = time.perf_counter()
    run = _Run(p, oracle, m, seed, tracing)
    errors = []
    counts = [0] * m

    def drive(w):
        try:
            for token in run.steps(w):
                counts[w.s - 1] += 1
                if token == PARK:
                    run.shared.stopped.wait(0.001)
        except BaseException as exc:  # surfaced in the caller
            errors.append(exc)
            run.shared.publish(("error",))
        w.done = True

    threads = [threading.Thread(target=drive, args=(w,), daemon=True) for w in run.workers]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    if errors:
        raise errors[0]
    return run.outcome(started, sum(counts), m)


def _schedule_iter(schedule, m, seed):
    if schedule == "round-robin":
        return itertools.cycle(range(1, m + 1))
    if schedule == "random":
        rng = random.Random(f"sched:{seed}")
        return iter(lambda: rng.randint(1, m), None)
    try:
        explicit = [int(s) for s in schedule]
    except (TypeError, ValueError):
        raise MalformedSchedule(f"unknown schedule {schedule!r}") from None
    bad = [s for s in explicit if not 1 <= s <= m]
    if bad:
        raise MalformedSchedule(f"schedule names worker {bad[0]}, only 1..{m} exist")
    # an exhausted explicit schedule continues round-robin, which keeps it fair
    return itertools.chain(explicit, itertools.cycle(range(1, m + 1)))


def run_deterministic(p: Poset, oracle: QueryOracle, m: int, seed: int, schedule="round-robin",
                      trace: bool = True, max_steps: int | None = None) -> SearchOutcome:
    """Single-threaded interleaving: each schedule entry advances one worker by one step."""
    _validate(p, m)
    order = _schedule_iter(schedule, m, seed)
    started = time.perf_counter()
    run = _Run(p, oracle, m, seed, trace)
    gens = {w.s: run.steps(w) for w in run.workers}
    steps = 0
    limit = max_steps if max_steps is not None else 50 * (p.n + 1) * (p.n + 1) * m
    for s in order:
        if not gens:
            break
        if run.shared.stop is not None:
            break
        gen = gens.get(s)
        if gen is None:
            continue
        steps += 1
        if next(gen, None) is None:
            run.workers[s - 1].done = True
            del gens[s]
        if steps > limit:
            raise RuntimeError(f"no termination after {limit} steps")
    # let every live worker observe the stop cell
    for s, gen in list(gens.items()):
        steps += 1
        for _ in gen:
            pass
        run.workers[s - 1].done = True
    return run.outcome(started, steps, m)
