"""Command line entry point: gen, analyze, validate, search, bench."""
from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass

from . import generate
from .cg import CGDocument, MalformedGraph, build_dataset, cg_query_oracle, parse_cg
from .lattice import NotLattice, NotMatryoshka, build_chain, check_lattice, join_irreducibles, tree_like
from .oracle import ExplicitOracle, InconsistentVirtualQuery, VirtualQuery, random_virtual_query
from .parallel import search_parallel
from .poset import Poset, PosetError, format_poset, parse_poset
from .search import search_matryoshka, search_sequential, search_sequential_dual

EXIT_FOUND = 0
EXIT_ERROR = 1
EXIT_ABSENT = 3

FIELDS = (
    "algorithm", "n", "m", "outcome", "geq_calls", "leq_calls", "duplicate_attempts",
    "requests", "code_comparisons", "restarts", "elapsed_ms", "seed",
)


@dataclass
class StatsRecord:
    algorithm: str
    n: int
    m: int | None
    outcome: str
    geq_calls: int
    leq_calls: int
    duplicate_attempts: int
    requests: int
    code_comparisons: int
    restarts: int
    elapsed_ms: float
    seed: int
    extra: dict | None = None

    @classmethod
    def from_outcome(cls, algorithm, n, outcome, seed, m=None, extra=None):
        st = outcome.stats
        restarts = sum(getattr(st, "restarts", []) or [])
        return cls(algorithm, n, m, outcome.describe(), st.geq_calls, st.leq_calls,
                   st.duplicate_attempts, st.requests, st.code_comparisons, restarts,
                   st.elapsed_ms, seed, extra)

    def items(self):
        for name in FIELDS:
            value = getattr(self, name)
            if value is None:
                value = "-"
            elif name == "elapsed_ms":
                value = f"{value:.3f}"
            yield name, value
        for k, v in (self.extra or {}).items():
            yield k, v

    def line(self) -> str:
        return " ".join(f"{k}={v}" for k, v in self.items())

    def pretty(self) -> str:
        width = max(len(k) for k, _ in self.items())
        return "\n".join(f"{k:<{width}}  {v}" for k, v in self.items())


def format_record(rec: StatsRecord, fmt: str) -> str:
    return rec.pretty() if fmt == "pretty" else rec.line()


def parse_record(line: str) -> dict:
    return dict(tok.split("=", 1) for tok in line.split())


def _read(path):
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def load_any(text: str):
    """Parse a poset file or a CG file, told apart by the first keyword."""
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            if line.split()[0] == "poset":
                return parse_poset(text)
            return parse_cg(text)
    return parse_poset(text)


def parse_query_spec(spec: str, p: Poset, seed: int) -> VirtualQuery:
    """``target=<i>``, ``absent up=<i,..> down=<i,..>``, ``present`` or ``absent``."""
    fields = spec.split()
    if not fields:
        raise InconsistentVirtualQuery("empty query spec")
    head = fields[0]
    if head.startswith("target="):
        z = int(head.split("=", 1)[1])
        if not 1 <= z <= p.n:
            raise InconsistentVirtualQuery("target out of range", z)
        return VirtualQuery.present(p, z)
    if head == "present" and len(fields) == 1:
        return random_virtual_query(p, seed, True)
    if head == "absent":
        if len(fields) == 1:
            return random_virtual_query(p, seed, False)
        sets = {"up": frozenset(), "down": frozenset()}
        for f in fields[1:]:
            key, _, val = f.partition("=")
            if key not in sets:
                raise InconsistentVirtualQuery(f"unknown query field {key!r}")
            sets[key] = frozenset(int(v) for v in val.split(",") if v)
        inter = sets["up"] & sets["down"]
        vq = VirtualQuery(sets["up"], sets["down"], next(iter(inter)) if len(inter) == 1 else None)
        vq.validate(p)
        return vq
    raise InconsistentVirtualQuery(f"cannot read query spec {spec!r}")


def run_search(p: Poset, oracle, algorithm: str, m: int, seed: int, trace: bool, scheduler="random", chain=None):
    if algorithm == "seq":
        return search_sequential(p, oracle, trace=trace)
    if algorithm == "dual":
        return search_sequential_dual(p, oracle, trace=trace)
    if algorithm == "mat":
        return search_matryoshka(chain or build_chain(p), oracle, trace=trace)
    if algorithm == "par":
        return search_parallel(p, oracle, m=m, seed=seed, scheduler=scheduler, trace=trace)
    raise ValueError(f"unknown algorithm {algorithm!r}")


# commands


def cmd_gen(args, out):
    p = generate.from_spec(args.kind, args.params, args.seed)
    text = format_poset(p, comment=f"gen {args.kind} {' '.join(args.params)} seed={args.seed}")
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)
    return 0


def analyze_report(p: Poset, codes: bool = False) -> list:
    rows = [("elements", p.n)]
    try:
        lat = check_lattice(p)
    except NotLattice as err:
        x, y, reason = err.witness
        rows += [("lattice", "no"), ("witness", f"{x} {y} {reason}")]
        return rows
    ji = join_irreducibles(lat)
    rows += [("lattice", "yes"), ("join_irreducibles", len(ji)), ("ji_elements", ",".join(map(str, ji)))]
    try:
        ch = build_chain(lat)
    except NotMatryoshka as err:
        x, y, reason = err.witness
        rows += [("matryoshka", "no"), ("failing_level", err.level), ("witness", f"{x} {y} {reason}")]
        return rows
    rows += [
        ("matryoshka", "yes"),
        ("chain_sizes", ",".join(map(str, ch.sizes))),
        ("t", ch.t),
        ("terminal_tree_size", ch.tree.poset.n),
        ("terminal_tree_like", "yes" if tree_like(ch.tree.poset) else "no"),
    ]
    if codes:
        for level, table in enumerate(ch.codes):
            for x, c in table.items():
                rows.append((f"code[{level}]", f"{x} {c}"))
    return rows


def cmd_analyze(args, out):
    p = parse_poset(_read(args.file))
    rows = analyze_report(p, args.codes)
    if args.format == "record":
        out.write(" ".join(f"{k}={str(v).replace(' ', '_')}" for k, v in rows) + "\n")
    else:
        width = max(len(k) for k, _ in rows)
        for k, v in rows:
            out.write(f"{k:<{width}}  {v}\n")
    return 0


def cmd_validate(args, out):
    doc = load_any(_read(args.file))
    if isinstance(doc, Poset):
        out.write(f"ok poset n={doc.n} covers={len(doc.cover_edges)} top={doc.top} bottom={doc.bottom}\n")
    else:
        out.write(f"ok cg graphs={len(doc.graphs)}\n")
    return 0


def cmd_search(args, out):
    doc = load_any(_read(args.file))
    extra = None
    if isinstance(doc, CGDocument):
        if not args.query:
            raise PosetError("CG search needs --query <graph name>")
        q = doc.graph(args.query)
        ds = build_dataset([g for g in doc.graphs if g.name != args.query], doc.vocabulary)
        p = ds.poset
        oracle = cg_query_oracle(ds, q)
    else:
        p = doc
        oracle = ExplicitOracle(p, parse_query_spec(args.query or "present", p, args.seed))
    res = run_search(p, oracle, args.algorithm, args.m, args.seed, args.trace, args.scheduler)
    if isinstance(doc, CGDocument):
        extra = {"hom_calls": oracle.hom_calls, "sentinel_answers": oracle.sentinel_answers}
        if res.found is not None:
            extra["graph"] = ds.graph(res.found).name
    if args.trace:
        for line in res.trace:
            out.write(f"trace {line}\n")
    rec = StatsRecord.from_outcome(args.algorithm, p.n, res, args.seed,
                                   m=args.m if args.algorithm == "par" else None, extra=extra)
    out.write(format_record(rec, args.format) + "\n")
    return EXIT_FOUND if res.found is not None else EXIT_ABSENT


def _queries(p, kind, count, seed):
    rng = random.Random(f"bench:{seed}")
    for i in range(count):
        s = rng.randrange(1 << 30)
        if kind == "present":
            yield s, random_virtual_query(p, s, True)
        elif kind == "absent":
            yield s, random_virtual_query(p, s, False)
        elif kind == "mixed":
            yield s, random_virtual_query(p, s, rng.random() < 0.5)
        else:
            raise PosetError(f"unknown query distribution {kind!r}")


def run_bench(suite: dict, out, fmt="record"):
    out.write("# summary fields: generator algorithm runs mean_calls max_calls mean_requests max_requests\n")
    summaries = []
    for entry in suite.get("runs", []):
        kind = entry["generator"]
        params = [str(v) for v in entry.get("params", [])]
        seed = int(entry.get("seed", 0))
        p = generate.from_spec(kind, params, seed)
        algos = entry.get("algorithms", ["seq"])
        m = int(entry.get("m", 2))
        chain = None
        if "mat" in algos:
            chain = build_chain(p)
        label = ":".join([kind] + params)
        for algo in algos:
            calls, reqs = [], []
            for qseed, vq in _queries(p, entry.get("queries", "present"), int(entry.get("count", 10)), seed):
                res = run_search(p, ExplicitOracle(p, vq), algo, m, qseed, False, "random", chain)
                rec = StatsRecord.from_outcome(algo, p.n, res, qseed, m=m if algo == "par" else None,
                                               extra={"generator": label})
                out.write(format_record(rec, fmt) + "\n")
                calls.append(res.stats.oracle_calls)
                reqs.append(res.stats.requests)
            summaries.append((label, algo, calls, reqs))
    for label, algo, calls, reqs in summaries:
        if calls:
            out.write(
                f"summary generator={label} algorithm={algo} runs={len(calls)} "
                f"mean_calls={sum(calls) / len(calls):.3f} max_calls={max(calls)} "
                f"mean_requests={sum(reqs) / len(reqs):.3f} max_requests={max(reqs)}\n"
            )
    return summaries


def cmd_bench(args, out):
    suite = json.loads(_read(args.suite))
    run_bench(suite, out, args.format)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--trace", action="store_true", help="print one line per oracle call")
    common.add_argument("--format", choices=("record", "pretty"), default=None)

    parser = argparse.ArgumentParser(prog="posetsearch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate a poset file")
    g.add_argument("kind", choices=("chain", "boolean", "grid", "star", "random-poset"))
    g.add_argument("params", nargs="*")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    a = sub.add_parser("analyze", parents=[common], help="lattice and matryoshka report")
    a.add_argument("file")
    a.add_argument("--codes", action="store_true", help="include the binary code table")
    a.set_defaults(func=cmd_analyze, default_format="pretty")

    v = sub.add_parser("validate", parents=[common], help="parse and check a poset or CG file")
    v.add_argument("file")
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("search", parents=[common], help="run one search and print its stats record")
    s.add_argument("file")
    s.add_argument("-a", "--algorithm", choices=("seq", "dual", "mat", "par"), default="seq")
    s.add_argument("-q", "--query", help="poset: 'target=<i>', 'absent up=.. down=..', 'present', 'absent'; CG: graph name")
    s.add_argument("-m", type=int, default=2, help="workers for par")
    s.add_argument("--scheduler", default="random", choices=("random", "round-robin", "threads"))
    s.set_defaults(func=cmd_search)

    b = sub.add_parser("bench", parents=[common], help="run a JSON benchmark suite")
    b.add_argument("suite")
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = getattr(args, "default_format", "record")
    try:
        return args.func(args, out)
    except (PosetError, MalformedGraph, KeyError, ValueError, OSError, json.JSONDecodeError) as err:
        msg = err.args[0] if isinstance(err, KeyError) and err.args else err
        print(f"posetsearch: error: {msg}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
