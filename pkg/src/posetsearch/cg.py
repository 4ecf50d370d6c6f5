"""Conceptual graphs and the homomorphism oracle.

A conceptual graph is a bipartite multigraph of typed concept nodes and
typed relation nodes; relation ``r`` has an edge labelled ``i`` to its
``i``-th argument.  ``g >= h`` when some mapping of g's nodes into h keeps
every edge and only specialises labels.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Sequence

from .poset import ParseError, Poset, PosetError, build_from_pairs


class MalformedGraph(PosetError):
    pass


class Vocabulary:
    """Two named label posets plus relation arities."""

    def __init__(self, concept_types: dict, relation_types: dict, arity: dict):
        # *_types map a type name to the list of its direct supertypes
        self.concepts = _label_poset(concept_types, "concept")
        self.relations = _label_poset(relation_types, "relation")
        self.arity = dict(arity)
        for name in relation_types:
            if name not in self.arity or self.arity[name] < 1:
                raise PosetError(f"relation type {name!r} needs a positive arity")
        for a, b in self.relations.strict_pairs() if self.relations else ():
            na, nb = self.relations.name_of(a), self.relations.name_of(b)
            if self.arity[na] != self.arity[nb]:
                raise PosetError(f"comparable relation types {na!r} and {nb!r} differ in arity")

    def concept_leq(self, a: str, b: str) -> bool:
        c = self.concepts
        return c.is_leq(c.index_of(a), c.index_of(b))

    def relation_leq(self, a: str, b: str) -> bool:
        r = self.relations
        return r.is_leq(r.index_of(a), r.index_of(b))


def _label_poset(types: dict, what: str) -> Poset:
    names = list(types)
    if not names:
        return None
    index = {n: i for i, n in enumerate(names, 1)}
    pairs = []
    for name, parents in types.items():
        for parent in parents:
            if parent not in index:
                raise PosetError(f"unknown {what} supertype {parent!r} of {name!r}")
            pairs.append((index[parent], index[name]))
    return build_from_pairs(len(names), pairs, names=names)


@dataclass(frozen=True)
class ConceptualGraph:
    name: str = ""
    concepts: tuple = ()  # (id, type)
    relations: tuple = ()  # (id, type, (arg concept ids...))

    @property
    def size(self) -> int:
        return len(self.concepts) + len(self.relations)

    def validate(self, v: Vocabulary) -> None:
        ids = {}
        for cid, ctype in self.concepts:
            if cid in ids:
                raise MalformedGraph(f"{self.name}: duplicate concept id {cid!r}")
            if v.concepts is None or ctype not in v.concepts._index:
                raise MalformedGraph(f"{self.name}: unknown concept type {ctype!r}")
            ids[cid] = ctype
        rids = set()
        for rid, rtype, args in self.relations:
            if rid in rids or rid in ids:
                raise MalformedGraph(f"{self.name}: duplicate node id {rid!r}")
            rids.add(rid)
            if v.relations is None or rtype not in v.relations._index:
                raise MalformedGraph(f"{self.name}: unknown relation type {rtype!r}")
            if len(args) != v.arity[rtype]:
                raise MalformedGraph(f"{self.name}: relation {rid!r} has {len(args)} arguments, {rtype} takes {v.arity[rtype]}")
            for a in args:
                if a not in ids:
                    raise MalformedGraph(f"{self.name}: relation {rid!r} references missing concept {a!r}")

    def with_duplicate_relation(self, rid: str, new_id: str | None = None) -> "ConceptualGraph":
        """Copy of the graph with relation ``rid`` repeated under a new id."""
        for r in self.relations:
            if r[0] == rid:
                dup = (new_id or f"{rid}'", r[1], r[2])
                return ConceptualGraph(self.name + "+dup", self.concepts, self.relations + (dup,))
        raise KeyError(rid)


@dataclass(frozen=True)
class HomWitness:
    concepts: dict
    relations: dict


def is_homomorphism(g: ConceptualGraph, h: ConceptualGraph, v: Vocabulary, w: HomWitness) -> bool:
    hc = dict(h.concepts)
    hr = {rid: (rtype, tuple(args)) for rid, rtype, args in h.relations}
    for cid, ctype in g.concepts:
        img = w.concepts.get(cid)
        if img not in hc or not v.concept_leq(hc[img], ctype):
            return False
    for rid, rtype, args in g.relations:
        img = w.relations.get(rid)
        if img not in hr:
            return False
        itype, iargs = hr[img]
        if not v.relation_leq(itype, rtype):
            return False
        if tuple(w.concepts[a] for a in args) != iargs:
            return False
    return True


def hom_exists(g: ConceptualGraph, h: ConceptualGraph, v: Vocabulary) -> HomWitness | None:
    """Backtracking search for a homomorphism from ``g`` to ``h``."""
    g.validate(v)
    h.validate(v)
    # concept candidates by label
    cand = {}
    for cid, ctype in g.concepts:
        cand[cid] = {c for c, t in h.concepts if v.concept_leq(t, ctype)}
        if not cand[cid]:
            return None
    degree = {cid: 0 for cid, _ in g.concepts}
    for _, _, args in g.relations:
        for a in args:
            degree[a] += 1
    # relations in descending degree of their arguments
    rels = sorted(g.relations, key=lambda r: -sum(degree[a] for a in r[2]))
    options = []
    for rid, rtype, args in rels:
        opts = [
            (hid, hargs)
            for hid, htype, hargs in h.relations
            if len(hargs) == len(args) and v.relation_leq(htype, rtype)
            and all(b in cand[a] for a, b in zip(args, hargs))
        ]
        if not opts:
            return None
        options.append((rid, args, opts))

    cmap: dict = {}
    rmap: dict = {}

    def place(i):
        if i == len(options):
            return True
        rid, args, opts = options[i]
        for hid, hargs in opts:
            added = []
            ok = True
            for a, b in zip(args, hargs):
                cur = cmap.get(a)
                if cur is None:
                    cmap[a] = b
                    added.append(a)
                elif cur != b:
                    ok = False
                    break
            if ok:
                rmap[rid] = hid
                if place(i + 1):
                    return True
                del rmap[rid]
            for a in added:
                del cmap[a]
        return False

    if not place(0):
        return None
    # isolated concepts carry no edge constraints
    for cid, _ in g.concepts:
        if cid not in cmap:
            cmap[cid] = min(cand[cid])
    w = HomWitness(dict(cmap), dict(rmap))
    if not is_homomorphism(g, h, v, w):
        raise AssertionError("backtracking produced an invalid homomorphism")
    return w


def cg_geq(g, h, v) -> bool:
    return hom_exists(g, h, v) is not None


def hom_equivalent(g, h, v) -> bool:
    return cg_geq(g, h, v) and cg_geq(h, g, v)


EMPTY = ConceptualGraph("(empty)")


@dataclass
class CGDataset:
    poset: Poset
    representatives: list  # index i - 1 holds element i's graph; None for the bottom sentinel
    vocabulary: Vocabulary
    members: list = field(default_factory=list)  # input positions collapsed into each element
    hom_checks: int = 0

    @property
    def sentinel(self) -> int:
        return self.poset.n

    def graph(self, x: int):
        return self.representatives[x - 1]


def build_dataset(graphs: Sequence[ConceptualGraph], v: Vocabulary) -> CGDataset:
    """Order graphs by homomorphism, one element per equivalence class.

    Element 1 is the empty graph (added if missing), element n a bottom
    sentinel that carries no graph.
    """
    graphs = list(graphs)
    for g in graphs:
        g.validate(v)
    checks = 0
    k = len(graphs)
    geq = [[False] * k for _ in range(k)]
    for i in range(k):
        for j in range(k):
            if i == j:
                geq[i][j] = True
            else:
                geq[i][j] = cg_geq(graphs[i], graphs[j], v)
                checks += 1
    classes: list = []
    owner = [None] * k
    for i in range(k):
        if owner[i] is not None:
            continue
        cls = [j for j in range(k) if owner[j] is None and geq[i][j] and geq[j][i]]
        for j in cls:
            owner[j] = len(classes)
        classes.append(cls)
    reps = [min(cls, key=lambda j: (graphs[j].size, j)) for cls in classes]

    empty_class = next((c for c, r in enumerate(reps) if graphs[r].size == 0), None)
    order = list(range(len(classes)))
    if empty_class is not None:
        order.remove(empty_class)
        order.insert(0, empty_class)
        elems = [graphs[reps[c]] for c in order]
        members = [classes[c] for c in order]
    else:
        elems = [EMPTY] + [graphs[reps[c]] for c in order]
        members = [[]] + [classes[c] for c in order]
    n = len(elems) + 1
    pairs = []
    offset = 1 if empty_class is None else 0
    for a_pos, ca in enumerate(order):
        for b_pos, cb in enumerate(order):
            if ca != cb and geq[reps[ca]][reps[cb]]:
                pairs.append((a_pos + 1 + offset, b_pos + 1 + offset))
    if empty_class is None:
        pairs.extend((1, x) for x in range(2, n))
    pairs.extend((x, n) for x in range(1, n))
    poset = build_from_pairs(n, pairs)
    return CGDataset(poset, elems + [None], v, members + [[]], checks)


class CGQueryOracle:
    """``geq(x)``: representative maps into q; ``leq(x)``: q maps into it."""

    def __init__(self, dataset: CGDataset, q: ConceptualGraph):
        q.validate(dataset.vocabulary)
        self.dataset = dataset
        self.query = q
        self.hom_calls = 0
        self.sentinel_answers = 0
        self._lock = threading.Lock()

    def _count(self, sentinel):
        with self._lock:
            if sentinel:
                self.sentinel_answers += 1
            else:
                self.hom_calls += 1

    def geq(self, x: int) -> bool:
        g = self.dataset.graph(x)
        self._count(g is None)
        return g is not None and cg_geq(g, self.query, self.dataset.vocabulary)

    def leq(self, x: int) -> bool:
        g = self.dataset.graph(x)
        self._count(g is None)
        return g is not None and cg_geq(self.query, g, self.dataset.vocabulary)


def cg_query_oracle(dataset: CGDataset, q: ConceptualGraph) -> CGQueryOracle:
    return CGQueryOracle(dataset, q)


# text format


@dataclass
class CGDocument:
    vocabulary: Vocabulary
    graphs: list

    def graph(self, name: str) -> ConceptualGraph:
        for g in self.graphs:
            if g.name == name:
                return g
        raise KeyError(name)


def parse_cg(text: str) -> CGDocument:
    ctypes: dict = {}
    rtypes: dict = {}
    arity: dict = {}
    graphs = []
    current = None

    def close():
        if current is not None:
            graphs.append(ConceptualGraph(current[0], tuple(current[1]), tuple(current[2])))

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        f = line.split()
        kw = f[0]
        if kw in ("concepttype", "relationtype"):
            if current is not None:
                raise ParseError("type declarations must precede graphs", lineno)
            if len(f) < 2:
                raise ParseError(f"{kw} needs a name", lineno)
            name = f[1]
            parents = []
            if len(f) > 2:
                if f[2] != "<" or len(f) < 4:
                    raise ParseError("expected '< <parent> ...'", lineno)
                parents = f[3:]
            if kw == "concepttype":
                if name in ctypes:
                    raise ParseError(f"duplicate concept type {name!r}", lineno)
                ctypes[name] = parents
            else:
                if "/" not in name:
                    raise ParseError("relation type must be written name/arity", lineno)
                name, _, ar = name.partition("/")
                try:
                    arity[name] = int(ar)
                except ValueError:
                    raise ParseError(f"bad arity {ar!r}", lineno) from None
                if name in rtypes:
                    raise ParseError(f"duplicate relation type {name!r}", lineno)
                rtypes[name] = parents
        elif kw == "graph":
            if len(f) != 2:
                raise ParseError("expected 'graph <name>'", lineno)
            close()
            current = (f[1], [], [])
        elif kw == "c":
            if current is None or len(f) != 3:
                raise ParseError("expected 'c <id> <type>' inside a graph", lineno)
            current[1].append((f[1], f[2]))
        elif kw == "r":
            if current is None or len(f) < 3:
                raise ParseError("expected 'r <id> <type> <concept>...' inside a graph", lineno)
            current[2].append((f[1], f[2], tuple(f[3:])))
        else:
            raise ParseError(f"unknown keyword {kw!r}", lineno)
    close()
    try:
        vocab = Vocabulary(ctypes, rtypes, arity)
    except PosetError as err:
        raise ParseError(str(err)) from err
    names = [g.name for g in graphs]
    if len(set(names)) != len(names):
        raise ParseError("graph names must be unique")
    for g in graphs:
        g.validate(vocab)
    return CGDocument(vocab, graphs)


def format_cg(doc: CGDocument) -> str:
    v = doc.vocabulary
    lines = []
    if v.concepts is not None:
        for x in v.concepts:
            parents = [v.concepts.name_of(p) for p in v.concepts.parents(x)]
            lines.append(" ".join(["concepttype", v.concepts.name_of(x)] + (["<"] + parents if parents else [])))
    if v.relations is not None:
        for x in v.relations:
            name = v.relations.name_of(x)
            parents = [v.relations.name_of(p) for p in v.relations.parents(x)]
            lines.append(" ".join(["relationtype", f"{name}/{v.arity[name]}"] + (["<"] + parents if parents else [])))
    for g in doc.graphs:
        lines.append(f"graph {g.name}")
        lines.extend(f"c {cid} {ctype}" for cid, ctype in g.concepts)
        lines.extend(" ".join(["r", rid, rtype, *args]) for rid, rtype, args in g.relations)
    return "\n".join(lines) + "\n"
