"""Searching partially ordered datasets with few expensive comparisons."""
from .poset import (
    CycleDetected, DescendantList, IndexOutOfRange, ParseError, Poset, PosetError,
    RelativeSets, build_from_pairs, format_poset, parse_poset,
)
from .oracle import (
    ExplicitOracle, InconsistentVirtualQuery, Ledger, QueryOracle, VirtualQuery,
    explicit_oracle, random_virtual_query, with_ledger,
)
from .lattice import (
    BinaryCode, Lattice, MatryoshkaChain, NotATree, NotLattice, NotMatryoshka,
    assign_codes, build_chain, check_lattice, is_terminal, join_irreducibles, reduce, tree_like,
)
from .search import (
    SearchOutcome, SearchStats, extend_code, search_matryoshka, search_sequential,
    search_sequential_dual, tree_code_search,
)
from .parallel import run_deterministic, search_parallel
from .cg import (
    ConceptualGraph, Vocabulary, build_dataset, cg_geq, cg_query_oracle, hom_equivalent, hom_exists,
)

__version__ = "0.1.0"
