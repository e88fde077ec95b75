"""Cuckoo hashing with a stash over an explicit hash family, with cuckoo-graph
analysis tools and a simulated uniform hash function."""

from .cuckoo_graph import (
    CuckooGraph, build_graph, components, count_cyclic_components, cyclomatic_number, excess,
    is_leafless, two_core,
)
from .cuckoo_table import CuckooTable, InsertOutcome, RehashFailure, StashOverflow, new_table
from .hash_families import (
    MERSENNE61, ExplicitPair, FullyRandomPair, KWiseHash, SetClass, ZHashPair, classify_set,
    deficiency, eval_kwise, eval_zpair, random_keys, sample_kwise, sample_zpair,
)
from .oracles import excess_oracle, feasible_with_stash_oracle
from .uniform_sim import UniformDS, build_uniform, eval_uniform, memory_report

__version__ = "0.1.0"
