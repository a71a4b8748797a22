"""Dynamic graph random walks on O(1)-state parallel reservoir sampling.

The package is organized around the pieces of the walk pipeline:

* ``graph``    — CSR storage, loaders, synthetic weights/labels
* ``rng``      — counter-based per-lane random streams
* ``samplers`` — the six weighted sampling methods over a lane group
* ``apps``     — DeepWalk / PPR / Node2Vec / MetaPath transition oracles
* ``engine``   — two-stage degree-aware scheduler with task pools
* ``stats``    — distribution oracles (TVD, chi-square, enumerations)
* ``trials``   — batched verification/benchmark harness
* ``cli``      — the ``reswalk`` command
"""

from .apps import AppConfig, WalkQuery
from .engine import EngineConfig, GlobalPool, RunStats, batch_size, run, run_batches
from .graph import Graph, build_csr, load_binary, parse_edge_list, save_binary
from .rng import RngStream, make_stream
from .samplers import (LaneGroup, PrefixBuffer, Selection, WeightOracle,
                       alias_build, alias_sample, dprs, its, rjs,
                       sequential_rs, zprs)

__version__ = "0.1.0"

__all__ = [
    "AppConfig", "WalkQuery", "EngineConfig", "GlobalPool", "RunStats",
    "batch_size", "run", "run_batches", "Graph", "build_csr", "load_binary",
    "parse_edge_list", "save_binary", "RngStream", "make_stream", "LaneGroup",
    "PrefixBuffer", "Selection", "WeightOracle", "alias_build", "alias_sample",
    "dprs", "its", "rjs", "sequential_rs", "zprs", "__version__",
]
