"""Two-event structural correlation (TESC) testing on large graphs.

Measures whether two node events on a graph attract or repel each other at
a chosen vicinity scale: reference nodes are sampled from the joint
vicinity of all event nodes, both events' local densities are compared at
every pair of reference nodes, and the average concordance is tested for
significance against the tie-adjusted null distribution.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .engine import (
    LevelOutcome,
    TescResult,
    TestConfig,
    evaluate_densities,
    sweep_levels,
    test_correlation,
)
from .errors import DegenerateTieError, ParseError, SimulationError, TescError
from .graph import (
    BfsScratch,
    EventSet,
    Graph,
    batch_bfs,
    h_hop_bfs,
    load_edge_list,
    load_event_set,
    load_label_map,
    union_nodes,
    vicinity_density,
)
from .sampling import (
    ReferenceSample,
    default_batch_k,
    reject_samp,
    sample_batch_bfs,
    sample_importance,
    sample_whole_graph,
)
from .stats import (
    DensityVector,
    TieProfile,
    concordance,
    kendall_t,
    null_variance,
    tau_b_transaction,
    tie_profile,
    weighted_t,
    z_and_p,
)
from .vicinity import VicinityIndex, build_vicinity_index

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "__version__",
    # graph
    "Graph",
    "EventSet",
    "BfsScratch",
    "load_edge_list",
    "load_event_set",
    "load_label_map",
    "union_nodes",
    "h_hop_bfs",
    "batch_bfs",
    "vicinity_density",
    # index
    "VicinityIndex",
    "build_vicinity_index",
    # stats
    "DensityVector",
    "TieProfile",
    "concordance",
    "kendall_t",
    "tie_profile",
    "null_variance",
    "z_and_p",
    "weighted_t",
    "tau_b_transaction",
    # sampling
    "ReferenceSample",
    "sample_batch_bfs",
    "sample_importance",
    "sample_whole_graph",
    "reject_samp",
    "default_batch_k",
    # engine
    "TestConfig",
    "TescResult",
    "LevelOutcome",
    "test_correlation",
    "sweep_levels",
    "evaluate_densities",
    # errors
    "TescError",
    "ParseError",
    "DegenerateTieError",
    "SimulationError",
]
