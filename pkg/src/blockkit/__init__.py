"""Posterior sampling of network divisions and invariant block extraction."""

__version__ = "0.1.0"

from ._backend import BACKEND, HAS_EXT
from .blocks import BlockResult, MergeTrace, describe_division, greedy_blocks
from .comembership import (
    comembership_counts,
    comembership_matrix,
    meet_partition,
    membership_classes,
    ring_distance_classes,
    stratified_histogram,
    write_matrix_csv,
)
from .generators import DcsbmParams, dcsbm_generate, ring_of_cliques
from .graph import Graph, GraphParseError, load_edge_list, load_gml, write_edge_list
from .partition import (
    NEW_COMMUNITY,
    GroupStats,
    Partition,
    PartitionState,
    compute_stats,
    delta_log_posterior,
    log_likelihood_marginal,
    log_posterior,
    log_prior,
)
from .rmi import (
    contingency,
    log_omega,
    log_omega_approx,
    log_omega_exact,
    mean_rmi,
    omega_exact,
    reduced_mutual_information,
    table_rmi,
)
from .sampler import SampleEnsemble, SamplerConfig, acceptance_log_ratio, sample

__all__ = [
    "BACKEND",
    "HAS_EXT",
    "Graph",
    "GraphParseError",
    "load_edge_list",
    "load_gml",
    "write_edge_list",
    "Partition",
    "GroupStats",
    "PartitionState",
    "NEW_COMMUNITY",
    "compute_stats",
    "delta_log_posterior",
    "log_likelihood_marginal",
    "log_posterior",
    "log_prior",
    "SamplerConfig",
    "SampleEnsemble",
    "sample",
    "acceptance_log_ratio",
    "contingency",
    "omega_exact",
    "log_omega",
    "log_omega_exact",
    "log_omega_approx",
    "table_rmi",
    "reduced_mutual_information",
    "mean_rmi",
    "comembership_counts",
    "comembership_matrix",
    "stratified_histogram",
    "ring_distance_classes",
    "membership_classes",
    "meet_partition",
    "write_matrix_csv",
    "MergeTrace",
    "BlockResult",
    "greedy_blocks",
    "describe_division",
    "ring_of_cliques",
    "DcsbmParams",
    "dcsbm_generate",
    "__version__",
]
