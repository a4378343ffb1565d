"""Variable-download private information retrieval on graph-replicated storage.

Files live on exactly two servers each (storage graph = servers as vertices,
files as edges). Two unit-subpacketization retrieval schemes are provided,
one specialized for star graphs and one for arbitrary (multi)graphs, together
with exact privacy audits, statistical audits, and download/rate measurement
against the known capacity bounds for the standard graph families.
"""

from .audit import (
    assert_theta_independence,
    enumerate_graph,
    enumerate_star,
    per_bit_uniformity,
    statistical_audit,
)
from .distributions import AuditReport, ExactDistribution, tv_distance
from .errors import DecodeError, ParseError, ProtocolError, SizeLimitError
from .families import generate_family
from .general import (
    GraphQueryVector,
    decode,
    expected_download,
    generate_queries,
    graph_file_store,
    null_query_probability,
    queries_from_coins,
    rate_bounds,
    run_graph_transcript,
    server_respond,
)
from .graphs import (
    Edge,
    FileStore,
    IndependentPartition,
    StorageGraph,
    alpha_first_partition,
    classify_edges,
    exact_max_independent_set,
    greedy_independent_partition,
    make_edge,
    multigraph_extend,
    parse_edge_list,
    serialize_edge_list,
)
from .rates import GraphConfig, baseline_table, monte_carlo_rate, sweep_records
from .star import (
    QueryMatrix,
    StarParams,
    StarQueryBundle,
    optimize_params,
    run_star_transcript,
    star_decode,
    star_exact_distribution,
    star_expected_download,
    star_file_store,
    star_generate_queries,
    star_hub_respond,
    star_spoke_respond,
    download_guarantee,
)

__version__ = "0.1.0"

__all__ = [
    "AuditReport",
    "DecodeError",
    "Edge",
    "ExactDistribution",
    "FileStore",
    "GraphConfig",
    "GraphQueryVector",
    "IndependentPartition",
    "ParseError",
    "ProtocolError",
    "QueryMatrix",
    "SizeLimitError",
    "StarParams",
    "StarQueryBundle",
    "StorageGraph",
    "alpha_first_partition",
    "assert_theta_independence",
    "baseline_table",
    "classify_edges",
    "decode",
    "enumerate_graph",
    "enumerate_star",
    "exact_max_independent_set",
    "expected_download",
    "generate_family",
    "generate_queries",
    "graph_file_store",
    "greedy_independent_partition",
    "make_edge",
    "monte_carlo_rate",
    "multigraph_extend",
    "null_query_probability",
    "optimize_params",
    "parse_edge_list",
    "per_bit_uniformity",
    "queries_from_coins",
    "rate_bounds",
    "run_graph_transcript",
    "run_star_transcript",
    "serialize_edge_list",
    "server_respond",
    "star_decode",
    "star_exact_distribution",
    "star_expected_download",
    "star_file_store",
    "star_generate_queries",
    "star_hub_respond",
    "star_spoke_respond",
    "statistical_audit",
    "sweep_records",
    "download_guarantee",
    "tv_distance",
]
