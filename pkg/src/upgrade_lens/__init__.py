"""upgrade-lens: call-graph profiling of dependency upgrades.

Load or extract a call graph, diff it across versions, compute graph
metrics and statistical comparisons over the changed/unchanged
partition, rank function criticality with a centrality-weighted
attention scorer, and map SBOM package versions to known
vulnerabilities.
"""

from .attention import (
    FEATURE_COLUMNS,
    AttentionMap,
    AttentionParams,
    GraphAttentionScorer,
    NodeScores,
    ScoreSummary,
    TrainingConfig,
    aggregate,
    attention_coefficients,
    build_features,
    centrality_edge_weights,
    default_params,
    node_scores,
    train_attention,
)
from .decomposition import PrincipalComponents, pca_project
from .diffing import (
    ComparisonTable,
    UpgradeComparison,
    comparison_table,
    cross_partition_edges,
    diff_versions,
    mark_critical,
    partition_subgraphs,
)
from .errors import (
    DomainError,
    IntegrityError,
    ParseError,
    TransportError,
    UpgradeLensError,
)
from .extract import extract_call_graph
from .graph import (
    CallEdge,
    CallGraph,
    FunctionNode,
    GraphBuilder,
    import_codeql_edges,
    induced_subgraph,
    load_graph,
    save_graph,
    undirected_projection,
)
from .metrics import (
    MetricsReport,
    NodeMetrics,
    betweenness_centrality,
    closeness_centrality,
    clustering_coefficients,
    connected_components,
    cyclomatic_complexity,
    degree_assortativity,
    degree_centrality,
    density,
    feature_norms,
    metrics_report,
    node_metrics,
)
from .osv import FixtureTransport, LiveTransport, query_osv, query_osv_batch
from .sbom import (
    RemediationPlan,
    SbomPackage,
    VulnerabilityRecord,
    map_vulnerabilities,
    parse_purl,
    parse_sbom,
)
from .stats import (
    StatTestResult,
    closeness_histogram,
    compare_changed_vs_all,
    ks_two_sample,
    welch_t_test,
)

__version__ = "0.1.0"
