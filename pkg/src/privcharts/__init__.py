"""Differentially private chart publishing with user-steerable pattern constraints."""

from .data import (
    CATEGORICAL,
    NUMERICAL,
    Attribute,
    DataError,
    Dataset,
    Discretization,
    FilterSpec,
    apply_filter,
    discretize,
    discretize_all,
    infer_schema,
    load_csv,
    to_csv,
)
from .mechanisms import (
    ORACLE,
    BudgetLedger,
    BudgetSpec,
    MechanismError,
    NoiseSource,
    exponential_probabilities,
    exponential_select,
    laplace_mechanism,
    laplace_noise,
    split_budget,
)
from .bayesnet import (
    APPair,
    BayesianNetwork,
    JointTable,
    NetworkError,
    entropy,
    joint_table,
    kl_decomposition_check,
    learn_structure,
    mi_sensitivity,
    mutual_information,
    topological_order,
    weighted_mutual_information,
)
from .charts import (
    ChartData,
    ChartError,
    ChartSpec,
    PatternCatalog,
    PatternConstraint,
    Selection,
    render_chart_data,
    resolve_pattern,
)
from .engine import (
    ConditionalTable,
    EngineError,
    MixtureWeights,
    NoisyMarginal,
    Scheme,
    derive_conditionals,
    generate_scheme,
    load_scheme,
    mixture_weights,
    noisy_marginals,
    sample_synthetic,
    save_scheme,
)
from .metrics import (
    MetricsReport,
    cluster_metric,
    cs_pvalue,
    dtw,
    euclidean_bars,
    evaluate_scheme,
    ks_statistic,
    ndcg,
    pearson_diff,
    wasserstein_1d,
)
from .analytics import (
    FlowData,
    NetworkLayout,
    RelationshipGraph,
    influence_edges,
    mds_layout,
    network_layout,
    node_distributions,
    pattern_distance,
    relationship_graph,
    sankey_flow,
)

__version__ = "0.1.0"
