"""rumorcut: budgeted edge deletion against simulated rumor cascades.

The package combines a discrete-time SIR simulator, hand-crafted structural
features, an edge-embedding network over the graph and its line graph, a
policy-gradient training loop, and seven classical interdiction baselines,
all behind a scikit-learn-style estimator API and a reproducible CLI.
"""

__version__ = "0.1.0"

from .baselines import BASELINE_METHODS, BaselineConfig, run_baseline
from .environment import (
    DeletionPlan,
    EpisodeState,
    GeneratorConfig,
    default_budget,
    random_graph,
    reset,
    step,
)
from .errors import (
    CheckpointError,
    EdgeListParseError,
    PowerIterationError,
    SimulationDivergenceError,
    TrainingDivergedError,
)
from .estimator import BaselinePlanner, RumorCutAgent
from .features import FeatureMatrix, compute_features, diffusion_importance
from .graph import (
    CommunityAssignment,
    LineGraph,
    SocialGraph,
    betweenness,
    bfs_distances,
    build_line_graph,
    closeness,
    detect_communities,
    dominant_eigenvectors,
    load_edge_list,
    pagerank,
)
from .neural import (
    ABLATION_SWITCHES,
    Ablation,
    GnnConfig,
    Parameters,
    backward,
    gnn_forward,
    init_parameters,
    load_parameters,
    save_parameters,
)
from .policy import (
    PolicyOutput,
    community_embeddings,
    feasible_mask,
    greedy_action,
    policy_output,
    sample_action,
    score_edges,
)
from .propagation import (
    ImpactEstimate,
    PropagationTrace,
    SirParams,
    bond_percolation_sample,
    estimate_impact,
    exact_expected_spread,
    simulate_sir,
    transmissibility,
)
from .training import (
    EpisodeLog,
    MitigationReport,
    SourceResult,
    TrainConfig,
    evaluate,
    score_plan,
    train,
)
