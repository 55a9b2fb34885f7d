"""Trust-network rating prediction with biased random walks."""
from .centrality import (CentralityScore, avg_neighbor_degree, centrality_score,
                         classic_hindex, impact_factor)
from .data import (Dataset, MaskedRatings, RatingScale, RatingTable, SocialGraph,
                   load_dataset, load_ratings, load_social, sparsity)
from .errors import (DataError, DomainError, ParseError, SinkError, TrustWalkError,
                     UnknownEntityError, ValidationError)
from .evaluation import (EvalConfig, EvalReport, baseline_cf_pearson, f_measure,
                         loo_evaluate, mae, precision_from_rmse, rmse)
from .network import NetworkConfig, TrustEdge, TrustNetwork, build_network, compute_edge_weight
from .rules import (AssociationRule, FallbackRecommendation, RuleConfig,
                    interest_threshold, lift, mine_rules, recommend_fallback)
from .similarity import PairSimilarity, pearson, sim_con, sim_deg, sim_item
from .walker import (PredictionResult, WalkConfig, WalkOutcome, predict, single_walk,
                     step_distribution, stop_probability)

__version__ = "0.1.0"

__all__ = [
    "AssociationRule", "CentralityScore", "DataError", "Dataset", "DomainError",
    "EvalConfig", "EvalReport", "FallbackRecommendation", "MaskedRatings", "NetworkConfig",
    "PairSimilarity", "ParseError", "PredictionResult", "RatingScale", "RatingTable",
    "RuleConfig", "SinkError", "SocialGraph", "TrustEdge", "TrustNetwork", "TrustWalkError",
    "UnknownEntityError", "ValidationError", "WalkConfig", "WalkOutcome",
    "avg_neighbor_degree", "baseline_cf_pearson", "build_network", "centrality_score",
    "classic_hindex", "compute_edge_weight", "f_measure", "impact_factor",
    "interest_threshold", "lift", "load_dataset", "load_ratings", "load_social", "loo_evaluate",
    "mae", "mine_rules", "pearson", "precision_from_rmse", "predict", "recommend_fallback",
    "rmse", "sim_con", "sim_deg", "sim_item", "single_walk", "sparsity", "step_distribution",
    "stop_probability",
]
