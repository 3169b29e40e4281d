# Domain services
from .rank_aggregation import AggregationMethod, borda, rra, single_model
from .ranking_metrics import evaluate_run, ndcg_at_k
from .theorem_verifier import verify_listwise, verify_pairwise, verify_pointwise
