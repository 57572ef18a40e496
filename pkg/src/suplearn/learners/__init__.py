"""Candidate-learner zoo: base algorithms, screeners and their couplings."""
from .candidate import TrainedCandidate, predict_candidate, train_candidate
from .linear import coordinate_descent_lasso, irls_logistic, lambda_max, soft_threshold
from .screeners import run_screener
from .specs import BASES, SCREENERS, LearnerSpec, ScreenerSpec

__all__ = [
    "BASES",
    "SCREENERS",
    "LearnerSpec",
    "ScreenerSpec",
    "TrainedCandidate",
    "coordinate_descent_lasso",
    "irls_logistic",
    "lambda_max",
    "predict_candidate",
    "run_screener",
    "soft_threshold",
    "train_candidate",
]
