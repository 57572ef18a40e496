"""Cross-validated super learner.

Trains a library of candidate learners under V-fold cross-validation,
then selects (discrete SL) or combines (NNLS ensemble SL) them using their
out-of-fold predictions.  :mod:`suplearn.advisor` derives a sensible
metric, CV scheme and library from the data.
"""
from .advisor import recommend, recommend_cv, recommend_library, recommend_metric
from .dataset import AnalyticDataset, effective_sample_size, load_csv, preprocess
from .engine import (
    EslSpec,
    Library,
    Provenance,
    SuperLearnerFit,
    cross_validate_library,
    fit_dsl,
    fit_dsl_with_esl_candidates,
    fit_esl,
    sl_predict,
)
from .folds import assign_clustered, assign_loocv, assign_stratified, assign_vfold, folds_for_dataset
from .learners import LearnerSpec, ScreenerSpec, predict_candidate, train_candidate
from .metalearners import discrete_select, meta_predict, nnls, normalize_weights
from .metrics import auc, get_metric, mse, nll, truncate_predictions
from .persist import load_fit, save_fit

__version__ = "0.1.0"

__all__ = [
    "AnalyticDataset",
    "EslSpec",
    "LearnerSpec",
    "Library",
    "Provenance",
    "ScreenerSpec",
    "SuperLearnerFit",
    "assign_clustered",
    "assign_loocv",
    "assign_stratified",
    "assign_vfold",
    "auc",
    "cross_validate_library",
    "discrete_select",
    "effective_sample_size",
    "fit_dsl",
    "fit_dsl_with_esl_candidates",
    "fit_esl",
    "folds_for_dataset",
    "get_metric",
    "load_csv",
    "load_fit",
    "meta_predict",
    "mse",
    "nll",
    "nnls",
    "normalize_weights",
    "predict_candidate",
    "preprocess",
    "recommend",
    "recommend_cv",
    "recommend_library",
    "recommend_metric",
    "save_fit",
    "sl_predict",
    "train_candidate",
    "truncate_predictions",
]
