"""Specification advisor: metric, effective sample size, CV scheme, library.

All numeric cut-offs live in :class:`Bands` and can be overridden.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .dataset import AnalyticDataset, EffectiveSampleSize, effective_sample_size
from .engine import EslSpec, Library
from .errors import InputError
from .learners import LearnerSpec, ScreenerSpec
from .metrics import Metric, get_metric

GOALS = ("estimate_function", "rank_discriminate")
BUDGETS = ("low", "medium", "high")
_BUDGET_RANK = {b: i for i, b in enumerate(BUDGETS)}


@dataclass(frozen=True)
class Bands:
    loocv_below: int = 30
    v20_below: int = 500
    v10_below: int = 5_000
    v10_or_5_below: int = 10_000
    moderate_from: int = 500
    large_from: int = 5_000
    high_dim_ratio: float = 5.0


DEFAULT_BANDS = Bands()


@dataclass(frozen=True)
class TaskProfile:
    outcome_type: str
    prediction_goal: str
    n: int
    p: int
    n_rare: Optional[int] = None
    clustered: bool = False
    compute_budget: str = "medium"

    def __post_init__(self):
        if self.outcome_type not in ("continuous", "binary"):
            raise InputError(f"unknown outcome type {self.outcome_type!r}")
        if self.prediction_goal not in GOALS:
            raise InputError(f"prediction_goal must be one of {GOALS}")
        if self.compute_budget not in BUDGETS:
            raise InputError(f"compute_budget must be one of {BUDGETS}")
        if (self.n_rare is not None) != (self.outcome_type == "binary"):
            raise InputError("n_rare is required for binary outcomes and only for them")
        if self.p < 1:
            raise InputError("p must be at least 1")


@dataclass(frozen=True)
class CVChoice:
    scheme: str
    v: Optional[int]  # None: one fold per unit


@dataclass
class Recommendation:
    metric: Metric
    n_eff: EffectiveSampleSize
    cv: CVChoice
    library: Library
    rationale: list = field(default_factory=list)


def recommend_metric(tp: TaskProfile) -> Metric:
    if tp.outcome_type == "continuous":
        return get_metric("mse")
    if tp.prediction_goal == "rank_discriminate":
        return get_metric("auc")
    return get_metric("nll")


def recommend_cv(n_eff: int, clustered: bool, binary: bool, budget: str = "medium",
                 n_rare: Optional[int] = None, bands: Bands = DEFAULT_BANDS) -> CVChoice:
    """Fold count from n_eff; scheme from clustering and outcome type.

    In the smallest band the answer is one fold per unit: leave-one-out,
    or leave-one-cluster-out for clustered data.  Binary outcomes there get
    stratified folds with one minority case each (``V = n_rare``) so every
    fold keeps both classes.
    """
    if n_eff < 2:
        raise InputError("n_eff must be at least 2")
    if n_eff < bands.loocv_below:
        if clustered:
            return CVChoice("clustered", None)
        if binary:
            return CVChoice("stratified", max(2, n_rare if n_rare is not None else n_eff // 5))
        return CVChoice("loocv", None)
    if n_eff < bands.v20_below:
        v = 20
    elif n_eff < bands.v10_below:
        v = 10
    elif n_eff < bands.v10_or_5_below:
        v = 10 if _BUDGET_RANK[budget] >= _BUDGET_RANK["medium"] else 5
    else:
        v = 5
    v = max(2, min(v, n_eff - 1))
    scheme = "clustered" if clustered else ("stratified" if binary else "vfold")
    return CVChoice(scheme, v)


def recommend_library(n_eff: int, p: int, budget: str = "medium", outcome_type: str = "continuous",
                      bands: Bands = DEFAULT_BANDS) -> Library:
    """Default library for the information in the data.

    Parametric learners always; kNN and trees from the moderate band;
    a forest from the large band with at least a medium budget.  When
    ``p > n_eff / high_dim_ratio`` the unpenalized GLM and kNN are coupled
    with screeners.  One convex-NNLS eSL over all candidates is appended.
    """
    if budget not in BUDGETS:
        raise InputError(f"budget must be one of {BUDGETS}")
    binary = outcome_type == "binary"
    high_dim = p > n_eff / bands.high_dim_ratio
    top_k = max(1, min(p, n_eff // 10))
    glm = "logistic" if binary else "ols"
    c = [LearnerSpec("mean", "intercept")]
    if high_dim:
        c.append(LearnerSpec(f"{glm}_lasso_screen", glm,
                             screener=ScreenerSpec("lasso_screen", {"lambda_ratio": 0.5})))
        c.append(LearnerSpec(f"{glm}_corr_top{top_k}", glm,
                             screener=ScreenerSpec("corr_top_k", {"k": top_k})))
    else:
        c.append(LearnerSpec(glm, glm))
    c += [
        LearnerSpec("ridge_0.1", "ridge", {"lambda": 0.1}),
        LearnerSpec("ridge_1", "ridge", {"lambda": 1.0}),
        LearnerSpec("lasso_r0.05", "lasso", {"lambda_ratio": 0.05}),
        LearnerSpec("lasso_r0.2", "lasso", {"lambda_ratio": 0.2}),
    ]
    if n_eff >= bands.moderate_from or high_dim:
        for k in (5, 25):
            if high_dim:
                c.append(LearnerSpec(f"knn_{k}_corr_top{top_k}", "knn", {"k": k},
                                     screener=ScreenerSpec("corr_top_k", {"k": top_k})))
            elif n_eff >= bands.moderate_from:
                c.append(LearnerSpec(f"knn_{k}", "knn", {"k": k}))
    if n_eff >= bands.moderate_from:
        c += [LearnerSpec("tree_d3", "tree", {"max_depth": 3}),
              LearnerSpec("tree_d6", "tree", {"max_depth": 6})]
    if n_eff >= bands.large_from and _BUDGET_RANK[budget] >= _BUDGET_RANK["medium"]:
        c.append(LearnerSpec("forest", "forest", {"trees": 100 if budget == "medium" else 300}))
    return Library(tuple(c), (EslSpec("esl_convex", "nnls_convex"),))


def recommend(d: AnalyticDataset, goal: str = "estimate_function", budget: str = "medium",
              bands: Bands = DEFAULT_BANDS) -> Recommendation:
    ess = effective_sample_size(d)
    tp = TaskProfile(
        outcome_type=d.outcome_type, prediction_goal=goal, n=ess.n, p=d.p, n_rare=ess.n_rare,
        clustered=d.cluster_id is not None, compute_budget=budget,
    )
    metric = recommend_metric(tp)
    cv = recommend_cv(ess.n_eff, tp.clustered, d.is_binary, budget, ess.n_rare, bands)
    lib = recommend_library(ess.n_eff, d.p, budget, d.outcome_type, bands)
    why = [
        f"Step 1: metric {metric.id} ({metric.orientation}) for a {d.outcome_type} outcome"
        f" with goal {goal}",
        "Step 2: n_eff = " + (
            f"min(n, 5 * n_rare) = min({ess.n}, 5 * {ess.n_rare}) = {ess.n_eff}" if d.is_binary
            else f"n = {ess.n_eff}"
        ) + (" (n counts clusters)" if tp.clustered else ""),
        f"Step 3: {cv.scheme} CV with V = {'one fold per unit' if cv.v is None else cv.v}",
        f"Step 4: {len(lib.candidates)} candidates ("
        + ", ".join(s.name for s in lib.candidates) + ")",
        "Step 5: convex NNLS eSL evaluated by nested CV alongside the candidates; "
        "the discrete SL picks the winner",
    ]
    return Recommendation(metric, ess, cv, lib, why)
