"""Losses, performance metrics, prediction truncation and CV-risk aggregation."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, InputError, LengthMismatch, SingleClass

NLL_EPS = 1e-12


def _pair(y, yhat):
    y = np.asarray(y, dtype=float).ravel()
    yhat = np.asarray(yhat, dtype=float).ravel()
    if y.size != yhat.size:
        raise LengthMismatch(f"y has {y.size} entries, predictions have {yhat.size}")
    if y.size == 0:
        raise EmptyInput("cannot evaluate a metric on zero observations")
    return y, yhat


def _cluster_mean(losses, cluster_id):
    """Mean over clusters of the within-cluster mean loss."""
    if cluster_id is None:
        return float(np.mean(losses))
    cluster_id = np.asarray(cluster_id).ravel()
    if cluster_id.size != losses.size:
        raise LengthMismatch("cluster_id length differs from y")
    _, codes = np.unique(cluster_id, return_inverse=True)
    sums = np.bincount(codes, weights=losses)
    counts = np.bincount(codes)
    return float(np.mean(sums / counts))


def mse(y, yhat, cluster_id=None) -> float:
    y, yhat = _pair(y, yhat)
    return _cluster_mean((y - yhat) ** 2, cluster_id)


def nll(y, p, cluster_id=None, eps: float = NLL_EPS) -> float:
    """Binomial negative log-likelihood with ``p`` clamped to ``[eps, 1 - eps]``."""
    y, p = _pair(y, p)
    if not np.all(np.isfinite(p)):
        raise InputError("probabilities must be finite")
    p = np.clip(p, eps, 1.0 - eps)
    losses = -(y * np.log(p) + (1.0 - y) * np.log1p(-p))
    return _cluster_mean(losses, cluster_id)


def midranks(a) -> np.ndarray:
    """1-based ranks with ties sharing the average of their positions."""
    a = np.asarray(a, dtype=float).ravel()
    _, inv, counts = np.unique(a, return_inverse=True, return_counts=True)
    # first rank of each tie block, then centre of the block
    start = np.concatenate(([1], 1 + np.cumsum(counts)[:-1]))
    return (start + (counts - 1) / 2.0)[inv]


def auc(y, p, cluster_id=None) -> float:
    """Mann-Whitney AUC: share of event/non-event pairs ranked correctly, ties 1/2.

    Uses the rank-sum identity with midranks, O(n log n).  Cluster ids are
    accepted but ignored (rows are pooled) with a warning.
    """
    y, p = _pair(y, p)
    if cluster_id is not None:
        warnings.warn("AUC has no cluster-level form here; rows are pooled", stacklevel=2)
    pos = y == 1
    n1 = int(np.count_nonzero(pos))
    n0 = y.size - n1
    if n1 == 0 or n0 == 0:
        raise SingleClass("AUC needs both outcome classes")
    r1 = float(np.sum(midranks(p)[pos]))
    u = r1 - n1 * (n1 + 1) / 2.0
    return u / (n1 * n0)


def truncate_predictions(yhat, y_train, outcome_type: str) -> np.ndarray:
    """Clip to the training outcome range (continuous) or to [0, 1] (binary)."""
    yhat = np.asarray(yhat, dtype=float)
    if outcome_type == "binary":
        return np.clip(yhat, 0.0, 1.0)
    y_train = np.asarray(y_train, dtype=float)
    if y_train.size == 0:
        raise EmptyInput("y_train is empty")
    return np.clip(yhat, y_train.min(), y_train.max())


@dataclass(frozen=True)
class Metric:
    id: str
    orientation: str
    outcome_scope: str

    @property
    def minimize(self) -> bool:
        return self.orientation == "minimize"

    def supports(self, outcome_type: str) -> bool:
        return self.outcome_scope == "both" or self.outcome_scope == outcome_type

    def __call__(self, y, yhat, cluster_id=None) -> float:
        return _FUNCS[self.id](y, yhat, cluster_id=cluster_id)

    def better(self, a: float, b: float) -> bool:
        return a < b if self.minimize else a > b


METRICS = {
    "mse": Metric("mse", "minimize", "both"),
    "nll": Metric("nll", "minimize", "binary"),
    "auc": Metric("auc", "maximize", "binary"),
}
_FUNCS = {"mse": mse, "nll": nll, "auc": auc}


def get_metric(metric) -> Metric:
    if isinstance(metric, Metric):
        return metric
    try:
        return METRICS[str(metric).lower()]
    except KeyError:
        raise InputError(f"unknown metric {metric!r}; choose from {sorted(METRICS)}") from None


@dataclass(frozen=True, eq=False)
class CVRisk:
    per_fold: np.ndarray
    mean_risk: float
    metric: Metric


def cv_risk(fold_losses, metric) -> CVRisk:
    """Equal-weight mean of per-fold risks."""
    per_fold = np.asarray(fold_losses, dtype=float).ravel()
    if per_fold.size == 0:
        raise EmptyInput("no fold risks to aggregate")
    return CVRisk(per_fold=per_fold, mean_risk=float(np.mean(per_fold)), metric=get_metric(metric))
