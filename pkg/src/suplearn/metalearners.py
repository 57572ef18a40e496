"""Meta-learners over the level-one (cross-validated prediction) matrix."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    DegenerateWeights,
    DimensionMismatch,
    InputError,
    NonConvergence,
    NonFiniteRisk,
)

META_KINDS = ("discrete", "nnls", "nnls_convex")


@dataclass(frozen=True, eq=False)
class MetaLevelDataset:
    """``z[i, k]``: prediction for row ``i`` by candidate ``k`` fit without row ``i``."""

    z: np.ndarray
    y: np.ndarray
    candidate_names: tuple
    fold_of: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        if z.ndim != 2 or z.shape[0] != len(self.y) or z.shape[1] != len(self.candidate_names):
            raise DimensionMismatch("z must be n x K matching y and candidate_names")
        if z.shape[1] < 1:
            raise InputError("meta-level dataset needs at least one candidate")
        if not np.all(np.isfinite(z)):
            raise InputError("meta-level predictions must be finite")

    def columns(self, names) -> "MetaLevelDataset":
        idx = [self.candidate_names.index(s) for s in names]
        return MetaLevelDataset(self.z[:, idx], self.y, tuple(names), self.fold_of)


@dataclass(frozen=True, eq=False)
class MetaFit:
    kind: str
    weights: np.ndarray
    selected: Optional[int] = None

    def __post_init__(self):
        if self.kind not in META_KINDS:
            raise InputError(f"unknown meta-learner {self.kind!r}")


def discrete_select(cv_risks, orientation: str, names=None) -> MetaFit:
    """Cross-validated selector: one-hot weight on the best risk.

    Ties go to the earliest candidate.  ``selected`` is 0-based.
    """
    risks = np.asarray(cv_risks, dtype=float).ravel()
    if risks.size == 0:
        raise InputError("no candidates to select from")
    if not np.all(np.isfinite(risks)):
        raise NonFiniteRisk("CV risks must be finite")
    if names is not None and len(names) != risks.size:
        raise DimensionMismatch("names and risks differ in length")
    if orientation == "minimize":
        k = int(np.argmin(risks))
    elif orientation == "maximize":
        k = int(np.argmax(risks))
    else:
        raise InputError(f"orientation must be minimize or maximize, got {orientation!r}")
    w = np.zeros(risks.size)
    w[k] = 1.0
    return MetaFit("discrete", w, k)


def _ls_on(z, y, passive):
    """Least squares restricted to the passive columns, via QR."""
    cols = np.flatnonzero(passive)
    a = z[:, cols]
    q, r = np.linalg.qr(a)
    diag = np.abs(np.diag(r))
    if diag.size and diag.min() > 1e-12 * max(diag.max(), 1.0):
        sol = np.linalg.solve(r, q.T @ y)
    else:
        sol = np.linalg.lstsq(a, y, rcond=None)[0]
    out = np.zeros(z.shape[1])
    out[cols] = sol
    return out


def nnls(z, y, max_iter: Optional[int] = None, tol: Optional[float] = None) -> np.ndarray:
    """Lawson-Hanson active-set solution of ``min ||y - z w||^2`` s.t. ``w >= 0``.

    No intercept.  ``max_iter`` (default ``3 * K``) caps the outer loop;
    exceeding it raises :class:`NonConvergence`.
    """
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if z.ndim != 2 or z.shape[0] != y.size:
        raise DimensionMismatch("z must be n x K with n = len(y)")
    if not (np.all(np.isfinite(z)) and np.all(np.isfinite(y))):
        raise InputError("nnls inputs must be finite")
    n, k = z.shape
    if n < 1 or k < 1:
        raise InputError("nnls needs n >= 1 and K >= 1")
    max_iter = 3 * k if max_iter is None else max_iter
    if tol is None:
        tol = 10 * np.finfo(float).eps * max(n, k) * max(1.0, float(np.abs(z).max()) * float(np.abs(y).max()))

    w = np.zeros(k)
    passive = np.zeros(k, dtype=bool)
    grad = z.T @ (y - z @ w)
    outer = 0
    while not passive.all() and np.max(grad[~passive]) > tol:
        outer += 1
        if outer > max_iter:
            raise NonConvergence(f"NNLS active-set loop exceeded {max_iter} iterations", outer)
        j = int(np.flatnonzero(~passive)[np.argmax(grad[~passive])])
        passive[j] = True
        s = _ls_on(z, y, passive)
        # inner loop: step back toward feasibility while some passive weight is <= 0
        while np.any(s[passive] <= 0):
            bad = passive & (s <= 0)
            alpha = np.min(w[bad] / (w[bad] - s[bad]))
            w = w + alpha * (s - w)
            passive &= w > tol
            w[~passive] = 0.0
            s = _ls_on(z, y, passive) if passive.any() else np.zeros(k)
        w = s
        grad = z.T @ (y - z @ w)
    return w


def normalize_weights(w) -> np.ndarray:
    """Scale nonnegative weights to sum to one."""
    w = np.asarray(w, dtype=float)
    if np.any(w < 0):
        raise InputError("weights must be nonnegative")
    total = w.sum()
    if not total > 0:
        raise DegenerateWeights("all weights are zero")
    return w / total


def fit_meta(kind: str, mld: MetaLevelDataset, risks=None, orientation="minimize") -> MetaFit:
    if kind == "discrete":
        return discrete_select(risks, orientation, mld.candidate_names)
    if kind == "nnls":
        w = nnls(mld.z, mld.y)
        if not w.sum() > 0:
            raise DegenerateWeights("NNLS returned all-zero weights")
        return MetaFit("nnls", w)
    if kind == "nnls_convex":
        return MetaFit("nnls_convex", normalize_weights(nnls(mld.z, mld.y)))
    raise InputError(f"unknown meta-learner {kind!r}")


def meta_predict(mf: MetaFit, z_new) -> np.ndarray:
    """Combine candidate predictions; a discrete fit returns its column unchanged."""
    z_new = np.asarray(z_new, dtype=float)
    if z_new.ndim != 2 or z_new.shape[1] != mf.weights.size:
        raise DimensionMismatch(f"expected {mf.weights.size} candidate columns")
    if mf.kind == "discrete":
        return z_new[:, mf.selected].copy()
    return z_new @ mf.weights
