"""Covariate screeners.

Screeners only ever see the rows they are handed.  Inside cross-validation
that is the training fold, which is what keeps outcome-aware screening
honest.
"""
from __future__ import annotations

import numpy as np

from ..errors import UnknownCovariate
from .linear import coordinate_descent_lasso, resolve_lambda, standardize


def abs_correlations(x, y):
    """|Pearson r| of each column with ``y``; constant columns score 0."""
    xc = x - x.mean(axis=0)
    yc = y - y.mean()
    denom = np.sqrt((xc * xc).sum(axis=0) * (yc @ yc))
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(denom > 0, (xc.T @ yc) / np.where(denom > 0, denom, 1.0), 0.0)
    return np.abs(r)


def _best_by_corr(x, y, names):
    return [names[int(np.argmax(abs_correlations(x, y)))]]


def run_screener(spec, x, y, names):
    """Return the retained covariate names, in column order.

    If a rule would keep nothing, the single best-ranked covariate is
    returned instead (largest |correlation| for outcome-aware rules,
    largest variance for ``variance_blind``).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    names = list(names)
    kind, params = spec.kind, spec.params
    if kind == "explicit_subset":
        missing = [s for s in params["names"] if s not in names]
        if missing:
            raise UnknownCovariate(f"explicit_subset names not in data: {missing}")
        keep = set(params["names"])
        return [s for s in names if s in keep]
    if kind == "variance_blind":
        var = x.var(axis=0)
        kept = [s for s, v in zip(names, var) if v > 0]
        return kept or [names[int(np.argmax(var))]]
    if kind == "corr_top_k":
        k = min(int(params["k"]), len(names))
        order = np.argsort(-abs_correlations(x, y), kind="stable")[:k]
        return [names[j] for j in sorted(order)]
    if kind == "lasso_screen":
        z, _, _, _ = standardize(x)
        yc = y - y.mean()
        lam = resolve_lambda(z, yc, params.get("lambda"), params.get("lambda_ratio"))
        beta = coordinate_descent_lasso(z, yc, lam)
        kept = [s for s, b in zip(names, beta) if b != 0.0]
        return kept or _best_by_corr(x, y, names)
    raise UnknownCovariate(f"unknown screener {kind!r}")
