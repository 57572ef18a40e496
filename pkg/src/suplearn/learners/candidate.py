"""Training and prediction for a single candidate learner."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import InvalidHyperparam, SchemaMismatch, UnknownCovariate
from ..metrics import truncate_predictions
from . import linear, neighbors, tree
from .screeners import run_screener
from .specs import LearnerSpec


@dataclass(frozen=True, eq=False)
class TrainedCandidate:
    spec: LearnerSpec
    input_covariates: tuple
    selected_covariates: tuple
    model_state: dict
    train_y_range: tuple
    outcome_type: str
    flags: tuple = field(default=())


def default_names(p):
    return tuple(f"x{j + 1}" for j in range(p))


def design_matrix(x, names, selected, interactions):
    """Screened columns followed by one product column per interaction pair."""
    pos = {s: j for j, s in enumerate(names)}
    cols = [x[:, pos[s]] for s in selected]
    cols += [x[:, pos[a]] * x[:, pos[b]] for a, b in interactions]
    if not cols:
        return np.empty((x.shape[0], 0))
    return np.column_stack(cols)


def _fit_base(spec, x, y, outcome_type, seed, flags):
    hp = spec.hyperparams
    base = spec.base
    binary = outcome_type == "binary"
    if base == "intercept":
        return {"mean": np.array([y.mean()])}
    if base == "ols":
        return linear.fit_ols(x, y, flags)
    if base == "logistic":
        if not binary:
            raise InvalidHyperparam(f"{spec.name}: logistic regression needs a binary outcome")
        return linear.fit_logistic(x, y, hp["ridge_guard"], hp["tol"], hp["max_iter"])
    if base == "ridge":
        if binary:
            return linear.fit_ridge_logistic(x, y, hp["lambda"])
        return linear.fit_ridge_gaussian(x, y, hp["lambda"])
    if base == "lasso":
        fit = linear.fit_lasso_logistic if binary else linear.fit_lasso_gaussian
        return fit(x, y, hp["lambda"], hp["lambda_ratio"], hp["tol"], hp["max_iter"])
    if base == "knn":
        return neighbors.fit_knn(x, y, hp["k"])
    if base == "tree":
        return tree.build_tree(x, y, max_depth=hp["max_depth"], min_leaf=hp["min_leaf"])
    if base == "forest":
        return tree.fit_forest(
            x, y,
            trees=hp["trees"],
            max_features=hp["max_features"],
            bootstrap=hp["bootstrap"],
            max_depth=hp["max_depth"],
            min_leaf=hp["min_leaf"],
            seed=seed,
        )
    raise InvalidHyperparam(f"unknown base {base!r}")


def _predict_base(base, state, x):
    if base == "intercept":
        return np.full(x.shape[0], state["mean"][0])
    if base in ("ols", "logistic", "ridge", "lasso"):
        return linear.predict_linear(state, x)
    if base == "knn":
        return neighbors.predict_knn(state, x)
    if base == "tree":
        return tree.predict_tree(state, x)
    if base == "forest":
        return tree.predict_forest(state, x)
    raise InvalidHyperparam(f"unknown base {base!r}")


def train_candidate(
    spec: LearnerSpec,
    x,
    y,
    outcome_type: str,
    seed: int = 0,
    covariate_names: Optional[Sequence[str]] = None,
) -> TrainedCandidate:
    """Screen (if configured), then fit the base learner on the training rows given."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or x.shape[0] != y.size:
        raise SchemaMismatch("x must be n x p with one row per outcome value")
    names = tuple(covariate_names) if covariate_names is not None else default_names(x.shape[1])
    for a, b in spec.interactions:
        for s in (a, b):
            if s not in names:
                raise UnknownCovariate(f"{spec.name}: interaction covariate {s!r} not in data")
    if spec.screener is not None:
        selected = tuple(run_screener(spec.screener, x, y, names))
    else:
        selected = names
    flags = []
    design = design_matrix(x, names, selected, spec.interactions)
    state = _fit_base(spec, design, y, outcome_type, seed, flags)
    return TrainedCandidate(
        spec=spec,
        input_covariates=names,
        selected_covariates=selected,
        model_state=state,
        train_y_range=(float(y.min()), float(y.max())),
        outcome_type=outcome_type,
        flags=tuple(flags),
    )


def _align(tc, x_new, covariate_names):
    x_new = np.asarray(x_new, dtype=float)
    if x_new.ndim == 1:
        x_new = x_new.reshape(1, -1) if x_new.size else x_new.reshape(0, len(tc.input_covariates))
    if covariate_names is None:
        if x_new.shape[1] != len(tc.input_covariates):
            raise SchemaMismatch(
                f"expected {len(tc.input_covariates)} covariate columns, got {x_new.shape[1]}"
            )
        return x_new
    covariate_names = list(covariate_names)
    missing = [s for s in tc.input_covariates if s not in covariate_names]
    if missing:
        raise SchemaMismatch(f"new data lacks covariates {missing}")
    return x_new[:, [covariate_names.index(s) for s in tc.input_covariates]]


def predict_candidate(tc: TrainedCandidate, x_new, covariate_names=None) -> np.ndarray:
    """Predictions for new rows; probabilities for binary outcomes.

    Continuous predictions are clipped to the training outcome range.  With
    ``covariate_names`` the columns are matched by name.
    """
    x_new = _align(tc, x_new, covariate_names)
    if x_new.shape[0] == 0:
        return np.empty(0)
    design = design_matrix(x_new, tc.input_covariates, tc.selected_covariates, tc.spec.interactions)
    raw = _predict_base(tc.spec.base, tc.model_state, design)
    return truncate_predictions(raw, np.asarray(tc.train_y_range), tc.outcome_type)
