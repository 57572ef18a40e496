"""
Discrete selection versus an NNLS ensemble
==========================================

The outcome is an equal mix of a linear trend in x1 and a step in x2.
One library member sees only x1, another only x2, so neither can fit
the truth on its own while a weighted sum of the two can.
"""

import numpy as np

from suplearn import (AnalyticDataset, EslSpec, LearnerSpec, Library, assign_vfold,
                      fit_dsl, fit_dsl_with_esl_candidates, fit_esl, sl_predict)

rng = np.random.default_rng(1)
n = 500
x = rng.uniform(-2, 2, size=(n, 3))
truth = lambda x: 0.5 * 2.0 * x[:, 0] + 0.5 * np.where(x[:, 1] > 0, 2.0, -2.0)
d = AnalyticDataset(x, truth(x) + 0.3 * rng.normal(size=n), "continuous", ("x1", "x2", "x3"))


def only(*names):
    return {"kind": "explicit_subset", "params": {"names": list(names)}}


lib = Library(
    (LearnerSpec("mean", "intercept"),
     LearnerSpec("lin_x1", "ols", screener=only("x1")),
     LearnerSpec("step_x2", "tree", {"max_depth": 1}, screener=only("x2")),
     LearnerSpec("knn", "knn", {"k": 15})),
    (EslSpec("esl_convex", "nnls_convex"), EslSpec("esl_raw", "nnls")),
)
folds = assign_vfold(n, 5, seed=3)

# the discrete SL picks the single best candidate by CV risk
dsl = fit_dsl(d, folds, lib, "mse", seed=3)
print("discrete SL picks:", dsl.selected_name)
for row in dsl.cv_table.rows:
    print(f"  {row.name:10s} CV mse {row.mean_risk:.4f}")

# the ensemble SL learns nonnegative weights on the out-of-fold predictions
for kind in ("nnls", "nnls_convex"):
    esl = fit_esl(d, folds, lib, "mse", meta_kind=kind, seed=3)
    w = ", ".join(f"{m}={wt:.3f}" for m, wt in zip(esl.members, esl.meta.weights))
    print(f"eSL ({kind}) weights: {w}")

# to compare an eSL with its own members fairly, its risk needs nested CV
nested = fit_dsl_with_esl_candidates(d, folds, lib, "mse", seed=3)
print("\nnested comparison, candidates and eSLs side by side:")
for row in nested.cv_table.rows:
    mark = "*" if row.selected else " "
    print(f" {mark}{row.name:10s} {row.kind:9s} CV mse {row.mean_risk:.4f}")

# held-out check against the true regression function
q = rng.uniform(-2, 2, size=(2000, 3))
for label, fit in (("discrete", dsl), ("nested pick", nested)):
    err = np.mean((sl_predict(fit, q) - truth(q)) ** 2)
    print(f"{label:12s} mse vs truth on new data: {err:.4f}")
