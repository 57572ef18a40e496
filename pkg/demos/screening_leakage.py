"""
Why screening belongs inside cross-validation
=============================================

Pure noise: 100 rows, 50 covariates, a coin-flip outcome.  Nothing can
be predicted, so an honest CV AUC hovers around 0.5.  Screening the
covariates on all rows first and cross-validating afterwards leaks the
outcome into the selection and makes noise look predictive.
"""

import numpy as np

from suplearn import (AnalyticDataset, LearnerSpec, Library, ScreenerSpec,
                      assign_stratified, cross_validate_library)
from suplearn.learners.screeners import run_screener

screen = ScreenerSpec("lasso_screen", {"lambda_ratio": 0.5})
names = tuple(f"x{j + 1}" for j in range(50))
honest, leaky = [], []

for rep in range(20):
    rng = np.random.default_rng(rep)
    d = AnalyticDataset(rng.normal(size=(100, 50)), (rng.random(100) < 0.5).astype(float), "binary", names)
    folds = assign_stratified(d.y, 10, seed=rep)

    # honest: the screener is part of the candidate, so it only sees training folds
    lib = Library((LearnerSpec("glm", "logistic", screener=screen),))
    honest.append(cross_validate_library(d, folds, lib, "auc", seed=rep)[1].rows[0].mean_risk)

    # leaky: pick covariates on every row, then cross-validate the model alone
    kept = run_screener(screen, d.x, d.y, names)
    fixed = {"kind": "explicit_subset", "params": {"names": kept}}
    lib = Library((LearnerSpec("glm", "logistic", screener=fixed),))
    leaky.append(cross_validate_library(d, folds, lib, "auc", seed=rep)[1].rows[0].mean_risk)

print(f"honest CV AUC  mean {np.mean(honest):.3f}  range [{min(honest):.3f}, {max(honest):.3f}]")
print(f"leaky  CV AUC  mean {np.mean(leaky):.3f}  range [{min(leaky):.3f}, {max(leaky):.3f}]")
