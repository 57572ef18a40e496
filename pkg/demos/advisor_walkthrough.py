"""
From data to a specification with the advisor
=============================================

A rare binary outcome with a ranking goal.  The advisor turns the data
into a metric, a CV scheme and a library, and explains each step.  The
recommendation is then run as is.
"""

import numpy as np

from suplearn import AnalyticDataset, fit_dsl, fit_dsl_with_esl_candidates, folds_for_dataset, recommend

rng = np.random.default_rng(7)
n, p = 1200, 6
x = rng.normal(size=(n, p))
eta = -3.2 + 1.2 * x[:, 0] - 0.8 * x[:, 1] + 0.6 * x[:, 2] * x[:, 3]
y = (rng.random(n) < 1 / (1 + np.exp(-eta))).astype(float)
d = AnalyticDataset(x, y, "binary", tuple(f"x{j + 1}" for j in range(p)))
print(f"{n} rows, {int(y.sum())} events")

rec = recommend(d, goal="rank_discriminate")
for line in rec.rationale:
    print(line)

folds = folds_for_dataset(d, rec.cv.scheme, rec.cv.v, seed=0)
if rec.library.esl_specs:
    fit = fit_dsl_with_esl_candidates(d, folds, rec.library, rec.metric, seed=0)
else:
    fit = fit_dsl(d, folds, rec.library, rec.metric, seed=0)

print(f"\nCV {rec.metric.id} by candidate ({rec.cv.scheme}, V={folds.v}):")
for row in sorted(fit.cv_table.rows, key=lambda r: -r.mean_risk):
    print(f"  {row.name:24s} {row.mean_risk:.4f}{'  <- selected' if row.selected else ''}")
