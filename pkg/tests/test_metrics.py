import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from suplearn import auc, mse, nll, truncate_predictions
from suplearn.errors import EmptyInput, LengthMismatch, SingleClass
from suplearn.metrics import METRICS, cv_risk, get_metric, midranks

from oracles import auc_pairs


def test_metric_registry():
    assert (METRICS["mse"].orientation, METRICS["mse"].outcome_scope) == ("minimize", "both")
    assert (METRICS["nll"].orientation, METRICS["nll"].outcome_scope) == ("minimize", "binary")
    assert (METRICS["auc"].orientation, METRICS["auc"].outcome_scope) == ("maximize", "binary")
    assert get_metric("AUC") is METRICS["auc"]


def test_mse_examples():
    assert mse([1, 2], [1, 2]) == 0.0
    assert mse([1, 2], [0, 0]) == 2.5
    assert mse([0, 0, 10], [0, 0, 0], cluster_id=["A", "A", "B"]) == 50.0
    assert mse([0, 0, 10], [0, 0, 0]) == pytest.approx(100 / 3)
    with pytest.raises(LengthMismatch):
        mse([1, 2], [1])
    with pytest.raises(EmptyInput):
        mse([], [])


def test_nll_examples():
    assert nll([1, 0], [0.5, 0.5]) == pytest.approx(math.log(2), abs=1e-12)
    assert nll([1], [1.0]) == pytest.approx(1e-12, rel=1e-3)
    # frozen from math.log: -(ln .9 + ln .8 + ln .7) / 3
    assert nll([1, 1, 0], [0.9, 0.8, 0.3]) == pytest.approx(0.22839300363692283, abs=1e-14)
    assert np.isfinite(nll([1, 0], [0.0, 1.0]))


def test_nll_eps_monotone():
    y, p = [1, 0, 1], [0.0, 0.2, 0.7]
    vals = [nll(y, p, eps=e) for e in (1e-3, 1e-6, 1e-9, 1e-12)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_auc_examples():
    assert auc([0, 1], [0.1, 0.9]) == 1.0
    assert auc([1, 0], [0.1, 0.9]) == 0.0
    assert auc([0, 1], [0.5, 0.5]) == 0.5
    with pytest.raises(SingleClass):
        auc([1, 1], [0.2, 0.3])
    with pytest.warns(UserWarning, match="pooled"):
        auc([0, 1], [0.1, 0.9], cluster_id=[1, 2])


def test_midranks():
    np.testing.assert_array_equal(midranks([3, 1, 3, 2]), [3.5, 1, 3.5, 2])


def test_truncate():
    assert truncate_predictions(np.array([5.0]), [0, 3], "continuous")[0] == 3
    assert truncate_predictions(np.array([-0.2]), [0, 1], "binary")[0] == 0
    x = np.array([0.5, 2.5])
    np.testing.assert_array_equal(truncate_predictions(x, [0, 3], "continuous"), x)
    with pytest.raises(EmptyInput):
        truncate_predictions(x, [], "continuous")


def test_cv_risk():
    assert cv_risk([0.2, 0.4], "mse").mean_risk == pytest.approx(0.3)
    assert cv_risk([0.7] * 4, "mse").mean_risk == pytest.approx(0.7)
    assert cv_risk([1.0, 0.5, 0.75], "auc").mean_risk == 0.75
    with pytest.raises(EmptyInput):
        cv_risk([], "mse")


@st.composite
def scored(draw, ties=True):
    n = draw(st.integers(2, 60))
    seed = draw(st.integers(0, 2**32))
    rng = np.random.default_rng(seed)
    y = (rng.random(n) < 0.5).astype(float)
    y[0], y[1] = 0, 1
    levels = draw(st.integers(1, 4)) if ties else 0
    p = rng.integers(0, levels + 1, n).astype(float) if ties else rng.normal(size=n)
    return y, p


@given(scored())
def test_auc_matches_pairs_with_ties(case):
    y, p = case
    assert auc(y, p) == auc_pairs(y, p)


@given(scored(ties=False))
def test_auc_reflection_and_monotone(case):
    y, p = case
    assert auc(y, p) + auc(y, -p) == pytest.approx(1.0, abs=1e-15)
    assert auc(y, np.exp(p) * 3 + 1) == auc(y, p)


@given(st.integers(1, 40), st.integers(0, 2**32))
@settings(max_examples=50)
def test_mse_properties(n, seed):
    rng = np.random.default_rng(seed)
    y, yh = rng.normal(size=n), rng.normal(size=n)
    assert mse(y, yh) >= 0
    assert mse(y, y) == 0
    assert mse(y, yh, cluster_id=np.arange(n)) == mse(y, yh)
    # clipping to an interval containing y never moves predictions farther
    lo, hi = y.min(), y.max()
    assert mse(y, truncate_predictions(yh * 5, y, "continuous")) <= mse(y, yh * 5) + 1e-15
    t = truncate_predictions(yh * 5, y, "continuous")
    assert np.all((t >= lo) & (t <= hi))
