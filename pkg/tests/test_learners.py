import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from suplearn import LearnerSpec, ScreenerSpec, auc, predict_candidate, train_candidate
from suplearn.errors import InvalidHyperparam, SchemaMismatch, UnknownCovariate
from suplearn.learners import linear, tree
from suplearn.learners.screeners import run_screener


def fit_predict(spec, x, y, kind="continuous", x_new=None, seed=0):
    tc = train_candidate(spec, x, y, kind, seed)
    return tc, predict_candidate(tc, x if x_new is None else x_new)


def orthogonal_design(n, p, seed):
    """Columns with x'x = n I, so the (1/2n) lasso decouples coordinatewise."""
    q, _ = np.linalg.qr(np.random.default_rng(seed).normal(size=(n, p)))
    return math.sqrt(n) * q


def saturated_2x2():
    # x = 0: 1 event in 4; x = 1: 3 events in 4
    x = np.r_[np.zeros(4), np.ones(4)][:, None]
    y = np.array([1, 0, 0, 0, 1, 1, 1, 0], dtype=float)
    return x, y


# ---------------------------------------------------------------- specs

def test_spec_validation():
    with pytest.raises(InvalidHyperparam):
        LearnerSpec("k0", "knn", {"k": 0})
    with pytest.raises(InvalidHyperparam):
        LearnerSpec("r", "ridge", {"lambda": -1.0})
    with pytest.raises(InvalidHyperparam):
        LearnerSpec("t", "tree", {"max_depth": 0})
    with pytest.raises(InvalidHyperparam):
        LearnerSpec("f", "forest", {"trees": 0})
    with pytest.raises(InvalidHyperparam):
        LearnerSpec("l", "lasso", {})
    with pytest.raises(InvalidHyperparam):
        LearnerSpec("u", "ols", {"bogus": 1})
    with pytest.raises(InvalidHyperparam):
        LearnerSpec("b", "svm")
    s = LearnerSpec("l", "lasso", {"lambda": 0.1}, ScreenerSpec("corr_top_k", {"k": 2}), [("x1", "x2")])
    assert LearnerSpec.from_dict(s.to_dict()) == s


def test_screener_spec_validation():
    with pytest.raises(InvalidHyperparam):
        ScreenerSpec("corr_top_k", {"k": 0})
    with pytest.raises(InvalidHyperparam):
        ScreenerSpec("lasso_screen", {"lambda": 0.0})


# ---------------------------------------------------------------- screeners

def test_screeners():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(50, 4))
    names = ["x1", "x2", "x3", "x4"]
    assert run_screener(ScreenerSpec("explicit_subset", {"names": ["x1", "x3"]}), x, x[:, 0], names) == ["x1", "x3"]
    assert run_screener(ScreenerSpec("corr_top_k", {"k": 1}), x, x[:, 1], names) == ["x2"]
    with pytest.raises(UnknownCovariate):
        run_screener(ScreenerSpec("explicit_subset", {"names": ["zz"]}), x, x[:, 0], names)
    xc = x.copy()
    xc[:, 2] = 1.0
    assert run_screener(ScreenerSpec("variance_blind", {}), xc, np.zeros(50), names) == ["x1", "x2", "x4"]


def test_lasso_screen_fallback_above_lambda_max():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(80, 5))
    y = 0.3 * x[:, 3] + rng.normal(size=80)
    z, _, _, _ = linear.standardize(x)
    lmax = np.max(np.abs(z.T @ (y - y.mean()))) / 80
    names = [f"x{j + 1}" for j in range(5)]
    corr = [abs(np.corrcoef(x[:, j], y)[0, 1]) for j in range(5)]
    kept = run_screener(ScreenerSpec("lasso_screen", {"lambda": lmax * 1.0001}), x, y, names)
    assert kept == [names[int(np.argmax(corr))]]
    kept = run_screener(ScreenerSpec("lasso_screen", {"lambda": lmax * 0.5}), x, y, names)
    assert "x4" in kept


# ---------------------------------------------------------------- base learners

def test_intercept():
    x = np.zeros((3, 1))
    _, p = fit_predict(LearnerSpec("m", "intercept"), x, np.array([1.0, 2.0, 3.0]))
    np.testing.assert_array_equal(p, [2.0, 2.0, 2.0])


def test_ols_exact_line():
    x = np.linspace(-3, 3, 11)[:, None]
    tc, p = fit_predict(LearnerSpec("o", "ols"), x, 2 * x[:, 0])
    assert abs(tc.model_state["coef"][0] - 2) < 1e-10 and abs(tc.model_state["intercept"][0]) < 1e-10
    np.testing.assert_allclose(p, 2 * x[:, 0], atol=1e-10)


def test_ols_rank_deficient_flags():
    rng = np.random.default_rng(0)
    a = rng.normal(size=30)
    x = np.column_stack([a, 2 * a])
    tc, p = fit_predict(LearnerSpec("o", "ols"), x, a + rng.normal(size=30) * 0.1)
    assert "ols_ridge_fallback" in tc.flags
    assert np.all(np.isfinite(p))


def test_logistic_saturated_closed_form():
    x, y = saturated_2x2()
    tc, _ = fit_predict(LearnerSpec("g", "logistic"), x, y, "binary")
    assert abs(tc.model_state["intercept"][0] - math.log(1 / 3)) < 1e-6
    assert abs(tc.model_state["coef"][0] - (math.log(3) - math.log(1 / 3))) < 1e-6


def test_logistic_symmetric_intercept_zero():
    x = np.r_[-np.ones(10), np.ones(10)]
    y = np.r_[np.ones(3), np.zeros(7), np.ones(7), np.zeros(3)]
    b = linear.irls_logistic(np.column_stack([np.ones(20), x]), y)
    assert abs(b[0]) < 1e-8


def test_logistic_separation_finite():
    x = np.linspace(-2, 2, 20)
    y = (x > 0).astype(float)
    b = linear.irls_logistic(np.column_stack([np.ones(20), x]), y)
    assert np.all(np.isfinite(b))
    assert auc(y, linear.expit(b[0] + b[1] * x)) == 1.0


def test_knn_k1_and_tree_depth1():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(40, 2))
    y = np.sin(3 * x[:, 0]) + x[:, 1] ** 2
    _, p = fit_predict(LearnerSpec("k", "knn", {"k": 1}), x, y)
    np.testing.assert_array_equal(p, y)
    _, p = fit_predict(LearnerSpec("t", "tree", {"max_depth": 1, "min_leaf": 1}), x, y,
                       x_new=rng.normal(size=(200, 2)))
    assert np.unique(p).size == 2


def test_tree_step_function_exact():
    x = np.linspace(0, 1, 60)[:, None]
    y = np.where(x[:, 0] < 0.3, 1.0, np.where(x[:, 0] < 0.7, 4.0, -2.0))
    _, p = fit_predict(LearnerSpec("t", "tree", {"max_depth": 3}), x, y)
    np.testing.assert_array_equal(p, y)


def test_tree_binary_gini_and_range():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(100, 3))
    y = (x[:, 0] > 0.2).astype(float)
    _, p = fit_predict(LearnerSpec("t", "tree", {"max_depth": 2}), x, y, "binary")
    assert p.min() >= 0 and p.max() <= 1
    assert auc(y, p) == 1.0


def test_forest_single_tree_equals_tree():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(80, 3))
    y = x[:, 0] * x[:, 1] + rng.normal(size=80)
    f = tree.fit_forest(x, y, trees=1, max_features=3, bootstrap=False, max_depth=4, min_leaf=5, seed=11)
    t = tree.build_tree(x, y, max_depth=4, min_leaf=5)
    q = rng.normal(size=(50, 3))
    np.testing.assert_array_equal(tree.predict_forest(f, q), tree.predict_tree(t, q))


def test_forest_seeded():
    rng = np.random.default_rng(6)
    x = rng.normal(size=(60, 4))
    y = x[:, 0] + rng.normal(size=60)
    spec = LearnerSpec("f", "forest", {"trees": 10})
    _, a = fit_predict(spec, x, y, seed=3)
    _, b = fit_predict(spec, x, y, seed=3)
    _, c = fit_predict(spec, x, y, seed=4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_binary_outputs_are_probabilities(bin_data):
    for spec in [LearnerSpec("g", "logistic"), LearnerSpec("r", "ridge", {"lambda": 0.1}),
                 LearnerSpec("l", "lasso", {"lambda_ratio": 0.1}), LearnerSpec("k", "knn", {"k": 7}),
                 LearnerSpec("f", "forest", {"trees": 5}), LearnerSpec("o", "ols")]:
        _, p = fit_predict(spec, bin_data.x, bin_data.y, "binary", x_new=bin_data.x * 10)
        assert p.min() >= 0 and p.max() <= 1, spec.name


def test_continuous_truncated(cont_data):
    _, p = fit_predict(LearnerSpec("o", "ols"), cont_data.x, cont_data.y, x_new=cont_data.x * 100)
    assert p.min() >= cont_data.y.min() and p.max() <= cont_data.y.max()


def test_interactions_and_names():
    rng = np.random.default_rng(7)
    x = rng.normal(size=(50, 2))
    y = 1 + x[:, 0] * x[:, 1] * 3
    spec = LearnerSpec("o", "ols", interactions=[("a", "b")])
    tc = train_candidate(spec, x, y, "continuous", covariate_names=["a", "b"])
    np.testing.assert_allclose(predict_candidate(tc, x), y, atol=1e-10)
    # name-based column matching
    np.testing.assert_array_equal(predict_candidate(tc, x[:, ::-1], ["b", "a"]), predict_candidate(tc, x))
    with pytest.raises(SchemaMismatch):
        predict_candidate(tc, x[:, :1], ["a"])
    with pytest.raises(UnknownCovariate):
        train_candidate(LearnerSpec("o", "ols", interactions=[("a", "q")]), x, y, "continuous",
                        covariate_names=["a", "b"])
    assert predict_candidate(tc, np.empty((0, 2))).shape == (0,)


def test_logistic_needs_binary(cont_data):
    with pytest.raises(InvalidHyperparam):
        train_candidate(LearnerSpec("g", "logistic"), cont_data.x, cont_data.y, "continuous")


# ---------------------------------------------------------------- lasso numerics

def test_lasso_lambda_zero_matches_ols():
    x = orthogonal_design(40, 4, 0)
    y = np.random.default_rng(1).normal(size=40)
    y = y - y.mean()
    ols = np.linalg.lstsq(x, y, rcond=None)[0]
    np.testing.assert_allclose(linear.coordinate_descent_lasso(x, y, 0.0, tol=1e-12), ols, atol=1e-8)


def test_lasso_soft_threshold_closed_form():
    x = orthogonal_design(60, 5, 2)
    y = x @ np.array([1.0, -0.5, 0.2, 0.0, 2.0]) + np.random.default_rng(3).normal(size=60)
    ols = x.T @ y / 60
    for lam in (0.05, 0.3, 0.8):
        beta = linear.coordinate_descent_lasso(x, y, lam, tol=1e-12)
        np.testing.assert_allclose(beta, linear.soft_threshold(ols, lam), atol=1e-8)


def test_lasso_above_lambda_max_is_zero():
    rng = np.random.default_rng(4)
    z, _, _, _ = linear.standardize(rng.normal(size=(50, 6)))
    y = rng.normal(size=50)
    y -= y.mean()
    lmax = linear.lambda_max(z, y)
    assert np.all(linear.coordinate_descent_lasso(z, y, lmax) == 0)
    assert np.any(linear.coordinate_descent_lasso(z, y, 0.9 * lmax) != 0)


def test_lasso_path_l1_monotone():
    for seed in range(5):
        rng = np.random.default_rng(seed)
        z, _, _, _ = linear.standardize(rng.normal(size=(60, 6)))
        y = z[:, 0] - z[:, 2] + rng.normal(size=60)
        y -= y.mean()
        grid = np.linspace(0.0, linear.lambda_max(z, y), 12)
        norms = [np.abs(linear.coordinate_descent_lasso(z, y, g, tol=1e-10)).sum() for g in grid]
        assert all(a >= b - 1e-8 for a, b in zip(norms, norms[1:]))


# ---------------------------------------------------------------- properties

DETERMINISTIC = [
    LearnerSpec("o", "ols"),
    LearnerSpec("r", "ridge", {"lambda": 0.5}),
    LearnerSpec("l", "lasso", {"lambda": 0.05}),
    LearnerSpec("k", "knn", {"k": 3}),
    LearnerSpec("t", "tree", {"max_depth": 3}),
    LearnerSpec("f", "forest", {"trees": 3, "bootstrap": False, "max_features": 3}),
]


@given(st.integers(0, 2**32), st.sampled_from(DETERMINISTIC))
@settings(max_examples=30, deadline=None)
def test_row_permutation_equivariance(seed, spec):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(40, 3))
    y = x[:, 0] - x[:, 1] ** 2 + rng.normal(size=40)
    q = rng.normal(size=(15, 3))
    perm = rng.permutation(40)
    _, a = fit_predict(spec, x, y, x_new=q)
    _, b = fit_predict(spec, x[perm], y[perm], x_new=q)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-9)
