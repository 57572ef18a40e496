import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from suplearn import AnalyticDataset, effective_sample_size, load_csv, preprocess
from suplearn.dataset import PreprocessOptions, iqr_fences
from suplearn.errors import (
    AllCovariatesDropped,
    InputError,
    InvalidDataset,
    MissingValue,
    NonNumericCell,
    SingleClassOutcome,
    UnknownColumn,
)


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


# ---------------------------------------------------------------- loading

def test_load_basic(tmp_path):
    p = write(tmp_path, "y,x1,x2\n1,2,3\n4,5,6\n7,8,9\n")
    d = load_csv(p, "y")
    assert (d.n, d.p) == (3, 2)
    assert d.covariate_names == ("x1", "x2")
    np.testing.assert_array_equal(d.y, [1, 4, 7])
    np.testing.assert_array_equal(d.x[:, 1], [3, 6, 9])


@pytest.mark.parametrize("token", ["", "NA", "nan", "NaN", "na"])
def test_missing_tokens(tmp_path, token):
    p = write(tmp_path, f"y,x1,x2\n1,2,3\n4,{token},6\n")
    with pytest.raises(MissingValue) as e:
        load_csv(p, "y")
    assert "row 2" in str(e.value) and "x1" in str(e.value)


def test_non_numeric(tmp_path):
    p = write(tmp_path, "y,x1\n1,abc\n2,3\n")
    with pytest.raises(NonNumericCell):
        load_csv(p, "y")


def test_binary_bad_level(tmp_path):
    p = write(tmp_path, "y,x1\n0,1\n2,3\n1,4\n")
    with pytest.raises(NonNumericCell, match="invalid binary level"):
        load_csv(p, "y", outcome_type="binary")


def test_single_class(tmp_path):
    p = write(tmp_path, "y,x1\n1,1\n1,3\n")
    with pytest.raises(SingleClassOutcome):
        load_csv(p, "y", outcome_type="binary")


def test_unknown_column(tmp_path):
    p = write(tmp_path, "y,x1\n1,1\n2,3\n")
    with pytest.raises(UnknownColumn, match="zz"):
        load_csv(p, "zz")
    with pytest.raises(UnknownColumn):
        load_csv(p, "y", covariate_names=["x9"])


def test_cluster_column(tmp_path):
    p = write(tmp_path, "y,x1,site\n1,1,a\n2,3,b\n3,4,a\n")
    d = load_csv(p, "y", cluster_name="site")
    assert d.covariate_names == ("x1",)
    assert d.cluster_id[0] == d.cluster_id[2] != d.cluster_id[1]


def test_dataset_invariants():
    with pytest.raises(InvalidDataset):
        AnalyticDataset(np.ones((2, 2)), [1, 2], "continuous", ("a", "a"))
    with pytest.raises(InvalidDataset):
        AnalyticDataset(np.ones((1, 2)), [1], "continuous", ("a", "b"))
    with pytest.raises(MissingValue):
        AnalyticDataset([[1.0], [np.nan]], [1, 2], "continuous", ("a",))
    with pytest.raises(InvalidDataset):
        AnalyticDataset(np.ones((3, 1)), [1, 2, 3], "continuous", ("a",), cluster_id=[1, 2])
    d = AnalyticDataset(np.ones((3, 1)), [1, 2, 3], "continuous", ("a",))
    with pytest.raises(ValueError):
        d.x[0, 0] = 5.0


# ---------------------------------------------------------------- n_eff

def _binary(n, events, clusters=None):
    y = np.zeros(n)
    y[:events] = 1
    return AnalyticDataset(np.arange(n, dtype=float)[:, None], y, "binary", ("x",), cluster_id=clusters)


def test_neff_examples():
    d = AnalyticDataset(np.random.default_rng(0).normal(size=(100, 2)), np.arange(100.0), "continuous", ("a", "b"))
    assert effective_sample_size(d).n_eff == 100
    e = effective_sample_size(_binary(1000, 50))
    assert (e.n, e.n_rare, e.n_eff) == (1000, 50, 250)
    assert effective_sample_size(_binary(40, 15)).n_eff == 40


def test_neff_clusters():
    # 4 clusters of 3 rows; events in clusters 0 and 1 only
    cl = np.repeat([0, 1, 2, 3], 3)
    y = np.zeros(12)
    y[[0, 4]] = 1
    d = AnalyticDataset(np.arange(12.0)[:, None], y, "binary", ("x",), cluster_id=cl)
    e = effective_sample_size(d)
    assert (e.n, e.n_rare, e.n_eff) == (4, 2, 4)


@given(st.integers(2, 5000), st.data())
def test_neff_property(n, data):
    events = data.draw(st.integers(1, n - 1))
    e = effective_sample_size(_binary(n, events))
    assert e.n_eff == min(n, 5 * min(events, n - events))
    assert e.n_eff <= n


@given(st.integers(2, 400), st.integers(0, 2**32 - 1))
@settings(max_examples=30)
def test_neff_permutation_invariant(n, seed):
    rng = np.random.default_rng(seed)
    y = (rng.random(n) < 0.3).astype(float)
    y[0], y[1] = 0, 1
    d = AnalyticDataset(rng.normal(size=(n, 1)), y, "binary", ("x",))
    perm = rng.permutation(n)
    assert effective_sample_size(d) == effective_sample_size(d.subset(perm))


def test_neff_balanced_prevalence():
    assert effective_sample_size(_binary(500, 250)).n_eff == 500


# ---------------------------------------------------------------- preprocess

def test_constant_dropped():
    rng = np.random.default_rng(1)
    x = np.column_stack([rng.normal(size=20), np.ones(20)])
    d = AnalyticDataset(x, rng.normal(size=20), "continuous", ("a", "b"))
    out, log = preprocess(d)
    assert log.dropped_constant == ["b"]
    np.testing.assert_array_equal(out.x[:, 0], d.x[:, 0])
    np.testing.assert_array_equal(out.y, d.y)


def test_correlated_dropped():
    rng = np.random.default_rng(2)
    x1 = rng.normal(size=30)
    d = AnalyticDataset(np.column_stack([x1, 2 * x1, rng.normal(size=30)]), rng.normal(size=30),
                        "continuous", ("x1", "x2", "x3"))
    out, log = preprocess(d, PreprocessOptions(corr_threshold=0.95))
    assert log.dropped_correlated == [("x1", "x2")]
    assert out.covariate_names == ("x1", "x3")


def test_sparse_binary_dropped():
    x = np.zeros((200, 2))
    x[0, 0] = 1  # 0.5% minority
    x[:, 1] = np.arange(200) % 2
    d = AnalyticDataset(x, np.arange(200.0), "continuous", ("rare", "half"))
    _, log = preprocess(d, PreprocessOptions(sparse_threshold=0.01))
    assert log.dropped_sparse == ["rare"]


def test_outlier_fences_hand():
    # linear quartiles of (1,2,3,1000): Q1 = 1.75, Q3 = 3 + 0.25 * 997 = 252.25
    lo, hi = iqr_fences(np.array([1.0, 2.0, 3.0, 1000.0]), 1.5)
    assert lo == pytest.approx(1.75 - 1.5 * 250.5)
    assert hi == pytest.approx(628.0)
    d = AnalyticDataset([[0, 1], [1, 5], [2, 2], [3, 7]], [1, 2, 3, 1000], "continuous", ("a", "b"))
    out, log = preprocess(d, PreprocessOptions(omit_outliers=True, corr_threshold=1.0))
    assert log.omitted_outlier_rows == [3]
    np.testing.assert_array_equal(out.y, [1, 2, 3])


def test_outliers_binary_rejected(bin_data):
    with pytest.raises(InputError):
        preprocess(bin_data, PreprocessOptions(omit_outliers=True))


def test_all_dropped():
    d = AnalyticDataset(np.ones((5, 2)), np.arange(5.0), "continuous", ("a", "b"))
    with pytest.raises(AllCovariatesDropped):
        preprocess(d)


def _messy(seed):
    rng = np.random.default_rng(seed)
    n = 60
    base = rng.normal(size=n)
    bits = (rng.random(n) < 0.5).astype(float)
    rare = np.zeros(n)
    rare[int(rng.integers(n))] = 1
    x = np.column_stack([base, rng.normal(size=n), -base + 1e-3 * rng.normal(size=n), np.full(n, 3.0), bits, rare])
    return AnalyticDataset(x, rng.normal(size=n), "continuous", ("a", "b", "c", "d", "e", "f"))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25)
def test_preprocess_outcome_blind(seed):
    d = _messy(seed)
    perm = np.random.default_rng(seed + 1).permutation(d.n)
    d2 = AnalyticDataset(d.x, d.y[perm], "continuous", d.covariate_names)
    opts = PreprocessOptions(sparse_threshold=0.05)
    _, a = preprocess(d, opts)
    _, b = preprocess(d2, opts)
    assert (a.dropped_constant, a.dropped_sparse, a.dropped_correlated) == \
        (b.dropped_constant, b.dropped_sparse, b.dropped_correlated)
    dropped = a.dropped_constant + a.dropped_sparse + [c for _, c in a.dropped_correlated]
    assert len(dropped) == len(set(dropped))
    assert set(dropped) <= set(d.covariate_names)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25)
def test_preprocess_idempotent(seed):
    opts = PreprocessOptions(sparse_threshold=0.05)
    once, _ = preprocess(_messy(seed), opts)
    twice, log = preprocess(once, opts)
    assert twice.covariate_names == once.covariate_names
    np.testing.assert_array_equal(twice.x, once.x)
    assert not (log.dropped_constant or log.dropped_sparse or log.dropped_correlated)
