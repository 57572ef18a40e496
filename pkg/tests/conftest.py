import numpy as np
import pytest

from suplearn import AnalyticDataset

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}

CRITERIA = {
    1: "dSL identity",
    2: "NNLS vs exhaustive oracle",
    3: "eSL meta-level dominance",
    4: "fold invariants",
    5: "n_eff formula",
    6: "metric oracles",
    7: "oracle-selection simulation",
    8: "nested eSL provenance",
    9: "screener honesty",
    10: "determinism and persistence",
    11: "learner numerics",
}


@pytest.fixture
def record():
    def _record(k, passed, detail=""):
        ACCEPTANCE[k] = (bool(passed), detail)
        print(f"criterion {k:2d} [{CRITERIA[k]}]: {'PASS' if passed else 'FAIL'}  {detail}")
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        if k in ACCEPTANCE:
            ok, detail = ACCEPTANCE[k]
            terminalreporter.write_line(f"criterion {k:2d} [{CRITERIA[k]}]: {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            terminalreporter.write_line(f"criterion {k:2d} [{CRITERIA[k]}]: NOT RUN")


def make_continuous(n=200, p=5, seed=0, noise=1.0, names=None):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, p))
    beta = np.linspace(1.0, 0.2, p)
    y = x @ beta + noise * rng.normal(size=n)
    names = names or tuple(f"x{j + 1}" for j in range(p))
    return AnalyticDataset(x, y, "continuous", names)


def make_binary(n=200, p=5, seed=0, names=None):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, p))
    eta = x[:, 0] - 0.5 * x[:, 1]
    y = (rng.random(n) < 1.0 / (1.0 + np.exp(-eta))).astype(float)
    names = names or tuple(f"x{j + 1}" for j in range(p))
    return AnalyticDataset(x, y, "binary", names)


@pytest.fixture
def cont_data():
    return make_continuous()


@pytest.fixture
def bin_data():
    return make_binary()
