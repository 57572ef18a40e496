"""k-nearest-neighbour averaging on standardized features."""
import numpy as np

from .linear import standardize

_CHUNK = 256


def fit_knn(x, y, k):
    _, mean, scale, active = standardize(x)
    return {
        "x": np.asarray(x, dtype=float).copy(),
        "y": np.asarray(y, dtype=float).copy(),
        "mean": mean,
        "scale": scale,
        "active": active.astype(float),
        "k": np.array([min(int(k), len(y))], dtype=np.int64),
    }


def predict_knn(state, x_new):
    active = state["active"] == 1.0
    mean, scale = state["mean"][active], state["scale"][active]
    train = (state["x"][:, active] - mean) / scale
    query = (np.asarray(x_new, dtype=float)[:, active] - mean) / scale
    k = int(state["k"][0])
    y = state["y"]
    out = np.empty(query.shape[0])
    for start in range(0, query.shape[0], _CHUNK):
        q = query[start : start + _CHUNK]
        d2 = ((q[:, None, :] - train[None, :, :]) ** 2).sum(axis=2)
        # stable sort: equal distances resolve to the lower training row
        nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
        out[start : start + _CHUNK] = y[nearest].mean(axis=1)
    return out
