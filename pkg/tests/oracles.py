"""Independent reference computations used by the tests."""
import itertools

import numpy as np


def auc_pairs(y, p):
    """All-pairs Mann-Whitney AUC with ties counting one half, from integer counts."""
    y, p = np.asarray(y), np.asarray(p)
    pos, neg = p[y == 1], p[y == 0]
    gt = int(np.sum(pos[:, None] > neg[None, :]))
    eq = int(np.sum(pos[:, None] == neg[None, :]))
    return (2 * gt + eq) / (2 * pos.size * neg.size)


def nnls_exhaustive(z, y):
    """Solve unconstrained least squares on every support set; keep the best feasible one."""
    k = z.shape[1]
    best_w, best_obj = np.zeros(k), float(y @ y)
    for r in range(1, k + 1):
        for support in itertools.combinations(range(k), r):
            cols = list(support)
            sol = np.linalg.lstsq(z[:, cols], y, rcond=None)[0]
            if np.any(sol < 0):
                continue
            w = np.zeros(k)
            w[cols] = sol
            obj = float(np.sum((y - z @ w) ** 2))
            if obj < best_obj:
                best_w, best_obj = w, obj
    return best_w, best_obj


def kkt_residual(z, y, w, relative=False):
    """Largest KKT violation of ``min ||y - z w||^2, w >= 0``.

    With ``relative`` the residual is divided by ``||z|| * ||y||``.
    """
    g = z.T @ (z @ w - y)  # half the gradient
    scale = max(np.linalg.norm(z) * np.linalg.norm(y), 1.0) if relative else 1.0
    on = w > 0
    viol = np.concatenate([np.abs(g[on]), np.maximum(-g[~on], 0.0), np.maximum(-w, 0.0)])
    return float(viol.max(initial=0.0)) / scale
