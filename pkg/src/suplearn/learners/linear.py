"""Linear and generalized linear base learners.

Penalized fits (ridge, lasso) work on covariates standardized with the
training rows' mean and population standard deviation; constant columns
are excluded and get a zero coefficient.  Coefficients are mapped back to
the original scale before they are stored.
"""
from __future__ import annotations

import numpy as np

from ..errors import NonConvergence, SingularDesign

OLS_FALLBACK_LAMBDA = 1e-8
_W_FLOOR = 1e-5


def soft_threshold(z, t):
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def expit(eta):
    out = np.empty_like(eta, dtype=float)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    e = np.exp(eta[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def standardize(x):
    """Return ``(z, mean, scale, active)``; inactive (constant) columns are zeroed."""
    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    active = scale > 0
    safe = np.where(active, scale, 1.0)
    z = (x - mean) / safe
    z[:, ~active] = 0.0
    return z, mean, safe, active


def _to_original_scale(beta_std, mean, scale, intercept_std):
    coef = beta_std / scale
    return intercept_std - float(mean @ coef), coef


def lambda_max(x_std, y_centered, w=None):
    """Smallest lambda at which every lasso coefficient is zero."""
    n = len(y_centered)
    if w is None:
        return float(np.max(np.abs(x_std.T @ y_centered)) / n) if x_std.shape[1] else 0.0
    return float(np.max(np.abs(x_std.T @ (w * y_centered))) / n)


def _cd_lasso(x, y, lam, w=None, tol=1e-7, max_iter=10_000, beta=None, intercept=None):
    """Cyclic coordinate descent for
    ``(1/2n) sum w_i (y_i - b0 - x_i beta)^2 + lam * |beta|_1``.

    ``intercept=None`` means no intercept; otherwise it is the starting
    value and is re-fit (unpenalized) after each sweep.
    """
    n, p = x.shape
    w = np.ones(n) if w is None else w
    beta = np.zeros(p) if beta is None else beta.copy()
    b0 = intercept
    r = y - x @ beta - (0.0 if b0 is None else b0)
    wx = w[:, None] * x
    curv = np.einsum("ij,ij->j", wx, x) / n
    sw = w.sum()
    for it in range(1, max_iter + 1):
        delta = 0.0
        for j in range(p):
            if curv[j] == 0.0:
                continue
            old = beta[j]
            rho = wx[:, j] @ r / n + curv[j] * old
            new = soft_threshold(rho, lam) / curv[j]
            if new != old:
                r -= x[:, j] * (new - old)
                beta[j] = new
                delta = max(delta, abs(new - old))
        if b0 is not None:
            shift = (w @ r) / sw
            b0 += shift
            r -= shift
            delta = max(delta, abs(shift))
        if delta < tol:
            return beta, b0, it
    raise NonConvergence(f"coordinate descent did not converge in {max_iter} sweeps", max_iter)


def coordinate_descent_lasso(x, y, lam, tol=1e-7, max_iter=10_000):
    """Minimize ``(1/2n)||y - x b||^2 + lam * ||b||_1``.

    ``x`` should be standardized and ``y`` centered; no intercept is fit.
    Stops when the largest coefficient change in a sweep drops below ``tol``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    beta, _, _ = _cd_lasso(x, y, float(lam), tol=tol, max_iter=max_iter)
    return beta


def _logistic_objective(x, y, b, pen):
    eta = x @ b
    # -loglik = sum log(1 + e^eta) - y * eta
    return float(np.sum(np.logaddexp(0.0, eta) - y * eta) + 0.5 * np.sum(pen * b * b))


def irls_logistic(x, y, tol=1e-10, max_iter=100, ridge_guard=1e-8, penalty=None):
    """Newton/IRLS for logistic regression.

    ``x`` carries its own intercept column.  The objective is the binomial
    negative log-likelihood plus ``0.5 * sum(pen_j * b_j^2)`` with
    ``pen = ridge_guard`` for every coefficient unless ``penalty`` (a
    per-coefficient vector) is given; the guard keeps the solution finite
    under separation.  Steps are halved until the objective decreases.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, k = x.shape
    pen = np.full(k, float(ridge_guard)) if penalty is None else np.asarray(penalty, dtype=float)
    b = np.zeros(k)
    obj = _logistic_objective(x, y, b, pen)
    for it in range(1, max_iter + 1):
        mu = expit(x @ b)
        w = mu * (1.0 - mu)
        grad = x.T @ (y - mu) - pen * b
        hess = (x * w[:, None]).T @ x + np.diag(pen)
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(hess, grad, rcond=None)[0]
        t = 1.0
        while True:
            cand = b + t * step
            new_obj = _logistic_objective(x, y, cand, pen)
            if new_obj <= obj or t < 1e-10:
                break
            t *= 0.5
        change = float(np.max(np.abs(cand - b)))
        b, obj = cand, new_obj
        if change < tol:
            return b
    raise NonConvergence(f"IRLS did not converge in {max_iter} iterations", max_iter)


# ---------------------------------------------------------------- learners

def _state(intercept, coef, link):
    return {
        "intercept": np.array([intercept], dtype=float),
        "coef": np.asarray(coef, dtype=float),
        "link": np.array([1.0 if link == "logit" else 0.0]),
    }


def predict_linear(state, x):
    eta = state["intercept"][0] + x @ state["coef"]
    if state["link"][0] == 1.0:
        return expit(eta)
    return eta


def fit_ols(x, y, flags):
    n, p = x.shape
    design = np.column_stack([np.ones(n), x])
    if np.linalg.matrix_rank(design) < design.shape[1]:
        flags.append("ols_ridge_fallback")
        return fit_ridge_gaussian(x, y, OLS_FALLBACK_LAMBDA)
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return _state(coef[0], coef[1:], "identity")


def fit_ridge_gaussian(x, y, lam):
    """Minimize ``(1/2n)||y - b0 - z b||^2 + (lam/2)||b||^2`` on standardized ``z``."""
    n = x.shape[0]
    z, mean, scale, active = standardize(x)
    za = z[:, active]
    ybar = y.mean()
    gram = za.T @ za / n + lam * np.eye(za.shape[1])
    rhs = za.T @ (y - ybar) / n
    if za.shape[1] and np.linalg.cond(gram) > 1e14:
        raise SingularDesign("ridge normal equations are singular; use a positive lambda")
    beta = np.zeros(x.shape[1])
    if za.shape[1]:
        beta[active] = np.linalg.solve(gram, rhs)
    b0, coef = _to_original_scale(beta, mean, scale, ybar)
    return _state(b0, coef, "identity")


def fit_ridge_logistic(x, y, lam, ridge_guard=1e-8):
    n = x.shape[0]
    z, mean, scale, active = standardize(x)
    za = z[:, active]
    design = np.column_stack([np.ones(n), za])
    pen = np.concatenate([[ridge_guard], np.full(za.shape[1], n * lam + ridge_guard)])
    b = irls_logistic(design, y, penalty=pen)
    beta = np.zeros(x.shape[1])
    beta[active] = b[1:]
    b0, coef = _to_original_scale(beta, mean, scale, b[0])
    return _state(b0, coef, "logit")


def resolve_lambda(z, yc, lam, ratio, w=None):
    if lam is not None:
        return float(lam)
    return float(ratio) * lambda_max(z, yc, w)


def fit_lasso_gaussian(x, y, lam=None, ratio=None, tol=1e-7, max_iter=10_000):
    z, mean, scale, active = standardize(x)
    ybar = y.mean()
    yc = y - ybar
    lam = resolve_lambda(z, yc, lam, ratio)
    beta = coordinate_descent_lasso(z, yc, lam, tol=tol, max_iter=max_iter)
    b0, coef = _to_original_scale(beta, mean, scale, ybar)
    return _state(b0, coef, "identity")


def fit_lasso_logistic(x, y, lam=None, ratio=None, tol=1e-7, max_iter=10_000, outer_max=100):
    """L1-penalized logistic regression: IRLS outer loop, weighted coordinate descent inside.

    ``lambda_ratio`` is taken relative to the null-model lambda_max,
    ``max_j |<z_j, y - ybar>| / n``.
    """
    z, mean, scale, active = standardize(x)
    ybar = y.mean()
    lam = resolve_lambda(z, y - ybar, lam, ratio)
    beta = np.zeros(x.shape[1])
    b0 = float(np.log(ybar / (1.0 - ybar)))
    for _ in range(outer_max):
        eta = b0 + z @ beta
        mu = expit(eta)
        w = np.maximum(mu * (1.0 - mu), _W_FLOOR)
        work = eta + (y - mu) / w
        new_beta, new_b0, _ = _cd_lasso(z, work, lam, w=w, tol=tol, max_iter=max_iter, beta=beta, intercept=b0)
        change = max(float(np.max(np.abs(new_beta - beta), initial=0.0)), abs(new_b0 - b0))
        beta, b0 = new_beta, new_b0
        if change < tol:
            break
    else:
        raise NonConvergence(f"penalized IRLS did not converge in {outer_max} outer iterations", outer_max)
    b0, coef = _to_original_scale(beta, mean, scale, b0)
    return _state(b0, coef, "logit")


def fit_logistic(x, y, ridge_guard=1e-8, tol=1e-10, max_iter=100):
    design = np.column_stack([np.ones(x.shape[0]), x])
    b = irls_logistic(design, y, tol=tol, max_iter=max_iter, ridge_guard=ridge_guard)
    return _state(b[0], b[1:], "logit")
