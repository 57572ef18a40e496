"""CART regression/classification trees and a bootstrap random forest.

Trees are stored as flat arrays (``feature``, ``threshold``, ``left``,
``right``, ``value``) with ``feature == -1`` marking leaves, so a fitted
tree or forest serializes as a handful of vectors.  A forest is the
concatenation of its trees plus a ``roots`` vector.

Split quality is the reduction in within-node sum of squares.  For a 0/1
outcome the size-weighted Gini impurity is exactly twice the sum of
squares, so the same search implements the Gini criterion.  Thresholds are
midpoints between consecutive distinct values; ties in gain keep the
lowest feature index, then the lowest threshold.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

from .._rng import make_rng


@njit(cache=True, nogil=True)
def _grow(x, y, max_depth, min_leaf, mtry, keys):
    n, p = x.shape
    cap = 2 * n + 1
    feature = np.full(cap, -1, np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    value = np.zeros(cap)
    start = np.zeros(cap, np.int64)
    end = np.zeros(cap, np.int64)
    depth = np.zeros(cap, np.int64)
    rows = np.arange(n)
    buf = np.empty(n, np.int64)
    stack = np.empty(cap, np.int64)

    ybar = y.mean()
    sse = 0.0
    for i in range(n):
        sse += (y[i] - ybar) ** 2
    tol = 1e-12 * (sse + 1.0)

    value[0] = ybar
    end[0] = n
    count = 1
    stack[0] = 0
    sp = 1
    all_feats = np.arange(p)
    while sp > 0:
        sp -= 1
        node = stack[sp]
        s = start[node]
        e = end[node]
        m = e - s
        if (max_depth >= 0 and depth[node] >= max_depth) or m < 2 * min_leaf:
            continue
        seg = rows[s:e]
        ymin = y[seg[0]]
        ymax = ymin
        tot = 0.0
        for i in range(m):
            v = y[seg[i]]
            tot += v
            if v < ymin:
                ymin = v
            if v > ymax:
                ymax = v
        if ymin == ymax:
            continue
        if mtry >= p:
            feats = all_feats
        else:
            feats = np.sort(np.argsort(keys[node])[:mtry])
        base = tot * tot / m
        best_gain = 0.0
        best_f = -1
        best_thr = 0.0
        for f in feats:
            xs = np.empty(m)
            for i in range(m):
                xs[i] = x[seg[i], f]
            order = np.argsort(xs, kind="mergesort")
            cs = 0.0
            for i in range(m - 1):
                cs += y[seg[order[i]]]
                nl = i + 1
                nr = m - nl
                if nr < min_leaf:
                    break
                if nl < min_leaf:
                    continue
                a = xs[order[i]]
                b = xs[order[i + 1]]
                if a < b:
                    gain = cs * cs / nl + (tot - cs) * (tot - cs) / nr - base
                    if gain > best_gain:
                        best_gain = gain
                        best_f = f
                        best_thr = 0.5 * (a + b)
        if best_f < 0 or best_gain <= tol:
            continue
        # stable partition of the node's rows: left block, then right block
        nleft = 0
        for i in range(m):
            if x[seg[i], best_f] <= best_thr:
                buf[nleft] = seg[i]
                nleft += 1
        k = nleft
        for i in range(m):
            if x[seg[i], best_f] > best_thr:
                buf[k] = seg[i]
                k += 1
        for i in range(m):
            rows[s + i] = buf[i]
        feature[node] = best_f
        threshold[node] = best_thr
        lc = count
        rc = count + 1
        count += 2
        start[lc], end[lc] = s, s + nleft
        start[rc], end[rc] = s + nleft, e
        depth[lc] = depth[node] + 1
        depth[rc] = depth[node] + 1
        acc = 0.0
        for i in range(s, s + nleft):
            acc += y[rows[i]]
        value[lc] = acc / nleft
        acc = 0.0
        for i in range(s + nleft, e):
            acc += y[rows[i]]
        value[rc] = acc / (m - nleft)
        left[node] = lc
        right[node] = rc
        # right pushed first so the left subtree is expanded first
        stack[sp] = right[node]
        stack[sp + 1] = left[node]
        sp += 2
    return feature[:count], threshold[:count], left[:count], right[:count], value[:count]


def build_tree(x, y, max_depth=None, min_leaf=5, max_features=None, rng=None):
    """Grow one tree; ``max_features`` < p samples that many columns per split."""
    x = np.ascontiguousarray(x, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    n, p = x.shape
    mtry = p if max_features is None else min(int(max_features), p)
    if mtry < p:
        keys = rng.random((2 * n + 1, p))
    else:
        keys = np.zeros((1, p))
    feature, threshold, left, right, value = _grow(
        x, y, -1 if max_depth is None else int(max_depth), int(min_leaf), mtry, keys
    )
    return {"feature": feature, "threshold": threshold, "left": left, "right": right, "value": value}


def _descend(tree, x, nodes):
    feature, threshold = tree["feature"], tree["threshold"]
    left, right = tree["left"], tree["right"]
    rows = np.arange(x.shape[0])[:, None] if nodes.ndim == 2 else np.arange(x.shape[0])
    while True:
        f = feature[nodes]
        internal = f >= 0
        if not internal.any():
            return nodes
        xv = x[rows, np.where(internal, f, 0)]
        step = np.where(xv <= threshold[nodes], left[nodes], right[nodes])
        nodes = np.where(internal, step, nodes)


def predict_tree(tree, x):
    x = np.asarray(x, dtype=float)
    nodes = np.zeros(x.shape[0], dtype=np.int64)
    return tree["value"][_descend(tree, x, nodes)]


def fit_forest(x, y, trees=100, max_features=None, bootstrap=True, max_depth=None, min_leaf=5, seed=0):
    """Breiman forest; tree ``t`` draws from its own stream keyed ``(seed, t)``."""
    n, p = x.shape
    mtry = max_features if max_features is not None else max(1, math.ceil(math.sqrt(p)))
    parts = []
    offset = 0
    roots = []
    for t in range(trees):
        rng = make_rng(seed, t)
        rows = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        tr = build_tree(x[rows], y[rows], max_depth=max_depth, min_leaf=min_leaf, max_features=mtry, rng=rng)
        internal = tr["feature"] >= 0
        tr["left"] = np.where(internal, tr["left"] + offset, -1)
        tr["right"] = np.where(internal, tr["right"] + offset, -1)
        roots.append(offset)
        offset += tr["feature"].size
        parts.append(tr)
    state = {k: np.concatenate([tr[k] for tr in parts]) for k in parts[0]}
    state["roots"] = np.array(roots, dtype=np.int64)
    return state


def predict_forest(state, x):
    x = np.asarray(x, dtype=float)
    nodes = np.broadcast_to(state["roots"], (x.shape[0], state["roots"].size)).copy()
    leaves = _descend(state, x, nodes)
    return state["value"][leaves].mean(axis=1)
