"""Independent reference computations used by the tests."""
import itertools
from fractions import Fraction

import numpy as np


def dual_value(alpha, x, y):
    v = (alpha * y) @ x
    return alpha.sum() - 0.5 * v @ v


def grid_qp_dual(x, y, C, points=21, rounds=30):
    """Maximise the soft-margin dual by zooming grid search.

    The last multiplier is eliminated through the equality constraint and
    the remaining ones are searched on a shrinking box around the best
    feasible grid point. The objective is concave, so zooming converges.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    lo = np.zeros(n - 1)
    hi = np.full(n - 1, float(C))
    best_val, best = -np.inf, None
    for _ in range(rounds):
        axes = [np.linspace(a, b, points) for a, b in zip(lo, hi)]
        grid = np.array(np.meshgrid(*axes, indexing="ij")).reshape(n - 1, -1).T
        last = -y[-1] * (grid @ y[:-1])
        ok = (last >= 0) & (last <= C)
        if not np.any(ok):
            break
        alpha = np.column_stack([grid[ok], last[ok]])
        v = (alpha * y) @ x
        vals = alpha.sum(axis=1) - 0.5 * np.einsum("ij,ij->i", v, v)
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val, best = float(vals[i]), alpha[i]
        step = (hi - lo) / (points - 1)
        lo = np.maximum(0.0, best[:-1] - 2 * step)
        hi = np.minimum(float(C), best[:-1] + 2 * step)
    return best_val, best


def mann_whitney_auc(scores, labels):
    """Exact pairwise-win AUC as a Fraction (ties count one half)."""
    pos = [s for s, l in zip(scores, labels) if l > 0]
    neg = [s for s, l in zip(scores, labels) if l <= 0]
    wins = Fraction(0)
    for p in pos:
        for q in neg:
            if p > q:
                wins += 1
            elif p == q:
                wins += Fraction(1, 2)
    return wins / (len(pos) * len(neg))


def kmeans_optimum(x, K=2):
    """Minimum within-cluster sum of squares over every K-partition."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    best = np.inf
    for labels in itertools.product(range(K), repeat=n - 1):
        lab = np.array((0,) + labels)
        if len(set(lab)) < K:
            continue
        sse = 0.0
        for c in range(K):
            pts = x[lab == c]
            sse += ((pts - pts.mean(axis=0)) ** 2).sum()
        best = min(best, sse)
    return best


def knn_oracle(x, pool, k, exclude_self):
    out = []
    for i, row in enumerate(x):
        d = ((pool - row) ** 2).sum(axis=1)
        order = [j for j in np.argsort(d, kind="stable") if not (exclude_self and j == i)]
        out.append(order[:k])
    return np.array(out)
