"""Hot numeric kernels.

Every kernel exists twice: an explicit-loop version compiled with numba
(``*_loop``) and a vectorised numpy version (``*_np``). The public name
dispatches to one of them according to :data:`climarisk._jit.USE_NUMBA`.
Both paths use the same tie-breaking (lowest index wins) so they agree on
discrete outputs and match floating outputs to rounding.
"""
import numpy as np

from ._jit import USE_NUMBA, njit

__all__ = [
    "TAU",
    "assign_nearest",
    "interaction",
    "knn_indices",
    "smo_solve",
    "sq_distances",
]

# floor for the curvature of a working pair (degenerate Gram directions)
TAU = 1e-12


# --------------------------------------------------------------------------
# squared euclidean distances


@njit
def sq_distances_loop(a, b):
    n, d = a.shape
    m = b.shape[0]
    out = np.empty((n, m))
    for i in range(n):
        for j in range(m):
            s = 0.0
            for k in range(d):
                t = a[i, k] - b[j, k]
                s += t * t
            out[i, j] = s
    return out


def sq_distances_np(a, b):
    diff = a[:, None, :] - b[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


# --------------------------------------------------------------------------
# nearest-centroid assignment


@njit
def assign_nearest_loop(x, centers):
    n, d = x.shape
    k = centers.shape[0]
    labels = np.empty(n, dtype=np.int64)
    dist = np.empty(n)
    for i in range(n):
        best = np.inf
        arg = 0
        for c in range(k):
            s = 0.0
            for f in range(d):
                t = x[i, f] - centers[c, f]
                s += t * t
            if s < best:
                best = s
                arg = c
        labels[i] = arg
        dist[i] = best
    return labels, dist


def assign_nearest_np(x, centers):
    d2 = sq_distances_np(x, centers)
    labels = np.argmin(d2, axis=1).astype(np.int64)
    return labels, d2[np.arange(x.shape[0]), labels]


# --------------------------------------------------------------------------
# k nearest neighbours (stable: equal distances resolved by lower index)


@njit
def knn_indices_loop(x, pool, k, exclude_self):
    n, d = x.shape
    m = pool.shape[0]
    out = np.empty((n, k), dtype=np.int64)
    best = np.empty(k)
    for i in range(n):
        filled = 0
        for j in range(m):
            if exclude_self and j == i:
                continue
            s = 0.0
            for c in range(d):
                t = x[i, c] - pool[j, c]
                s += t * t
            # strict comparison keeps the earlier index ahead on ties
            if filled == k and s >= best[k - 1]:
                continue
            pos = filled if filled < k else k - 1
            while pos > 0 and best[pos - 1] > s:
                if pos < k:
                    best[pos] = best[pos - 1]
                    out[i, pos] = out[i, pos - 1]
                pos -= 1
            best[pos] = s
            out[i, pos] = j
            if filled < k:
                filled += 1
    return out


def knn_indices_np(x, pool, k, exclude_self):
    d2 = sq_distances_np(x, pool)
    if exclude_self:
        np.fill_diagonal(d2, np.inf)
    return np.argsort(d2, axis=1, kind="stable")[:, :k].astype(np.int64)


# --------------------------------------------------------------------------
# reciprocal absolute-difference interaction of each indicator with its row


@njit
def interaction_loop(x, eps):
    n, m = x.shape
    out = np.empty((n, m))
    for i in range(n):
        for j in range(m):
            s = 0.0
            for k in range(m):
                if k != j:
                    s += abs(x[i, k] - x[i, j])
            out[i, j] = m / (s + eps)
    return out


def interaction_np(x, eps):
    m = x.shape[1]
    spread = np.abs(x[:, None, :] - x[:, :, None]).sum(axis=2)
    return m / (spread + eps)


# --------------------------------------------------------------------------
# SMO for the box-constrained dual with one equality constraint:
#   min 0.5 a'Qa - e'a   s.t. 0 <= a <= C, y'a = 0,   Q_ij = y_i y_j K_ij
# working pair chosen by maximal violation (i) and second-order gain (j).


@njit
def _update_pair(alpha, y, i, j, gi, gj, kii, kjj, kij, c):
    quad = kii + kjj - 2.0 * kij
    if quad <= 0.0:
        quad = TAU
    ai_old = alpha[i]
    aj_old = alpha[j]
    if y[i] != y[j]:
        delta = (-gi - gj) / quad
        diff = ai_old - aj_old
        ai = ai_old + delta
        aj = aj_old + delta
        if diff > 0.0:
            if aj < 0.0:
                aj = 0.0
                ai = diff
        else:
            if ai < 0.0:
                ai = 0.0
                aj = -diff
        if diff > 0.0:
            if ai > c:
                ai = c
                aj = c - diff
        else:
            if aj > c:
                aj = c
                ai = c + diff
    else:
        delta = (gi - gj) / quad
        total = ai_old + aj_old
        ai = ai_old - delta
        aj = aj_old + delta
        if total > c:
            if ai > c:
                ai = c
                aj = total - c
        else:
            if aj < 0.0:
                aj = 0.0
                ai = total
        if total > c:
            if aj > c:
                aj = c
                ai = total - c
        else:
            if ai < 0.0:
                ai = 0.0
                aj = total
    alpha[i] = ai
    alpha[j] = aj
    return ai - ai_old, aj - aj_old


_update_pair_py = getattr(_update_pair, "py_func", _update_pair)


@njit
def smo_solve_loop(gram, y, c, tol, max_iter):
    n = y.shape[0]
    alpha = np.zeros(n)
    grad = -np.ones(n)
    history = np.empty(max_iter + 1)
    history[0] = 0.0
    gap = np.inf
    it = 0
    converged = False
    while True:
        g_max = -np.inf
        i = -1
        for t in range(n):
            if (y[t] > 0 and alpha[t] < c) or (y[t] < 0 and alpha[t] > 0):
                v = -y[t] * grad[t]
                if v > g_max:
                    g_max = v
                    i = t
        g_min = np.inf
        j = -1
        best = np.inf
        for t in range(n):
            if (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < c):
                v = -y[t] * grad[t]
                if v < g_min:
                    g_min = v
                if i >= 0:
                    b = g_max - v
                    if b > 0.0:
                        a = gram[i, i] + gram[t, t] - 2.0 * gram[i, t]
                        if a <= 0.0:
                            a = TAU
                        val = -(b * b) / a
                        if val < best:
                            best = val
                            j = t
        gap = g_max - g_min
        if i < 0 or j < 0 or gap < tol:
            converged = True
            if i < 0 or j < 0:
                gap = 0.0 if gap < 0.0 or not np.isfinite(gap) else gap
            break
        if it >= max_iter:
            break
        dai, daj = _update_pair(alpha, y, i, j, grad[i], grad[j],
                                gram[i, i], gram[j, j], gram[i, j], c)
        yi = y[i]
        yj = y[j]
        for t in range(n):
            grad[t] += y[t] * (yi * gram[t, i] * dai + yj * gram[t, j] * daj)
        it += 1
        s = 0.0
        for t in range(n):
            s += alpha[t] * (grad[t] - 1.0)
        history[it] = -0.5 * s
    return alpha, it, gap, history[: it + 1], converged


def smo_solve_np(gram, y, c, tol, max_iter):
    n = y.shape[0]
    alpha = np.zeros(n)
    grad = -np.ones(n)
    diag = np.diag(gram).copy()
    history = [0.0]
    gap = np.inf
    it = 0
    converged = False
    pos = y > 0
    neg = ~pos
    while True:
        up = (pos & (alpha < c)) | (neg & (alpha > 0))
        low = (pos & (alpha > 0)) | (neg & (alpha < c))
        score = -y * grad
        i = int(np.argmax(np.where(up, score, -np.inf))) if up.any() else -1
        g_max = score[i] if i >= 0 else -np.inf
        g_min = score[low].min() if low.any() else np.inf
        j = -1
        if i >= 0:
            b = g_max - score
            cand = low & (b > 0.0)
            if cand.any():
                a = diag[i] + diag - 2.0 * gram[i]
                a = np.where(a <= 0.0, TAU, a)
                val = np.where(cand, -(b * b) / a, np.inf)
                j = int(np.argmin(val))
        gap = g_max - g_min
        if i < 0 or j < 0 or gap < tol:
            converged = True
            if i < 0 or j < 0:
                gap = 0.0 if gap < 0.0 or not np.isfinite(gap) else gap
            break
        if it >= max_iter:
            break
        dai, daj = _update_pair_py(alpha, y, i, j, grad[i], grad[j],
                                   gram[i, i], gram[j, j], gram[i, j], c)
        grad += y * (y[i] * gram[:, i] * dai + y[j] * gram[:, j] * daj)
        it += 1
        history.append(-0.5 * float(np.dot(alpha, grad - 1.0)))
    return alpha, it, float(gap), np.asarray(history), converged


# --------------------------------------------------------------------------
# dispatch

if USE_NUMBA:
    sq_distances = sq_distances_loop
    assign_nearest = assign_nearest_loop
    knn_indices = knn_indices_loop
    interaction = interaction_loop
    smo_solve = smo_solve_loop
else:
    sq_distances = sq_distances_np
    assign_nearest = assign_nearest_np
    knn_indices = knn_indices_np
    interaction = interaction_np
    smo_solve = smo_solve_np
