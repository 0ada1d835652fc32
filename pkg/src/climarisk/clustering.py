"""K-means (Lloyd with k-means++ starts) and cluster-based labelling."""
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .dataset import NormalizedPanel
from .errors import (
    EmptyInput,
    KNotTwo,
    KTooLarge,
    NoPopulationColumn,
    TieBreakWarning,
)


@dataclass(frozen=True)
class Clustering:
    K: int
    centroids: np.ndarray
    assignment: np.ndarray
    inertia: float
    iterations: int
    inertia_history: np.ndarray


def _plusplus(x, K, rng):
    """k-means++ seeding: each new centre drawn with probability ~ D^2."""
    n = x.shape[0]
    centers = np.empty((K, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    closest = kernels.sq_distances(x, centers[:1])[:, 0]
    for c in range(1, K):
        total = closest.sum()
        if total <= 0:
            # every point already coincides with a centre
            centers[c] = x[rng.integers(n)]
            continue
        pick = int(np.searchsorted(np.cumsum(closest), rng.random() * total, side="right"))
        centers[c] = x[min(pick, n - 1)]
        closest = np.minimum(closest, kernels.sq_distances(x, centers[c:c + 1])[:, 0])
    return centers


def _means(x, labels, K):
    sums = np.zeros((K, x.shape[1]))
    counts = np.zeros(K, dtype=np.int64)
    # fixed-order accumulation
    for i in range(x.shape[0]):
        sums[labels[i]] += x[i]
        counts[labels[i]] += 1
    return sums, counts


def _lloyd(x, centers, tol, max_iter, check):
    K = centers.shape[0]
    history = []
    labels, dist = kernels.assign_nearest(x, centers)
    it = 0
    for it in range(1, max_iter + 1):
        history.append(float(dist.sum()))
        sums, counts = _means(x, labels, K)
        new = centers.copy()
        filled = counts > 0
        new[filled] = sums[filled] / counts[filled, None]
        for c in np.flatnonzero(~filled):
            # re-seed an emptied centre on the worst-served point
            _, d_now = kernels.assign_nearest(x, new)
            far = int(np.argmax(d_now))
            new[c] = x[far]
        shift = float(np.max(np.abs(new - centers)))
        centers = new
        labels, dist = kernels.assign_nearest(x, centers)
        if check and dist.sum() > history[-1] * (1 + 1e-12) + 1e-300:
            raise AssertionError("k-means inertia increased")
        if shift <= tol:
            break
    history.append(float(dist.sum()))
    centers, labels = _hartigan(x, centers, labels, history, max_iter, check)
    return centers, labels, history[-1], it, np.array(history)


def _hartigan(x, centers, labels, history, max_passes, check):
    """Single-point transfers that strictly lower the inertia.

    Moving point ``i`` from cluster ``a`` (size ``n_a``) to ``b`` changes
    the inertia by ``n_b/(n_b+1) d_b - n_a/(n_a-1) d_a``. Partitions stable
    under these moves are also Lloyd fixed points, but the converse fails,
    so this pass escapes some of Lloyd's poorer local optima.
    """
    K = centers.shape[0]
    labels = labels.copy()
    for _ in range(max_passes):
        moved = False
        for i in range(x.shape[0]):
            a = labels[i]
            counts = np.bincount(labels, minlength=K)
            if counts[a] < 2:
                continue
            d = kernels.sq_distances(x[i:i + 1], centers)[0]
            cost = counts / (counts + 1.0) * d
            remove = counts[a] / (counts[a] - 1.0) * d[a]
            cost[a] = np.inf
            b = int(np.argmin(cost))
            if cost[b] < remove * (1 - 1e-12):
                labels[i] = b
                sums, counts = _means(x, labels, K)
                filled = counts > 0
                centers = centers.copy()
                centers[filled] = sums[filled] / counts[filled, None]
                inertia = float(((x - centers[labels]) ** 2).sum())
                if check and inertia > history[-1] * (1 + 1e-12) + 1e-300:
                    raise AssertionError("k-means inertia increased")
                history.append(inertia)
                moved = True
        if not moved:
            break
    return centers, labels


def kmeans(points, K, seed=0, tol=1e-10, max_iter=300, restarts=10, check=False):
    """Cluster ``points`` into ``K`` groups.

    Points are processed in lexicographic order so the partition does not
    depend on how the input rows are ordered; assignments are returned in
    input order. The best of ``restarts`` seeded runs (lowest inertia) wins.
    ``check=True`` asserts that inertia never increases between iterations.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyInput("no points to cluster")
    n = x.shape[0]
    if K < 1:
        raise ValueError("K must be >= 1")
    if K > n:
        raise KTooLarge(f"K={K} exceeds {n} points")
    if not np.all(np.isfinite(x)):
        raise ValueError("points must be finite")

    order = np.lexsort(x.T[::-1])
    xs = np.ascontiguousarray(x[order])
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(max(1, restarts)):
        start = _plusplus(xs, K, rng)
        run = _lloyd(xs, start, tol, max_iter, check)
        if best is None or run[2] < best[2]:
            best = run
    centers, labels_sorted, inertia, it, hist = best
    labels = np.empty(n, dtype=np.int64)
    labels[order] = labels_sorted
    return Clustering(K, centers, labels, inertia, it, hist)


def reweight_population(panel, k_percent=15.0, column="population"):
    """Scale the population column by ``1 + k_percent/100``.

    Values are not re-clamped into [0, 1].
    """
    if not k_percent > -100:
        raise ValueError("k_percent must exceed -100")
    if column not in panel.names:
        raise NoPopulationColumn(f"panel has no population column {column!r}")
    j = panel.names.index(column)
    values = panel.values.copy()
    values[:, j] *= 1.0 + k_percent / 100.0
    if isinstance(panel, NormalizedPanel):
        return NormalizedPanel(panel.row_ids, panel.names, panel.directions, values,
                               panel.id_name, x_min=panel.x_min, x_max=panel.x_max,
                               degenerate=panel.degenerate)
    return type(panel)(panel.row_ids, panel.names, panel.directions, values, panel.id_name)


def label_clusters(clustering, benchmark_scores):
    """+1 for the cluster with the higher mean benchmark score, else -1.

    Equal means favour the lower cluster index and emit a
    :class:`TieBreakWarning`.
    """
    if clustering.K != 2:
        raise KNotTwo(f"labelling needs K=2, got {clustering.K}")
    s = np.asarray(benchmark_scores, dtype=float)
    a = clustering.assignment
    if s.shape != a.shape:
        raise ValueError("benchmark scores must align with the clustered points")
    means = [s[a == c].mean() if np.any(a == c) else -np.inf for c in (0, 1)]
    if means[0] == means[1]:
        warnings.warn("clusters have equal benchmark means; cluster 0 labelled positive",
                      TieBreakWarning, stacklevel=2)
        positive = 0
    else:
        positive = 0 if means[0] > means[1] else 1
    return np.where(a == positive, 1, -1)
