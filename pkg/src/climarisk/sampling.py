"""SMOTE oversampling for two-class feature matrices."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import EmptyMinority, PoolTooSmall, SingleClass

DEFAULT_K = 5


@dataclass(frozen=True)
class SmoteConfig:
    """Settings for :func:`smote`.

    ``k=None`` means the canonical default of 5 clamped to what the pool
    can supply. An explicit ``k`` larger than the pool raises
    :class:`PoolTooSmall` instead of being clamped.
    ``neighbor_pool="majority"`` draws neighbours from the majority class
    instead, which also works when the minority has a single row.
    """

    k: int = None
    n_synthetic: int = None
    seed: int = 0
    neighbor_pool: str = "minority"

    def __post_init__(self):
        if self.k is not None and self.k < 1:
            raise ValueError("k must be >= 1")
        if self.n_synthetic is not None and self.n_synthetic < 0:
            raise ValueError("n_synthetic must be >= 0")
        if self.neighbor_pool not in ("minority", "majority"):
            raise ValueError(f"neighbor_pool must be 'minority' or 'majority', "
                             f"got {self.neighbor_pool!r}")


@dataclass(frozen=True)
class SmoteResult:
    samples: np.ndarray
    base_index: np.ndarray
    neighbor_index: np.ndarray
    u: np.ndarray
    k: int

    def trace_csv(self):
        lines = ["base_index,neighbor_index,u"]
        for b, n, u in zip(self.base_index, self.neighbor_index, self.u):
            lines.append(f"{b},{n},{format(float(u), '.17g')}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class LabeledDataset:
    features: np.ndarray
    labels: np.ndarray
    synthetic: np.ndarray = None

    def __post_init__(self):
        x = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels, dtype=float)
        if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
            raise ValueError("features must be N x d and labels length N")
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise ValueError("labels must be +1 or -1")
        s = (np.zeros(len(y), dtype=bool) if self.synthetic is None
             else np.asarray(self.synthetic, dtype=bool))
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "synthetic", s)

    @property
    def n(self):
        return self.labels.shape[0]

    def counts(self):
        return int(np.sum(self.labels > 0)), int(np.sum(self.labels < 0))

    def subset(self, idx):
        return LabeledDataset(self.features[idx], self.labels[idx], self.synthetic[idx])


def _resolve_k(config, pool_size):
    if config.k is None:
        k = min(DEFAULT_K, pool_size)
    else:
        k = config.k
    if k < 1 or k > pool_size:
        raise PoolTooSmall(
            f"need {max(k, 1)} neighbours but the {config.neighbor_pool} pool offers "
            f"{pool_size}")
    return k


def _interpolate(base, neigh, u, threads):
    if threads <= 1 or len(u) < 2 * threads:
        return base + (neigh - base) * u[:, None]
    chunks = np.array_split(np.arange(len(u)), threads)
    out = np.empty_like(base)

    def work(idx):
        out[idx] = base[idx] + (neigh[idx] - base[idx]) * u[idx, None]

    with ThreadPoolExecutor(threads) as ex:
        list(ex.map(work, chunks))
    return out


def smote(minority, pool=None, config=SmoteConfig(), threads=1):
    """Generate ``config.n_synthetic`` points by neighbour interpolation.

    Each synthetic point is ``x + (nb - x) * u`` where ``x`` is a uniformly
    drawn minority row, ``nb`` one of its ``k`` nearest rows in the pool
    (Euclidean, ties to the lower index) and ``u ~ U[0, 1)``. All random
    draws happen up front from one generator, so the result depends only
    on the inputs and the seed.

    ``pool`` is the majority matrix and is only used when
    ``config.neighbor_pool == "majority"``; in minority mode the minority
    rows are their own pool with self excluded.
    """
    x = np.ascontiguousarray(minority, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyMinority("minority sample set is empty")
    n_new = config.n_synthetic if config.n_synthetic is not None else x.shape[0]
    if config.neighbor_pool == "minority":
        p, exclude_self, size = x, True, x.shape[0] - 1
    else:
        if pool is None:
            raise PoolTooSmall("majority mode needs a majority pool")
        p = np.ascontiguousarray(pool, dtype=float)
        exclude_self, size = False, p.shape[0]
        if p.ndim != 2 or p.shape[1] != x.shape[1]:
            raise ValueError("pool dimension does not match minority")
    k = _resolve_k(config, size)

    rng = np.random.default_rng(config.seed)
    base_idx = rng.integers(0, x.shape[0], size=n_new)
    pick = rng.integers(0, k, size=n_new)
    u = rng.random(n_new)

    table = kernels.knn_indices(x, p, k, exclude_self)
    neigh_idx = table[base_idx, pick]
    samples = _interpolate(x[base_idx], p[neigh_idx], u, threads)
    return SmoteResult(samples, base_idx, neigh_idx, u, k)


def minority_label(dataset):
    n_pos, n_neg = dataset.counts()
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("dataset needs both classes")
    # ties: -1 is treated as the minority (loss class)
    return 1.0 if n_pos < n_neg else -1.0


def balance(dataset, config=SmoteConfig(), threads=1, return_trace=False):
    """Append synthetic minority rows.

    With ``config.n_synthetic`` unset the class counts are equalised; an
    already balanced dataset comes back unchanged.
    """
    n_pos, n_neg = dataset.counts()
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("dataset needs both classes")
    lab = minority_label(dataset)
    n_new = config.n_synthetic
    if n_new is None:
        n_new = abs(n_pos - n_neg)
    if n_new == 0:
        return (dataset, None) if return_trace else dataset
    mask = dataset.labels == lab
    cfg = SmoteConfig(config.k, n_new, config.seed, config.neighbor_pool)
    res = smote(dataset.features[mask], dataset.features[~mask], cfg, threads=threads)
    out = LabeledDataset(
        np.vstack([dataset.features, res.samples]),
        np.concatenate([dataset.labels, np.full(n_new, lab)]),
        np.concatenate([dataset.synthetic, np.ones(n_new, dtype=bool)]),
    )
    return (out, res) if return_trace else out
