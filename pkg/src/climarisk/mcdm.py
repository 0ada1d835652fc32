"""Landmark preservation scoring.

Indicator weights come from two routes that are blended linearly:

* objective: interaction of each indicator with the rest of its row,
  ranked TOPSIS-style into importances, then turned into weights by the
  order-relation (consecutive ratio) method;
* subjective: principal eigenvector of a pairwise comparison matrix
  (AHP), gated by the consistency ratio.
"""
import csv
import io
import os
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .errors import (
    AlphaOutOfRange,
    DimensionMismatch,
    NegativeSigma,
    NoRI,
    NotPositive,
    NotReciprocal,
    TooFewIndicators,
)

INTERACTION_EPS = 1e-9
IMPORTANCE_FLOOR = 1e-6
CR_LIMIT = 0.1
PROTECT_THRESHOLD = 0.5
FIRST_GRADIENT = 0.7

# Saaty random consistency indices
RANDOM_INDEX = {3: 0.58, 4: 0.90, 5: 1.12, 6: 1.24, 7: 1.32, 8: 1.41, 9: 1.45}


@dataclass(frozen=True)
class InteractionMatrix:
    D: np.ndarray
    best: np.ndarray
    worst: np.ndarray
    dist_ideal: np.ndarray
    dist_poor: np.ndarray


@dataclass(frozen=True)
class ImportanceVector:
    S: np.ndarray
    order: np.ndarray
    ratios: np.ndarray


@dataclass(frozen=True)
class WeightVector:
    weights: np.ndarray
    kind: str
    alpha: float = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return self.weights.shape[0]


@dataclass(frozen=True)
class AhpResult:
    matrix: np.ndarray
    lambda_max: float
    weights: np.ndarray
    CI: float
    CR: float
    RI: float
    iterations: int

    @property
    def consistent(self):
        return self.CR <= CR_LIMIT

    def weight_vector(self):
        return WeightVector(self.weights, "ahp")


@dataclass(frozen=True)
class ScoreReport:
    row_ids: tuple
    scores: np.ndarray
    gradients: tuple
    protect: np.ndarray
    threshold: float = PROTECT_THRESHOLD

    def ranking(self):
        """Row indices from highest to lowest score (ties keep input order)."""
        return np.argsort(-self.scores, kind="stable")

    def to_csv(self, id_name="id"):
        lines = [f"{id_name},score,gradient,protect"]
        for rid, s, g, p in zip(self.row_ids, self.scores, self.gradients, self.protect):
            lines.append(f"{rid},{format(float(s), '.17g')},{g},{str(bool(p)).lower()}")
        return "\n".join(lines) + "\n"


@dataclass
class RobustnessReport:
    row_ids: tuple
    baseline: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    spearman: np.ndarray
    flips: np.ndarray
    sigma: float
    trials: int
    recompute_weights: bool
    clamp: bool

    @property
    def spearman_mean(self):
        return float(np.mean(self.spearman))

    def to_dict(self):
        return {
            "sigma": self.sigma,
            "trials": self.trials,
            "recompute_weights": self.recompute_weights,
            "clamp": self.clamp,
            "spearman_mean": self.spearman_mean,
            "decision_flips": int(self.flips.sum()),
            "entities": [
                {"id": rid, "baseline": float(b), "mean": float(m), "std": float(s),
                 "flips": int(f)}
                for rid, b, m, s, f in zip(self.row_ids, self.baseline, self.mean,
                                           self.std, self.flips)
            ],
        }


# --------------------------------------------------------------------------
# objective weights


def interaction_matrix(panel, eps=INTERACTION_EPS):
    """Reciprocal absolute-difference interaction of every indicator.

    ``D[i, j] = m / (sum_{k != j} |x[i, k] - x[i, j]| + eps)`` plus the
    per-column best/worst values and the Euclidean distances of each
    column to them.
    """
    x = np.ascontiguousarray(getattr(panel, "values", panel), dtype=float)
    if x.ndim != 2 or x.shape[1] < 2:
        raise TooFewIndicators("interaction needs at least two indicators")
    D = np.asarray(kernels.interaction(x, float(eps)))
    best = D.max(axis=0)
    worst = D.min(axis=0)
    ideal = np.sqrt(((D - best) ** 2).sum(axis=0))
    poor = np.sqrt(((D - worst) ** 2).sum(axis=0))
    return InteractionMatrix(D, best, worst, ideal, poor)


def indicator_importance(im):
    """Relative closeness to the worst interaction; 0.5 for flat columns."""
    denom = im.dist_ideal + im.dist_poor
    flat = denom == 0
    S = np.where(flat, 0.5, im.dist_poor / np.where(flat, 1.0, denom))
    order = np.argsort(-S, kind="stable")
    s_sorted = np.maximum(S[order], IMPORTANCE_FLOOR)
    ratios = s_sorted[:-1] / s_sorted[1:]
    return ImportanceVector(S, order, ratios)


def orm_weights(importance):
    """Order-relation weights from descending importance ratios.

    With sorted importances ``s_1 >= ... >= s_m`` and ``r_j = s_{j-1}/s_j``
    the last weight is ``1 / (1 + sum_j prod_{i>=j} r_i)`` and the rest
    follow from ``w_{j-1} = r_j w_j``. Accepts an :class:`ImportanceVector`
    or a plain importance array.
    """
    if not isinstance(importance, ImportanceVector):
        S = np.asarray(importance, dtype=float)
        order = np.argsort(-S, kind="stable")
        s_sorted = np.maximum(S[order], IMPORTANCE_FLOOR)
        importance = ImportanceVector(S, order, s_sorted[:-1] / s_sorted[1:])
    r = importance.ratios
    m = r.shape[0] + 1
    # suffix products prod_{i=j}^{m} r_i for j = 2..m
    tail = np.cumprod(r[::-1])[::-1]
    w_sorted = np.empty(m)
    w_sorted[m - 1] = 1.0 / (1.0 + tail.sum())
    for j in range(m - 1, 0, -1):
        w_sorted[j - 1] = r[j - 1] * w_sorted[j]
    w = np.empty(m)
    w[importance.order] = w_sorted
    return WeightVector(w, "orm")


def topsis_orm_weights(panel, eps=INTERACTION_EPS):
    return orm_weights(indicator_importance(interaction_matrix(panel, eps)))


# --------------------------------------------------------------------------
# subjective weights


def parse_ahp_matrix(source):
    """Read a square comparison matrix from CSV; cells may be ``1/3`` etc."""
    if isinstance(source, (str, os.PathLike)) and os.path.exists(source):
        with open(source, encoding="utf-8-sig") as fh:
            text = fh.read()
    elif isinstance(source, bytes):
        text = source.decode("utf-8-sig")
    elif hasattr(source, "read"):
        text = source.read()
    else:
        text = str(source)
    rows = [r for r in csv.reader(io.StringIO(text)) if any(c.strip() for c in r)]
    rows = [r for r in rows if not r[0].strip().startswith("#")]
    try:
        mat = [[float(Fraction(c.strip())) for c in r] for r in rows]
    except (ValueError, ZeroDivisionError) as exc:
        raise NotPositive(f"unparsable comparison entry: {exc}") from None
    m = len(mat)
    if m == 0 or any(len(r) != m for r in mat):
        raise DimensionMismatch("comparison matrix must be square")
    return np.array(mat)


def _validate_comparison(B, tol):
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise DimensionMismatch("comparison matrix must be square")
    if not np.all(np.isfinite(B)) or np.any(B <= 0):
        raise NotPositive("comparison entries must be positive")
    if np.any(np.abs(np.diag(B) - 1.0) > tol):
        raise NotReciprocal("diagonal of a comparison matrix must be 1")
    bad = np.argwhere(np.abs(B * B.T - 1.0) > tol)
    if bad.size:
        i, j = bad[0]
        raise NotReciprocal(f"b[{i},{j}] * b[{j},{i}] != 1")


def ahp_weights(matrix, tol=1e-12, max_iter=10_000, reciprocal_tol=1e-6):
    """Principal eigenvector weights and consistency of a comparison matrix.

    Power iteration from the uniform vector until successive normalised
    iterates differ by less than ``tol``; ``lambda_max`` is the Rayleigh
    quotient of the converged vector.
    """
    B = np.asarray(matrix, dtype=float)
    _validate_comparison(B, reciprocal_tol)
    m = B.shape[0]
    if m > 2 and m not in RANDOM_INDEX:
        raise NoRI(f"no random index tabulated for m={m}")
    v = np.full(m, 1.0 / m)
    it = 0
    for it in range(1, max_iter + 1):
        nv = B @ v
        nv /= nv.sum()
        done = np.max(np.abs(nv - v)) < tol
        v = nv
        if done:
            break
    lam = float(v @ (B @ v) / (v @ v))
    if m <= 2:
        ci, cr, ri = 0.0, 0.0, 0.0
    else:
        ci = (lam - m) / (m - 1)
        ri = RANDOM_INDEX[m]
        cr = ci / ri
    return AhpResult(B, lam, v, float(ci), float(cr), float(ri), it)


# --------------------------------------------------------------------------
# blending and scoring


def combine_weights(w, a, alpha=0.5):
    ww = w.weights if isinstance(w, WeightVector) else np.asarray(w, dtype=float)
    aa = a.weights if isinstance(a, WeightVector) else np.asarray(a, dtype=float)
    if ww.shape != aa.shape:
        raise DimensionMismatch(f"{ww.shape[0]} vs {aa.shape[0]} weights")
    if not 0.0 <= alpha <= 1.0:
        raise AlphaOutOfRange(f"alpha={alpha} outside [0, 1]")
    if alpha == 1.0:
        z = ww.copy()
    elif alpha == 0.0:
        z = aa.copy()
    else:
        z = alpha * ww + (1.0 - alpha) * aa
    return WeightVector(z, "combined", float(alpha))


def gradient_of(score):
    if score > FIRST_GRADIENT:
        return "first"
    if score >= PROTECT_THRESHOLD:
        return "second"
    return "third"


def score(panel, z, row_ids=None):
    """Weighted sum per row with gradient band and protect flag.

    Bands: above 0.7 first, 0.5 to 0.7 inclusive second, below 0.5 third;
    rows scoring at least 0.5 are flagged for protection.
    """
    x = np.asarray(getattr(panel, "values", panel), dtype=float)
    zz = z.weights if isinstance(z, WeightVector) else np.asarray(z, dtype=float)
    if x.shape[1] != zz.shape[0]:
        raise DimensionMismatch(f"{x.shape[1]} indicators vs {zz.shape[0]} weights")
    s = x @ zz
    if row_ids is None:
        row_ids = getattr(panel, "row_ids", tuple(str(i) for i in range(x.shape[0])))
    return ScoreReport(tuple(row_ids), s, tuple(gradient_of(v) for v in s),
                       s >= PROTECT_THRESHOLD)


# --------------------------------------------------------------------------
# robustness


def spearman(a, b):
    """Spearman rank correlation; exact 1.0 for identical untied rankings."""
    from scipy.stats import rankdata

    ra, rb = rankdata(a), rankdata(b)
    n = ra.shape[0]
    if n < 2 or np.array_equal(ra, rb):
        return 1.0
    if np.unique(ra).size == n and np.unique(rb).size == n:
        d = ra - rb
        return float(1.0 - 6.0 * (d @ d) / (n * (n * n - 1.0)))
    ca, cb = ra - ra.mean(), rb - rb.mean()
    den = np.sqrt((ca @ ca) * (cb @ cb))
    return float(ca @ cb / den) if den > 0 else float("nan")


def robustness(panel, ahp, alpha=0.5, sigma=0.5, trials=100, seed=0,
               recompute_weights=True, clamp=False, threads=1):
    """Monte-Carlo stability of scores under Gaussian noise on the data.

    Each trial adds ``N(0, sigma)`` (standard deviation ``sigma``) to every
    normalised entry using its own generator seeded with ``seed + trial``.
    With ``recompute_weights`` the objective weights are rederived from the
    noisy data; the comparison-matrix weights never change.
    """
    if sigma < 0:
        raise NegativeSigma("sigma must be >= 0")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    x = np.asarray(panel.values, dtype=float)
    a = ahp.weight_vector() if isinstance(ahp, AhpResult) else ahp
    z0 = combine_weights(topsis_orm_weights(x), a, alpha)
    base = score(x, z0, panel.row_ids)

    def trial(t):
        rng = np.random.default_rng(seed + t)
        noisy = x + rng.normal(0.0, sigma, size=x.shape)
        if clamp:
            noisy = np.clip(noisy, 0.0, 1.0)
        z = combine_weights(topsis_orm_weights(noisy), a, alpha) if recompute_weights else z0
        return noisy @ z.weights

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(threads) as ex:
            runs = np.array(list(ex.map(trial, range(trials))))
    else:
        runs = np.array([trial(t) for t in range(trials)])
    rho = np.array([spearman(base.scores, r) for r in runs])
    flips = ((runs >= PROTECT_THRESHOLD) != base.protect[None, :]).sum(axis=0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return RobustnessReport(base.row_ids, base.scores, runs.mean(axis=0),
                                runs.std(axis=0), rho, flips, float(sigma), int(trials),
                                bool(recompute_weights), bool(clamp))
