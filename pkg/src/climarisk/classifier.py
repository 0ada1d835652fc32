"""Linear soft-margin SVM, sigmoid calibration, cross-validation and ROC."""
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import (
    DidNotConverge,
    DimensionMismatch,
    FoldTooSmall,
    SingleClass,
    SingleClassFold,
)
from .sampling import LabeledDataset

MODEL_FORMAT = "climarisk.svm"
MODEL_VERSION = 1

# multipliers below this count as zero when reading off support vectors
ALPHA_EPS = 1e-10


@dataclass(frozen=True)
class SvmModel:
    w: np.ndarray
    b: float
    alphas: np.ndarray
    C: float
    support_indices: np.ndarray
    converged: bool = True
    iterations: int = 0
    kkt_gap: float = 0.0
    objective_history: np.ndarray = field(default=None, repr=False)

    @property
    def dim(self):
        return self.w.shape[0]

    def dual_objective(self, features, labels):
        a, y = self.alphas, np.asarray(labels, dtype=float)
        v = (a * y) @ np.asarray(features, dtype=float)
        return float(a.sum() - 0.5 * v @ v)


@dataclass(frozen=True)
class Calibration:
    """Sigmoid map ``p(f) = 1 / (1 + exp(A f + B))``."""

    A: float
    B: float
    iterations: int = 0


@dataclass
class CvReport:
    k: int
    accuracies: list
    fold_sizes: list
    folds: np.ndarray
    roc: list
    auc: list

    @property
    def mean_accuracy(self):
        return float(sum(self.accuracies) / len(self.accuracies))


# --------------------------------------------------------------------------
# training


def _check_xy(data):
    x = np.ascontiguousarray(data.features, dtype=float)
    y = np.ascontiguousarray(data.labels, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("features must be finite")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise SingleClass("training data contains a single class")
    return x, y


def _offset(x, y, alpha, C, w):
    """Offset from the KKT conditions.

    Mean over free support vectors of ``y_j - w.x_j``; without free vectors
    the midpoint of the interval the bounded multipliers allow.
    """
    s = x @ w
    r = y - s
    tol = 1e-8 * max(C, 1.0)
    free = (alpha > tol) & (alpha < C - tol)
    if np.any(free):
        return float(np.mean(r[free]))
    at_zero = alpha <= tol
    at_c = ~at_zero
    lower = (at_zero & (y > 0)) | (at_c & (y < 0))
    upper = (at_zero & (y < 0)) | (at_c & (y > 0))
    lo = r[lower].max() if np.any(lower) else -np.inf
    hi = r[upper].min() if np.any(upper) else np.inf
    if np.isfinite(lo) and np.isfinite(hi):
        return float(0.5 * (lo + hi))
    return float(lo if np.isfinite(lo) else hi)


def train_svm(data, C=1.0, tol=1e-6, max_iter=None):
    """Fit a linear soft-margin SVM by solving the dual with SMO.

    ``max_iter`` counts pair updates and defaults to ``10 * N`` sweeps of
    ``N`` updates each. When it is exhausted the partially optimised model
    is returned with ``converged=False`` and a :class:`DidNotConverge`
    warning.
    """
    if not C > 0:
        raise ValueError("C must be positive")
    if not tol > 0:
        raise ValueError("tol must be positive")
    x, y = _check_xy(data)
    n = y.shape[0]
    if max_iter is None:
        max_iter = 10 * n * n
    gram = x @ x.T
    alpha, it, gap, hist, ok = kernels.smo_solve(gram, y, float(C), float(tol), int(max_iter))
    alpha = np.asarray(alpha)
    if not ok:
        warnings.warn(f"SMO stopped after {it} updates with KKT gap {gap:.3g}",
                      DidNotConverge, stacklevel=2)
    w = (alpha * y) @ x
    b = _offset(x, y, alpha, C, w)
    sv = np.flatnonzero(alpha > ALPHA_EPS)
    return SvmModel(w, b, alpha, float(C), sv, bool(ok), int(it), float(gap),
                    np.asarray(hist))


def kkt_residuals(model, features, labels):
    """Per-sample violation of the soft-margin optimality conditions."""
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=float)
    margin = y * (x @ model.w + model.b)
    a, C = model.alphas, model.C
    tol = 1e-8 * max(C, 1.0)
    res = np.where(a <= tol, np.maximum(0.0, 1.0 - margin),
                   np.where(a >= C - tol, np.maximum(0.0, margin - 1.0),
                            np.abs(margin - 1.0)))
    return res


def decision_value(model, x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != model.dim:
        raise DimensionMismatch(f"model has {model.dim} features, input has {x.shape[-1]}")
    out = x @ model.w + model.b
    return float(out) if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------
# calibration


def _sigmoid_nll(f, t, A, B):
    z = A * f + B
    # log(1 + exp(z)) evaluated stably
    return float(np.sum(t * z + np.logaddexp(0.0, -z)))


def fit_calibration(model, data, max_iter=100, tol=1e-12):
    """Fit the sigmoid slope/offset by damped Newton on the log-loss.

    Targets are smoothed to ``(N+ + 1)/(N+ + 2)`` and ``1/(N- + 2)``.
    """
    y = np.asarray(data.labels, dtype=float)
    n_pos = int(np.sum(y > 0))
    n_neg = int(np.sum(y < 0))
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("calibration needs both classes")
    f = np.atleast_1d(decision_value(model, data.features))
    hi = (n_pos + 1.0) / (n_pos + 2.0)
    lo = 1.0 / (n_neg + 2.0)
    t = np.where(y > 0, hi, lo)

    A, B = 0.0, math.log((n_neg + 1.0) / (n_pos + 1.0))
    fval = _sigmoid_nll(f, t, A, B)
    sigma = 1e-12
    it = 0
    for it in range(1, max_iter + 1):
        p = _probability(f, A, B)
        d2 = p * (1.0 - p)
        h11 = sigma + float(np.sum(f * f * d2))
        h22 = sigma + float(np.sum(d2))
        h21 = float(np.sum(f * d2))
        d1 = t - p
        g1 = float(np.sum(f * d1))
        g2 = float(np.sum(d1))
        if abs(g1) < tol and abs(g2) < tol:
            break
        det = h11 * h22 - h21 * h21
        dA = -(h22 * g1 - h21 * g2) / det
        dB = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * dA + g2 * dB
        step = 1.0
        while step >= 1e-10:
            nA, nB = A + step * dA, B + step * dB
            nf = _sigmoid_nll(f, t, nA, nB)
            if nf < fval + 1e-4 * step * gd:
                A, B, fval = nA, nB, nf
                break
            step /= 2.0
        else:
            break
    return Calibration(float(A), float(B), it)


def _probability(f, A, B):
    z = A * np.asarray(f, dtype=float) + B
    # 1/(1+exp(z)) without overflow for either sign of z
    return np.where(z >= 0, np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))),
                    1.0 / (1.0 + np.exp(-np.abs(z))))


def predict_probability(model, calib, x):
    p = _probability(decision_value(model, x), calib.A, calib.B)
    return float(p) if np.ndim(p) == 0 else p


# --------------------------------------------------------------------------
# evaluation


def roc_curve(scores, labels):
    """ROC points over every distinct threshold and the trapezoid AUC.

    Returns ``(points, auc)`` with ``points`` an array of rows
    ``(fpr, tpr, threshold)``; the first row is ``(0, 0, inf)``. The AUC is
    accumulated in integer units and divided once, so tied scores count
    one half exactly as in the pairwise-win statistic.
    """
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels)
    pos = y > 0
    n_pos = int(pos.sum())
    n_neg = int(s.shape[0] - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("ROC needs both classes")
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    pos_sorted = pos[order]
    tp = np.cumsum(pos_sorted)
    fp = np.cumsum(~pos_sorted)
    last = np.r_[np.flatnonzero(np.diff(s_sorted) != 0), s.shape[0] - 1]
    tps = np.r_[0, tp[last]].astype(np.int64)
    fps = np.r_[0, fp[last]].astype(np.int64)
    thresholds = np.r_[np.inf, s_sorted[last]]
    twice_area = int(np.sum(np.diff(fps) * (tps[1:] + tps[:-1])))
    auc = twice_area / (2 * n_pos * n_neg)
    points = np.column_stack([fps / n_neg, tps / n_pos, thresholds])
    return points, auc


def roc_csv(points):
    lines = ["fpr,tpr,threshold"]
    for f, t, th in points:
        th_s = "inf" if math.isinf(th) else format(float(th), ".17g")
        lines.append(f"{format(float(f), '.17g')},{format(float(t), '.17g')},{th_s}")
    return "\n".join(lines) + "\n"


def stratified_folds(labels, k, seed):
    """Fold index per sample; each class is shuffled and dealt round-robin."""
    y = np.asarray(labels)
    n = y.shape[0]
    if k < 2:
        raise FoldTooSmall("need at least 2 folds")
    if n < k:
        raise FoldTooSmall(f"{n} samples cannot fill {k} folds")
    rng = np.random.default_rng(seed)
    order = np.concatenate([rng.permutation(np.flatnonzero(y > 0)),
                            rng.permutation(np.flatnonzero(y <= 0))])
    folds = np.empty(n, dtype=np.int64)
    folds[order] = np.arange(n) % k
    return folds


def cross_validate(data, k=5, C=1.0, seed=0, tol=1e-6, max_iter=None, threads=1):
    """Stratified k-fold accuracy, with ROC/AUC of every test fold.

    Folds may be trained on a thread pool; results are collected in fold
    order so the report does not depend on ``threads``.
    """
    folds = stratified_folds(data.labels, k, seed)
    for f in range(k):
        train = data.labels[folds != f]
        if not (np.any(train > 0) and np.any(train < 0)):
            raise SingleClassFold(f"training split for fold {f} has a single class")

    def run(f):
        test = folds == f
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DidNotConverge)
            model = train_svm(data.subset(~test), C=C, tol=tol, max_iter=max_iter)
        xt, yt = data.features[test], data.labels[test]
        f_val = np.atleast_1d(decision_value(model, xt))
        pred = np.where(f_val >= 0, 1.0, -1.0)
        acc = float(np.mean(pred == yt))
        try:
            pts, auc = roc_curve(f_val, yt)
        except SingleClass:
            pts, auc = None, None
        return acc, int(test.sum()), pts, auc

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(run, range(k)))
    else:
        results = [run(f) for f in range(k)]
    return CvReport(
        k=k,
        accuracies=[r[0] for r in results],
        fold_sizes=[r[1] for r in results],
        folds=folds,
        roc=[r[2] for r in results],
        auc=[r[3] for r in results],
    )


# --------------------------------------------------------------------------
# serialisation


def model_to_dict(model, calib=None, extras=None):
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "w": model.w.tolist(),
        "b": model.b,
        "alphas": model.alphas.tolist(),
        "C": model.C,
        "converged": model.converged,
        "calibration": None if calib is None else {"A": calib.A, "B": calib.B},
    }
    if extras:
        doc.update(extras)
    return doc


def model_from_dict(doc):
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError("not a climarisk SVM model document")
    if doc.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model version {doc.get('version')!r}")
    alphas = np.asarray(doc["alphas"], dtype=float)
    model = SvmModel(
        w=np.asarray(doc["w"], dtype=float),
        b=float(doc["b"]),
        alphas=alphas,
        C=float(doc["C"]),
        support_indices=np.flatnonzero(alphas > ALPHA_EPS),
        converged=bool(doc.get("converged", True)),
    )
    cal = doc.get("calibration")
    calib = None if cal is None else Calibration(float(cal["A"]), float(cal["B"]))
    return model, calib


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return (*model_from_dict(doc), doc)
