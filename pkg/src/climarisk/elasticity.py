"""Log-linear elasticity fits and weather-shock scenario sweeps."""
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ClampWarning,
    DimensionMismatch,
    GridEmpty,
    NoModel,
    NonPositiveValue,
    RankDeficient,
    TooFewObservations,
)


@dataclass(frozen=True)
class ElasticityModel:
    intercept: float
    betas: np.ndarray
    names: tuple
    r2: float
    residual_variance: float
    offset: float = 0.0
    mode: str = "multivariate"
    n_obs: int = 0
    residuals: np.ndarray = field(default=None, repr=False)

    @property
    def alpha(self):
        return float(np.exp(self.intercept))

    def to_dict(self):
        return {
            "mode": self.mode,
            "intercept": self.intercept,
            "betas": dict(zip(self.names, self.betas.tolist())),
            "r2": self.r2,
            "residual_variance": self.residual_variance,
            "offset": self.offset,
            "n_obs": self.n_obs,
        }


@dataclass(frozen=True)
class ProbabilityCurve:
    lambdas: np.ndarray
    probabilities: np.ndarray
    lambda_star: float = None
    warnings: tuple = ()

    def to_csv(self):
        lines = ["lambda,probability"]
        for lam, p in zip(self.lambdas, self.probabilities):
            lines.append(f"{format(float(lam), '.17g')},{format(float(p), '.17g')}")
        return "\n".join(lines) + "\n"


def fit_cdc(target, regressors, offset=0.0, names=None, collapse=False):
    """Least-squares fit of ``ln Y = ln a + sum_j b_j ln(K_j + offset)``.

    Under i.i.d. Gaussian log-residuals this is the maximum-likelihood
    estimate. ``collapse=True`` sums the regressor columns first (e.g. total
    extreme-weather days) and returns a single elasticity.
    """
    y = np.asarray(target, dtype=float).ravel()
    k = np.asarray(regressors, dtype=float)
    if k.ndim == 1:
        k = k[:, None]
    if k.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"{y.shape[0]} targets vs {k.shape[0]} regressor rows")
    if offset < 0:
        raise ValueError("offset must be nonnegative")
    if names is None:
        names = tuple(f"K{j + 1}" for j in range(k.shape[1]))
    names = tuple(names)
    if collapse:
        k = k.sum(axis=1, keepdims=True)
        names = ("+".join(names),) if len(names) > 1 else names
    if len(names) != k.shape[1]:
        raise DimensionMismatch("names do not match regressor count")

    bad = np.argwhere(~(y > 0))
    if bad.size:
        raise NonPositiveValue(f"target value at row {bad[0][0] + 1} is not positive",
                               column="target", row=int(bad[0][0]) + 1)
    shifted = k + offset
    bad = np.argwhere(~(shifted > 0))
    if bad.size:
        r, c = bad[0]
        raise NonPositiveValue(
            f"regressor {names[c]!r} at row {r + 1} is not positive after offset {offset}",
            column=names[c], row=int(r) + 1)

    n, p = k.shape
    if n < p + 1:
        raise TooFewObservations(f"{n} observations for {p} regressors")
    design = np.column_stack([np.ones(n), np.log(shifted)])
    ly = np.log(y)
    coef, _, rank, sv = np.linalg.lstsq(design, ly, rcond=None)
    if rank < p + 1 or sv[-1] <= sv[0] * 1e-12:
        raise RankDeficient("log-regressors are collinear (or constant)")
    resid = ly - design @ coef
    ss_res = float(resid @ resid)
    centred = ly - ly.mean()
    ss_tot = float(centred @ centred)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    dof = n - p - 1
    var = ss_res / dof if dof > 0 else 0.0
    return ElasticityModel(float(coef[0]), coef[1:], names, r2, var, float(offset),
                           "collapsed" if collapse else "multivariate", n, resid)


def predict_scenario(baseline, betas, lam, clamp=True):
    """Linearised response ``x * (1 + lam * beta)`` per indicator.

    Negative predictions are clamped to 0 with a :class:`ClampWarning`
    unless ``clamp`` is false.
    """
    x = np.asarray(baseline, dtype=float)
    b = np.asarray(betas, dtype=float)
    if x.shape != b.shape:
        raise DimensionMismatch(f"baseline {x.shape} vs betas {b.shape}")
    if not lam > -1:
        raise ValueError("lambda must exceed -1")
    out = x * (1.0 + lam * b)
    if clamp and np.any(out < 0):
        warnings.warn(f"linearised prediction negative at lambda={lam}; clamped to 0",
                      ClampWarning, stacklevel=2)
        out = np.maximum(out, 0.0)
    return out


@dataclass(frozen=True)
class InsurancePipeline:
    """Raw indicator vector -> underwriting probability.

    Bundles a trained model with its calibration and the training panel's
    normalisation so scenario predictions are scored on the same scale.
    """

    model: object
    calibration: object
    normalizer: object

    def probability(self, raw):
        from .classifier import predict_probability

        x, clipped = self.normalizer.transform(raw, clip=True)
        if clipped:
            warnings.warn("scenario indicators left the training range; clamped to [0, 1]",
                          ClampWarning, stacklevel=2)
        return predict_probability(self.model, self.calibration, x)


def _scorer(pipeline):
    if pipeline is None:
        raise NoModel("sweep needs a trained pipeline")
    if callable(pipeline):
        return pipeline
    if hasattr(pipeline, "probability"):
        return pipeline.probability
    raise NoModel(f"cannot score with {type(pipeline).__name__}")


def _bisect(fn, lo, hi, f_lo, tol):
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sweep(pipeline, baseline, betas, lambda_grid, level=0.5, tol=1e-9):
    """Underwriting probability over a grid of fractional weather changes.

    ``pipeline`` is an :class:`InsurancePipeline` or any callable mapping a
    raw indicator vector to a probability. The first crossing of ``level``
    between grid points is refined by bisection to ``tol``.
    """
    grid = np.asarray(lambda_grid, dtype=float).ravel()
    if grid.size == 0:
        raise GridEmpty("lambda grid is empty")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("lambda grid must be strictly increasing")
    if np.any(grid <= -1):
        raise ValueError("lambda values must exceed -1")
    score = _scorer(pipeline)
    baseline = np.asarray(baseline, dtype=float)
    betas = np.asarray(betas, dtype=float)

    caught = []
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always", ClampWarning)

        def prob(lam):
            return float(score(predict_scenario(baseline, betas, lam)))

        probs = np.array([prob(lam) for lam in grid])
        star = None
        excess = probs - level
        for i in range(grid.size):
            if excess[i] == 0.0:
                star = float(grid[i])
                break
            if i + 1 < grid.size and (excess[i] > 0) != (excess[i + 1] > 0) \
                    and excess[i + 1] != 0.0:
                star = _bisect(lambda lam: prob(lam) - level, grid[i], grid[i + 1],
                               excess[i], tol)
                break
        caught = sorted({str(w.message) for w in rec if issubclass(w.category, ClampWarning)})
    return ProbabilityCurve(grid, probs, star, tuple(caught))
