import json

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from oracles import mann_whitney_auc

from climarisk.classifier import roc_curve
from climarisk.clustering import kmeans
from climarisk.dataset import IndicatorPanel, normalize
from climarisk.elasticity import predict_scenario
from climarisk.mcdm import ahp_weights, orm_weights, spearman
from climarisk.report import dumps
from climarisk.sampling import SmoteConfig, smote

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
SETTINGS = settings(max_examples=60, deadline=None)


def panel_of(values, directions):
    n, m = values.shape
    return IndicatorPanel(tuple(map(str, range(n))), tuple(f"c{j}" for j in range(m)),
                          directions, values)


@SETTINGS
@given(arrays(float, st.tuples(st.integers(2, 8), st.integers(1, 4)), elements=finite))
def test_direction_duals_sum_to_one(x):
    m = x.shape[1]
    assume(np.all(np.ptp(x, axis=0) > 1e-6))
    pos = normalize(panel_of(x, ("positive",) * m)).values
    neg = normalize(panel_of(x, ("negative",) * m)).values
    np.testing.assert_allclose(pos + neg, 1.0, atol=1e-12)
    assert pos.min() >= 0 and pos.max() <= 1


@SETTINGS
@given(arrays(float, st.tuples(st.integers(2, 8), st.integers(1, 4)),
              elements=st.floats(-100, 100)),
       st.floats(0.01, 100), st.floats(-100, 100))
def test_affine_invariance(x, a, c):
    assume(np.all(np.ptp(x, axis=0) > 1e-3))
    m = x.shape[1]
    base = normalize(panel_of(x, ("positive",) * m)).values
    moved = normalize(panel_of(a * x + c, ("positive",) * m)).values
    np.testing.assert_allclose(base, moved, atol=1e-9)


@SETTINGS
@given(st.lists(st.floats(0.0, 1.0), min_size=2, max_size=9))
def test_orm_sums_to_one_and_recurrence(S):
    wv = orm_weights(S)
    w = wv.weights
    assert abs(w.sum() - 1.0) < 1e-12
    order = np.argsort(-np.asarray(S), kind="stable")
    s = np.maximum(np.asarray(S)[order], 1e-6)
    ws = w[order]
    for j in range(1, len(S)):
        assert abs(ws[j - 1] - s[j - 1] / s[j] * ws[j]) <= 1e-12 * max(1.0, ws[j - 1])


@SETTINGS
@given(arrays(float, st.integers(3, 9), elements=st.floats(0.05, 1.0)))
def test_ahp_recovers_consistent_weights(w):
    w = w / w.sum()
    res = ahp_weights(w[:, None] / w[None, :])
    np.testing.assert_allclose(res.weights, w, atol=1e-10)
    assert abs(res.lambda_max - len(w)) < 1e-9
    assert abs(res.CR) < 1e-9


@SETTINGS
@given(st.integers(0, 2**32 - 1), st.integers(3, 12), st.integers(1, 4))
def test_smote_points_on_segments(seed, n, d):
    x = np.random.default_rng(seed).normal(size=(n, d))
    res = smote(x, config=SmoteConfig(n_synthetic=40, seed=seed))
    a, b = x[res.base_index], x[res.neighbor_index]
    seg = b - a
    t = np.einsum("ij,ij->i", res.samples - a, seg) / np.einsum("ij,ij->i", seg, seg)
    resid = np.linalg.norm(res.samples - a - t[:, None] * seg, axis=1)
    assert resid.max() < 1e-9
    assert np.all(res.samples >= np.minimum(a, b) - 1e-12)
    assert np.all(res.samples <= np.maximum(a, b) + 1e-12)


@SETTINGS
@given(st.lists(st.tuples(st.integers(0, 5), st.booleans()), min_size=2, max_size=12))
def test_auc_is_mann_whitney(rows):
    s = [float(v) for v, _ in rows]
    y = [1 if pos else -1 for _, pos in rows]
    assume(1 in y and -1 in y)
    _, auc = roc_curve(s, y)
    assert auc == float(mann_whitney_auc(s, y))


@SETTINGS
@given(arrays(float, st.integers(1, 5), elements=st.integers(-64, 64).map(float)),
       arrays(float, 5, elements=st.integers(-8, 8).map(lambda v: v / 8)),
       st.integers(0, 16).map(lambda v: v / 16), st.integers(0, 16).map(lambda v: v / 16))
def test_scenario_linear_in_lambda(x, b, l1, l2):
    b = b[: x.shape[0]]
    f = lambda lam: predict_scenario(x, b, lam, clamp=False)  # noqa: E731
    # dyadic inputs keep every product exact, so linearity holds bit for bit
    np.testing.assert_array_equal(f(l1) + f(l2), f(0.0) + f(l1 + l2))
    np.testing.assert_array_equal(f(0.0), x)


@SETTINGS
@given(st.integers(0, 2**32 - 1), st.integers(2, 30), st.integers(1, 4))
def test_kmeans_history_non_increasing(seed, n, K):
    assume(K <= n)
    x = np.random.default_rng(seed).normal(size=(n, 2))
    c = kmeans(x, K, seed=seed, check=True, restarts=2)
    h = c.inertia_history
    assert np.all(h[1:] <= h[:-1] * (1 + 1e-12) + 1e-300)
    assert np.bincount(c.assignment, minlength=K).min() >= 1


@SETTINGS
@given(st.lists(finite, min_size=2, max_size=20, unique=True))
def test_spearman_bounds_and_symmetry(a):
    b = list(reversed(a))
    r = spearman(a, b)
    assert -1.0 - 1e-12 <= r <= 1.0 + 1e-12
    assert r == spearman(b, a)
    assert spearman(a, a) == 1.0


@SETTINGS
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), max_size=10))
def test_json_floats_round_trip(vals):
    assert json.loads(dumps({"v": vals}))["v"] == vals
